// Copyright (c) 2026 AccentForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "accentforge/common.hpp"
#include "accentforge/lexicon.hpp"

namespace accentforge {

enum class AccentLabel { kNative, kNonnative };

inline const char* AccentLabelName(AccentLabel a) {
  return a == AccentLabel::kNative ? "native" : "nonnative";
}

inline AccentLabel ParseAccentLabel(const std::string& s) {
  if (s == "native") return AccentLabel::kNative;
  if (s == "nonnative") return AccentLabel::kNonnative;
  ThrowData("unknown accent label '" + s + "' (expected native|nonnative)");
}

struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  int sample_rate = 16000;
  std::string transcript;
  std::vector<int> phoneme_ids;
  std::string speaker_id;
  AccentLabel accent_label = AccentLabel::kNative;
};

// Manifest line format: id|audio_path|speaker_id|accent_label|transcript
// Relative audio paths resolve against the manifest's directory.
inline std::vector<UtteranceRecord> LoadManifest(const std::string& path,
                                                 const PhonemeLexicon* lexicon = nullptr) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) ThrowIo("manifest not found: " + path);
  std::string text = ReadTextFile(path);
  fs::path base = fs::path(path).parent_path();

  std::vector<UtteranceRecord> records;
  std::set<std::string> seen_ids;
  int line_no = 0;
  for (const auto& line : Split(text, '\n')) {
    ++line_no;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = Split(t, '|');
    if (fields.size() != 5)
      ThrowData("manifest " + path + " line " + std::to_string(line_no) + ": expected 5 fields "
                "(id|audio_path|speaker_id|accent_label|transcript), got " +
                std::to_string(fields.size()));
    UtteranceRecord rec;
    rec.id = Trim(fields[0]);
    rec.audio_path = Trim(fields[1]);
    rec.speaker_id = Trim(fields[2]);
    std::string accent = Trim(fields[3]);
    rec.transcript = Trim(fields[4]);
    if (rec.id.empty())
      ThrowData("manifest line " + std::to_string(line_no) + ": empty id");
    if (rec.audio_path.empty())
      ThrowData("manifest line " + std::to_string(line_no) + ": empty audio_path");
    if (rec.speaker_id.empty())
      ThrowData("manifest line " + std::to_string(line_no) + ": missing speaker_id");
    try {
      rec.accent_label = ParseAccentLabel(accent);
    } catch (const Error& e) {
      ThrowData("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen_ids.insert(rec.id).second)
      ThrowData("manifest line " + std::to_string(line_no) + ": duplicate id '" + rec.id + "'");
    if (!fs::path(rec.audio_path).is_absolute())
      rec.audio_path = (base / rec.audio_path).string();
    if (lexicon && !rec.transcript.empty()) {
      rec.phoneme_ids = lexicon->Phonemize(rec.transcript);
      if (rec.phoneme_ids.empty())
        ThrowData("manifest line " + std::to_string(line_no) + ": transcript '" + rec.transcript +
                  "' phonemized to an empty sequence");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void SaveManifest(const std::string& path, const std::vector<UtteranceRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.id + "|" + r.audio_path + "|" + r.speaker_id + "|" +
           AccentLabelName(r.accent_label) + "|" + r.transcript + "\n";
  }
  WriteTextFile(path, out);
}

}  // namespace accentforge
