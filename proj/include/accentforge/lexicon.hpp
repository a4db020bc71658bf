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

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "accentforge/common.hpp"

namespace accentforge {

enum class UnknownWordPolicy { kError, kSkip, kSpell };

// Word -> phoneme-id lookup. Symbol ids are dense; id 0 is the padding
// symbol and id 1 the word boundary inserted between words.
class PhonemeLexicon {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kBoundaryId = 1;

  PhonemeLexicon() {
    symbols_ = {"<pad>", "<wb>"};
    symbol_ids_["<pad>"] = 0;
    symbol_ids_["<wb>"] = 1;
  }

  int AddSymbol(const std::string& phone) {
    auto it = symbol_ids_.find(phone);
    if (it != symbol_ids_.end()) return it->second;
    int id = static_cast<int>(symbols_.size());
    symbols_.push_back(phone);
    symbol_ids_[phone] = id;
    return id;
  }

  void AddWord(const std::string& word, const std::vector<std::string>& phones) {
    std::vector<int> ids;
    ids.reserve(phones.size());
    for (const auto& p : phones) ids.push_back(AddSymbol(p));
    words_[ToLower(word)] = std::move(ids);
  }

  bool HasWord(const std::string& word) const { return words_.count(ToLower(word)) > 0; }

  size_t num_symbols() const { return symbols_.size(); }
  size_t num_words() const { return words_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  void set_unknown_policy(UnknownWordPolicy p) { unknown_policy_ = p; }
  UnknownWordPolicy unknown_policy() const { return unknown_policy_; }

  // Per-word phoneme sequences concatenated with a word-boundary symbol.
  std::vector<int> Phonemize(const std::string& transcript) const {
    std::vector<int> out;
    bool first = true;
    for (const auto& raw : SplitWords(transcript)) {
      std::string word = ToLower(raw);
      std::vector<int> ids;
      auto it = words_.find(word);
      if (it != words_.end()) {
        ids = it->second;
      } else {
        switch (unknown_policy_) {
          case UnknownWordPolicy::kError:
            ThrowData("lexicon: out-of-vocabulary word '" + word + "'");
          case UnknownWordPolicy::kSkip:
            continue;
          case UnknownWordPolicy::kSpell:
            for (char c : word) {
              auto sit = symbol_ids_.find(std::string(1, c));
              if (sit != symbol_ids_.end()) ids.push_back(sit->second);
            }
            if (ids.empty()) continue;
            break;
        }
      }
      if (!first) out.push_back(kBoundaryId);
      out.insert(out.end(), ids.begin(), ids.end());
      first = false;
    }
    return out;
  }

  // File format: one `word<TAB>ph1 ph2 ...` entry per line.
  static PhonemeLexicon Load(const std::string& path) {
    PhonemeLexicon lex;
    std::string text = ReadTextFile(path);
    int line_no = 0;
    for (const auto& line : Split(text, '\n')) {
      ++line_no;
      std::string t = Trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto tab = t.find('\t');
      if (tab == std::string::npos)
        ThrowData("lexicon " + path + " line " + std::to_string(line_no) + ": missing tab separator");
      std::string word = Trim(t.substr(0, tab));
      auto phones = SplitWords(t.substr(tab + 1));
      if (word.empty() || phones.empty())
        ThrowData("lexicon " + path + " line " + std::to_string(line_no) + ": empty word or phones");
      lex.AddWord(word, phones);
    }
    return lex;
  }

  void Save(const std::string& path) const {
    std::string out;
    // Deterministic file order regardless of insertion history.
    std::map<std::string, std::vector<int>> sorted(words_.begin(), words_.end());
    for (const auto& [word, ids] : sorted) {
      out += word;
      out += '\t';
      for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ' ';
        out += symbols_[static_cast<size_t>(ids[i])];
      }
      out += '\n';
    }
    WriteTextFile(path, out);
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> symbol_ids_;
  std::unordered_map<std::string, std::vector<int>> words_;
  UnknownWordPolicy unknown_policy_ = UnknownWordPolicy::kError;
};

}  // namespace accentforge
