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
#include <map>
#include <string>
#include <vector>

#include "accentforge/common.hpp"
#include "accentforge/lexicon.hpp"
#include "accentforge/manifest.hpp"
#include "accentforge/rng.hpp"
#include "accentforge/wav.hpp"

namespace accentforge {

// Bundled desk-scale lexicon: ~200 common words over an ARPABET-style
// phone set. Enough coverage to write varied toy transcripts while staying
// self-contained.
inline const char* ToyLexiconTable() {
  return
      "the:dh ah\na:ah\nof:ah v\nto:t uw\nand:ae n d\nin:ih n\nis:ih z\nit:ih t\n"
      "you:y uw\nthat:dh ae t\nhe:hh iy\nwas:w ah z\nfor:f ao r\non:aa n\nare:aa r\n"
      "with:w ih th\nas:ae z\nhis:hh ih z\nthey:dh ey\nbe:b iy\nat:ae t\none:w ah n\n"
      "have:hh ae v\nthis:dh ih s\nfrom:f r ah m\nor:ao r\nhad:hh ae d\nby:b ay\n"
      "hot:hh aa t\nword:w er d\nbut:b ah t\nwhat:w ah t\nsome:s ah m\nwe:w iy\n"
      "can:k ae n\nout:aw t\nother:ah dh er\nwere:w er\nall:ao l\nthere:dh eh r\n"
      "when:w eh n\nup:ah p\nuse:y uw z\nyour:y ao r\nhow:hh aw\nsaid:s eh d\n"
      "an:ae n\neach:iy ch\nshe:sh iy\nwhich:w ih ch\ndo:d uw\ntheir:dh eh r\n"
      "time:t ay m\nif:ih f\nwill:w ih l\nway:w ey\nabout:ah b aw t\nmany:m eh n iy\n"
      "then:dh eh n\nthem:dh eh m\nwrite:r ay t\nwould:w uh d\nlike:l ay k\nso:s ow\n"
      "these:dh iy z\nher:hh er\nlong:l ao ng\nmake:m ey k\nthing:th ih ng\nsee:s iy\n"
      "him:hh ih m\ntwo:t uw\nhas:hh ae z\nlook:l uh k\nmore:m ao r\nday:d ey\n"
      "could:k uh d\ngo:g ow\ncome:k ah m\ndid:d ih d\nnumber:n ah m b er\n"
      "sound:s aw n d\nno:n ow\nmost:m ow s t\npeople:p iy p ah l\nmy:m ay\n"
      "over:ow v er\nknow:n ow\nwater:w ao t er\nthan:dh ae n\ncall:k ao l\n"
      "first:f er s t\nwho:hh uw\nmay:m ey\ndown:d aw n\nside:s ay d\nbeen:b ih n\n"
      "now:n aw\nfind:f ay n d\nany:eh n iy\nnew:n uw\nwork:w er k\npart:p aa r t\n"
      "take:t ey k\nget:g eh t\nplace:p l ey s\nmade:m ey d\nlive:l ih v\n"
      "where:w eh r\nafter:ae f t er\nback:b ae k\nlittle:l ih t ah l\nonly:ow n l iy\n"
      "round:r aw n d\nman:m ae n\nyear:y ih r\ncame:k ey m\nshow:sh ow\n"
      "every:eh v r iy\ngood:g uh d\nme:m iy\ngive:g ih v\nour:aw r\nunder:ah n d er\n"
      "name:n ey m\nvery:v eh r iy\nthrough:th r uw\njust:jh ah s t\nform:f ao r m\n"
      "sentence:s eh n t ah n s\ngreat:g r ey t\nthink:th ih ng k\nsay:s ey\n"
      "help:hh eh l p\nlow:l ow\nline:l ay n\ndiffer:d ih f er\nturn:t er n\n"
      "cause:k ao z\nmuch:m ah ch\nmean:m iy n\nbefore:b ih f ao r\nmove:m uw v\n"
      "right:r ay t\nboy:b oy\nold:ow l d\ntoo:t uw\nsame:s ey m\ntell:t eh l\n"
      "does:d ah z\nset:s eh t\nthree:th r iy\nwant:w aa n t\nair:eh r\nwell:w eh l\n"
      "also:ao l s ow\nplay:p l ey\nsmall:s m ao l\nend:eh n d\nput:p uh t\n"
      "home:hh ow m\nread:r iy d\nhand:hh ae n d\nport:p ao r t\nlarge:l aa r jh\n"
      "spell:s p eh l\nadd:ae d\neven:iy v ah n\nland:l ae n d\nhere:hh ih r\n"
      "must:m ah s t\nbig:b ih g\nhigh:hh ay\nsuch:s ah ch\nfollow:f aa l ow\n"
      "act:ae k t\nwhy:w ay\nask:ae s k\nmen:m eh n\nchange:ch ey n jh\n"
      "went:w eh n t\nlight:l ay t\nkind:k ay n d\noff:ao f\nneed:n iy d\n"
      "house:hh aw s\npicture:p ih k ch er\ntry:t r ay\nus:ah s\nagain:ah g eh n\n"
      "animal:ae n ah m ah l\npoint:p oy n t\nmother:m ah dh er\nworld:w er l d\n"
      "near:n ih r\nbuild:b ih l d\nself:s eh l f\nearth:er th\nfather:f aa dh er\n"
      "head:hh eh d\nstand:s t ae n d\nown:ow n\npage:p ey jh\nshould:sh uh d\n"
      "country:k ah n t r iy\nfound:f aw n d\nanswer:ae n s er\nschool:s k uw l\n"
      "grow:g r ow\nstudy:s t ah d iy\nstill:s t ih l\nlearn:l er n\n"
      "plant:p l ae n t\ncover:k ah v er\nfood:f uw d\nsun:s ah n\nfour:f ao r\n"
      "between:b ih t w iy n\nstate:s t ey t\nkeep:k iy p\neye:ay\nnever:n eh v er\n"
      "last:l ae s t\nlet:l eh t\nthought:th ao t\ncity:s ih t iy\ntree:t r iy\n"
      "cross:k r ao s\nfarm:f aa r m\nhard:hh aa r d\nstart:s t aa r t\n";
}

inline PhonemeLexicon BuildToyLexicon() {
  PhonemeLexicon lex;
  for (const auto& line : Split(ToyLexiconTable(), '\n')) {
    if (line.empty()) continue;
    auto colon = line.find(':');
    lex.AddWord(line.substr(0, colon), SplitWords(line.substr(colon + 1)));
  }
  return lex;
}

inline std::vector<std::string> ToyWordList() {
  std::vector<std::string> words;
  for (const auto& line : Split(ToyLexiconTable(), '\n')) {
    if (line.empty()) continue;
    words.push_back(line.substr(0, line.find(':')));
  }
  return words;
}

// ------------------------- deterministic synthesizer ------------------------

namespace toyspeech {

enum class PhoneKind { kVowel, kNasal, kLiquid, kVoicedFric, kUnvoicedFric, kStop, kVoicedStop,
                       kAspirate, kPause };

struct PhoneSpec {
  PhoneKind kind;
  double f1, f2;     // formant centers (voiced sounds)
  double dur_ms;
  double noise_hz;   // noise color center (fricatives/bursts)
};

inline const std::map<std::string, PhoneSpec>& PhoneTable() {
  static const std::map<std::string, PhoneSpec> table = {
      {"aa", {PhoneKind::kVowel, 730, 1090, 115, 0}},
      {"ae", {PhoneKind::kVowel, 660, 1720, 115, 0}},
      {"ah", {PhoneKind::kVowel, 640, 1190, 100, 0}},
      {"ao", {PhoneKind::kVowel, 570, 840, 115, 0}},
      {"aw", {PhoneKind::kVowel, 640, 1000, 130, 0}},
      {"ay", {PhoneKind::kVowel, 660, 1400, 130, 0}},
      {"eh", {PhoneKind::kVowel, 530, 1840, 105, 0}},
      {"er", {PhoneKind::kVowel, 490, 1350, 110, 0}},
      {"ey", {PhoneKind::kVowel, 480, 2000, 125, 0}},
      {"ih", {PhoneKind::kVowel, 390, 1990, 95, 0}},
      {"iy", {PhoneKind::kVowel, 270, 2290, 105, 0}},
      {"ow", {PhoneKind::kVowel, 450, 900, 120, 0}},
      {"oy", {PhoneKind::kVowel, 500, 1100, 130, 0}},
      {"uh", {PhoneKind::kVowel, 440, 1020, 90, 0}},
      {"uw", {PhoneKind::kVowel, 300, 870, 110, 0}},
      {"m", {PhoneKind::kNasal, 250, 900, 70, 0}},
      {"n", {PhoneKind::kNasal, 250, 1700, 70, 0}},
      {"ng", {PhoneKind::kNasal, 250, 2000, 75, 0}},
      {"l", {PhoneKind::kLiquid, 360, 1300, 70, 0}},
      {"r", {PhoneKind::kLiquid, 310, 1060, 70, 0}},
      {"w", {PhoneKind::kLiquid, 290, 610, 65, 0}},
      {"y", {PhoneKind::kLiquid, 270, 2100, 65, 0}},
      {"v", {PhoneKind::kVoicedFric, 300, 1100, 70, 900}},
      {"dh", {PhoneKind::kVoicedFric, 350, 1400, 65, 1400}},
      {"z", {PhoneKind::kVoicedFric, 320, 1800, 75, 4800}},
      {"jh", {PhoneKind::kVoicedFric, 300, 1700, 80, 2600}},
      {"f", {PhoneKind::kUnvoicedFric, 0, 0, 85, 1100}},
      {"th", {PhoneKind::kUnvoicedFric, 0, 0, 80, 1300}},
      {"s", {PhoneKind::kUnvoicedFric, 0, 0, 90, 5200}},
      {"sh", {PhoneKind::kUnvoicedFric, 0, 0, 90, 2800}},
      {"ch", {PhoneKind::kUnvoicedFric, 0, 0, 80, 2600}},
      {"hh", {PhoneKind::kAspirate, 0, 0, 70, 800}},
      {"p", {PhoneKind::kStop, 0, 0, 60, 900}},
      {"t", {PhoneKind::kStop, 0, 0, 60, 4200}},
      {"k", {PhoneKind::kStop, 0, 0, 60, 2000}},
      {"b", {PhoneKind::kVoicedStop, 350, 800, 55, 700}},
      {"d", {PhoneKind::kVoicedStop, 350, 1700, 55, 3500}},
      {"g", {PhoneKind::kVoicedStop, 350, 1500, 55, 1800}},
      {"<wb>", {PhoneKind::kPause, 0, 0, 45, 0}},
  };
  return table;
}

struct SpeakerProfile {
  std::string id;
  double base_f0 = 120.0;
  double formant_scale = 1.0;
  double rate = 1.0;
  bool nonnative = false;
};

// Systematic accent effects: shifted vowel qualities, scaled formants,
// raised pitch. Keeps native/non-native audio linearly separable in pooled
// mel statistics while remaining plausible speech-like signals.
inline std::string AccentedPhone(const std::string& phone, bool nonnative) {
  if (!nonnative) return phone;
  if (phone == "ih") return "iy";
  if (phone == "ae") return "eh";
  if (phone == "uw") return "ow";
  if (phone == "er") return "ah";
  return phone;
}

inline double FormantEnvelope(double hz, double f1, double f2) {
  auto peak = [](double f, double center, double bw) {
    double d = (f - center) / bw;
    return 1.0 / (1.0 + d * d);
  };
  return peak(hz, f1, 90.0) + 0.7 * peak(hz, f2, 120.0) + 0.05;
}

// Renders one phone into the sample buffer. Voiced sounds are harmonic
// stacks shaped by a two-formant envelope; noise sounds are colored white
// noise; stops are closure plus burst.
inline void RenderPhone(std::vector<double>& out, const PhoneSpec& spec,
                        const SpeakerProfile& spk, double accent_formant_scale, double& t_global,
                        Rng& rng, int sample_rate) {
  int n = static_cast<int>(spec.dur_ms * spk.rate * sample_rate / 1000.0);
  double attack = 0.008 * sample_rate;
  auto envelope = [&](int i) {
    double a = std::min(1.0, i / attack);
    double r = std::min(1.0, (n - 1 - i) / attack);
    return a * r;
  };
  double f0 = spk.base_f0 * (spk.nonnative ? 1.1 : 1.0);
  double fscale = spk.formant_scale * accent_formant_scale;

  std::vector<double> noise(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) noise[static_cast<size_t>(i)] = rng.Uniform(-1.0, 1.0);
  auto colored_noise = [&](int i, double center) {
    // crude spectral tilt: difference emphasizes highs, averaging lows
    if (center > 3500) return i > 0 ? noise[i] - noise[i - 1] : noise[i];
    if (center > 1800) return i > 0 ? 0.5 * (noise[i] - noise[i - 2 >= 0 ? i - 2 : 0]) : noise[i];
    double acc = 0;
    for (int k = 0; k < 4; ++k) acc += noise[static_cast<size_t>(std::max(0, i - k))];
    return acc / 4.0;
  };

  for (int i = 0; i < n; ++i) {
    double t_in = static_cast<double>(i) / sample_rate;
    double t = t_global + t_in;
    double f0_t = f0 * (1.0 + 0.03 * std::sin(2.0 * M_PI * 3.0 * t)) * (1.0 - 0.04 * std::min(1.0, t / 1.5));
    double sample = 0.0;
    switch (spec.kind) {
      case PhoneKind::kVowel:
      case PhoneKind::kNasal:
      case PhoneKind::kLiquid: {
        double f1 = spec.f1 * fscale, f2 = spec.f2 * fscale;
        double amp_total = spec.kind == PhoneKind::kVowel ? 0.45 : 0.25;
        for (int h = 1; h * f0_t < 3800.0 && h <= 24; ++h) {
          double hz = h * f0_t;
          double amp = FormantEnvelope(hz, f1, f2) / (1.0 + 0.35 * h);
          sample += amp * std::sin(2.0 * M_PI * hz * t);
        }
        sample *= amp_total;
        break;
      }
      case PhoneKind::kVoicedFric: {
        double f1 = spec.f1 * fscale, f2 = spec.f2 * fscale;
        for (int h = 1; h * f0_t < 2000.0 && h <= 10; ++h) {
          double hz = h * f0_t;
          sample += 0.2 * FormantEnvelope(hz, f1, f2) / (1.0 + 0.4 * h) *
                    std::sin(2.0 * M_PI * hz * t);
        }
        sample += 0.08 * colored_noise(i, spec.noise_hz);
        break;
      }
      case PhoneKind::kUnvoicedFric:
        sample = 0.16 * colored_noise(i, spec.noise_hz);
        break;
      case PhoneKind::kAspirate:
        sample = 0.08 * colored_noise(i, spec.noise_hz);
        break;
      case PhoneKind::kStop: {
        int closure = n * 2 / 3;
        sample = i < closure ? 0.0 : 0.3 * colored_noise(i, spec.noise_hz) *
                                         (1.0 - static_cast<double>(i - closure) / (n - closure));
        break;
      }
      case PhoneKind::kVoicedStop: {
        int closure = n / 2;
        if (i < closure) {
          sample = 0.03 * std::sin(2.0 * M_PI * f0_t * t);
        } else {
          double f1 = spec.f1 * fscale, f2 = spec.f2 * fscale;
          for (int h = 1; h * f0_t < 1500.0 && h <= 6; ++h)
            sample += 0.25 * FormantEnvelope(h * f0_t, f1, f2) / h *
                      std::sin(2.0 * M_PI * h * f0_t * t);
          sample += 0.05 * colored_noise(i, spec.noise_hz);
        }
        break;
      }
      case PhoneKind::kPause:
        sample = 0.0;
        break;
    }
    out.push_back(sample * envelope(i));
  }
  t_global += static_cast<double>(n) / sample_rate;
}

inline std::vector<double> RenderUtterance(const std::vector<std::string>& phones,
                                           const SpeakerProfile& spk, uint64_t seed,
                                           int sample_rate = kCanonicalSampleRate) {
  std::vector<double> out;
  Rng rng = DeriveRng(seed, "toyspeech:" + spk.id);
  double t_global = 0.0;
  double accent_scale = spk.nonnative ? 1.18 : 1.0;
  // lead-in silence keeps onsets off the file boundary
  out.insert(out.end(), static_cast<size_t>(0.02 * sample_rate), 0.0);
  for (const auto& raw : phones) {
    std::string phone = AccentedPhone(raw, spk.nonnative);
    auto it = PhoneTable().find(phone);
    if (it == PhoneTable().end()) ThrowInternal("toyspeech: unknown phone " + phone);
    RenderPhone(out, it->second, spk, accent_scale, t_global, rng, sample_rate);
  }
  out.insert(out.end(), static_cast<size_t>(0.02 * sample_rate), 0.0);
  return out;
}

}  // namespace toyspeech

// ------------------------------ corpus writer -------------------------------

struct ToyCorpus {
  std::string dir;
  std::string manifest_path;           // all records
  std::string native_manifest_path;    // stage-1 training set
  std::string nonnative_manifest_path; // conversion/fine-tuning set
  std::string lexicon_path;
  std::vector<UtteranceRecord> records;
};

// Writes a deterministic toy corpus: WAVs, manifests and the bundled
// lexicon. Native speakers carry distinct pitch/formant profiles; the
// non-native speakers add the systematic accent shifts.
inline ToyCorpus MakeToyCorpus(const std::string& dir, int native_utts, int nonnative_utts,
                               uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "audio");

  PhonemeLexicon lex = BuildToyLexicon();
  std::vector<std::string> words = ToyWordList();

  std::vector<toyspeech::SpeakerProfile> native_speakers = {
      {"spk_na", 105.0, 0.97, 1.0, false},
      {"spk_nb", 132.0, 1.00, 0.97, false},
      {"spk_nc", 176.0, 1.04, 1.05, false},
      {"spk_nd", 210.0, 1.07, 1.0, false},
  };
  std::vector<toyspeech::SpeakerProfile> nonnative_speakers = {
      {"spk_fa", 118.0, 0.99, 1.06, true},
      {"spk_fb", 165.0, 1.03, 0.95, true},
  };

  ToyCorpus corpus;
  corpus.dir = dir;
  Rng sentence_rng = DeriveRng(seed, "toy_sentences");

  auto make_utt = [&](const std::string& id, const toyspeech::SpeakerProfile& spk) {
    int n_words = static_cast<int>(sentence_rng.UniformInt(3, 5));
    std::vector<std::string> sent;
    for (int w = 0; w < n_words; ++w)
      sent.push_back(words[static_cast<size_t>(
          sentence_rng.UniformInt(0, static_cast<int64_t>(words.size()) - 1))]);
    std::string transcript = Join(sent, " ");
    std::vector<int> ids = lex.Phonemize(transcript);
    std::vector<std::string> phones;
    for (int pid : ids) phones.push_back(lex.symbols()[static_cast<size_t>(pid)]);
    auto samples = toyspeech::RenderUtterance(phones, spk, MixSeed(seed, Fnv1a64(id)));
    std::string wav_rel = "audio/" + id + ".wav";
    WriteWav((fs::path(dir) / wav_rel).string(), samples);
    UtteranceRecord rec;
    rec.id = id;
    rec.audio_path = wav_rel;
    rec.speaker_id = spk.id;
    rec.accent_label = spk.nonnative ? AccentLabel::kNonnative : AccentLabel::kNative;
    rec.transcript = transcript;
    rec.phoneme_ids = ids;
    corpus.records.push_back(rec);
  };

  for (int i = 0; i < native_utts; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "nat%03d", i);
    make_utt(id, native_speakers[static_cast<size_t>(i) % native_speakers.size()]);
  }
  for (int i = 0; i < nonnative_utts; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "non%03d", i);
    make_utt(id, nonnative_speakers[static_cast<size_t>(i) % nonnative_speakers.size()]);
  }

  corpus.lexicon_path = (fs::path(dir) / "lexicon.txt").string();
  lex.Save(corpus.lexicon_path);
  corpus.manifest_path = (fs::path(dir) / "manifest.txt").string();
  SaveManifest(corpus.manifest_path, corpus.records);

  std::vector<UtteranceRecord> native, nonnative;
  for (const auto& r : corpus.records)
    (r.accent_label == AccentLabel::kNative ? native : nonnative).push_back(r);
  corpus.native_manifest_path = (fs::path(dir) / "manifest_native.txt").string();
  SaveManifest(corpus.native_manifest_path, native);
  corpus.nonnative_manifest_path = (fs::path(dir) / "manifest_nonnative.txt").string();
  SaveManifest(corpus.nonnative_manifest_path, nonnative);

  // Manifests keep relative paths; in-memory records get absolute ones.
  for (auto& r : corpus.records) r.audio_path = (fs::path(dir) / r.audio_path).string();
  return corpus;
}

}  // namespace accentforge
