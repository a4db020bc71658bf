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

#include <catch_amalgamated.hpp>

#include "accentforge/features.hpp"
#include "accentforge/lexicon.hpp"
#include "accentforge/manifest.hpp"
#include "accentforge/toyset.hpp"
#include "accentforge/wav.hpp"
#include "test_helpers.hpp"

using namespace accentforge;
using aftest::TempDir;

namespace {

std::vector<double> Sine(double hz, double seconds, int rate = 16000, double amp = 0.5) {
  std::vector<double> x(static_cast<size_t>(seconds * rate));
  for (size_t i = 0; i < x.size(); ++i) x[i] = amp * std::sin(2.0 * M_PI * hz * i / rate);
  return x;
}

}  // namespace

TEST_CASE("manifest: well-formed file loads in order") {
  TempDir tmp("manifest_ok");
  WriteTextFile(tmp.Sub("m.txt"),
                "u1|a.wav|spk1|native|the cat\n"
                "u2|b.wav|spk2|nonnative|a dog\n"
                "u3|c.wav|spk1|native|\n");
  auto records = LoadManifest(tmp.Sub("m.txt"));
  REQUIRE(records.size() == 3);
  CHECK(records[0].id == "u1");
  CHECK(records[1].accent_label == AccentLabel::kNonnative);
  CHECK(records[2].transcript.empty());
  // relative audio paths resolve against the manifest directory
  CHECK(records[0].audio_path == tmp.Sub("a.wav"));
}

TEST_CASE("manifest: empty file gives empty sequence") {
  TempDir tmp("manifest_empty");
  WriteTextFile(tmp.Sub("m.txt"), "");
  CHECK(LoadManifest(tmp.Sub("m.txt")).empty());
}

TEST_CASE("manifest: missing speaker_id names the line") {
  TempDir tmp("manifest_bad");
  WriteTextFile(tmp.Sub("m.txt"),
                "u1|a.wav|spk1|native|hello\n"
                "u2|b.wav||native|there\n");
  try {
    LoadManifest(tmp.Sub("m.txt"));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kData);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("speaker_id") != std::string::npos);
  }
}

TEST_CASE("manifest: unknown accent label rejected") {
  TempDir tmp("manifest_accent");
  WriteTextFile(tmp.Sub("m.txt"), "u1|a.wav|spk1|texan|howdy\n");
  CHECK_THROWS_AS(LoadManifest(tmp.Sub("m.txt")), Error);
}

TEST_CASE("compute_features: 32000 samples at hop 320 give 100 frames") {
  auto x = Sine(220.0, 2.0);
  REQUIRE(x.size() == 32000);
  StftConfig cfg;
  FeatureBundle fb = ComputeFeatures(x, 16000, cfg);
  CHECK(fb.frame_count == 100);
  CHECK(fb.linear_spec.cols() == 100);
  CHECK(fb.linear_spec.rows() == 513);
  CHECK(fb.mel_spec.cols() == 100);
  CHECK(fb.mel_spec.rows() == 80);
  CHECK(fb.f0.size() == 100);
}

TEST_CASE("compute_features: silence gives zero f0 and log-floor mel") {
  std::vector<double> x(16000, 0.0);
  StftConfig cfg;
  FeatureBundle fb = ComputeFeatures(x, 16000, cfg);
  CHECK(fb.f0.cwiseAbs().maxCoeff() == 0.0);
  double floor_log = std::log(cfg.log_floor);
  CHECK((fb.mel_spec.array() - floor_log).abs().maxCoeff() < 1e-12);
}

TEST_CASE("compute_features: 220 Hz sine tracked within 10 Hz") {
  auto x = Sine(220.0, 1.5);
  FeatureBundle fb = ComputeFeatures(x, 16000, StftConfig{});
  std::vector<double> voiced;
  for (Eigen::Index t = 0; t < fb.f0.size(); ++t)
    if (fb.f0[t] > 0) voiced.push_back(fb.f0[t]);
  REQUIRE(voiced.size() > 10);
  std::sort(voiced.begin(), voiced.end());
  double median = voiced[voiced.size() / 2];
  CHECK(std::abs(median - 220.0) < 10.0);
}

TEST_CASE("compute_features: rejects too-short and non-finite input") {
  StftConfig cfg;
  std::vector<double> tiny(cfg.hop - 1, 0.1);
  CHECK_THROWS_AS(ComputeFeatures(tiny, 16000, cfg), Error);
  std::vector<double> bad(16000, 0.1);
  bad[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ComputeFeatures(bad, 16000, cfg), Error);
}

TEST_CASE("extract_f0: silence is all zeros") {
  std::vector<double> x(16000, 0.0);
  AutocorrPitchTracker tracker;
  auto f0 = tracker.Extract(x, 16000, 320);
  REQUIRE(f0.size() == 50);
  for (double v : f0) CHECK(v == 0.0);
}

TEST_CASE("extract_f0: white noise is mostly unvoiced") {
  Rng rng(99);
  std::vector<double> x(32000);
  for (auto& v : x) v = rng.Uniform(-0.5, 0.5);
  AutocorrPitchTracker tracker;
  auto f0 = tracker.Extract(x, 16000, 320);
  int unvoiced = 0;
  for (double v : f0)
    if (v == 0.0) ++unvoiced;
  CHECK(static_cast<double>(unvoiced) / f0.size() >= 0.8);
}

TEST_CASE("extract_f0: bad range rejected") {
  PitchConfig cfg;
  cfg.f0_min = 400;
  cfg.f0_max = 60;
  CHECK_THROWS_AS(AutocorrPitchTracker(cfg), Error);
}

TEST_CASE("extract_f0: entries are zero or inside the configured range") {
  ToyCorpus corpus = MakeToyCorpus(TempDir("f0_range").Sub("c"), 2, 1, 7);
  AutocorrPitchTracker tracker;
  for (const auto& rec : corpus.records) {
    Waveform wav = LoadAudio(rec.audio_path);
    auto f0 = tracker.Extract(wav.samples, wav.sample_rate, 320);
    for (double v : f0) {
      bool ok = v == 0.0 || (v >= tracker.config().f0_min && v <= tracker.config().f0_max);
      REQUIRE(ok);
    }
  }
}

TEST_CASE("phonemize: empty transcript gives empty sequence") {
  PhonemeLexicon lex = BuildToyLexicon();
  CHECK(lex.Phonemize("").empty());
}

TEST_CASE("phonemize: single word returns its lexicon entry") {
  PhonemeLexicon lex;
  lex.AddWord("cat", {"k", "ae", "t"});
  auto ids = lex.Phonemize("cat");
  REQUIRE(ids.size() == 3);
  for (int id : ids) CHECK(id >= 2);  // pad/boundary reserved
  CHECK(lex.Phonemize("CAT") == ids);  // case folded
}

TEST_CASE("phonemize: two words joined by the boundary symbol") {
  PhonemeLexicon lex;
  lex.AddWord("big", {"b", "ih", "g"});
  lex.AddWord("cat", {"k", "ae", "t"});
  auto one = lex.Phonemize("big");
  auto two = lex.Phonemize("cat");
  auto both = lex.Phonemize("big cat");
  std::vector<int> expected = one;
  expected.push_back(PhonemeLexicon::kBoundaryId);
  expected.insert(expected.end(), two.begin(), two.end());
  CHECK(both == expected);
}

TEST_CASE("phonemize: unknown word policies") {
  PhonemeLexicon lex;
  lex.AddWord("known", {"n", "ow", "n"});
  CHECK_THROWS_AS(lex.Phonemize("unknown"), Error);
  lex.set_unknown_policy(UnknownWordPolicy::kSkip);
  CHECK(lex.Phonemize("unknown known") == lex.Phonemize("known"));
}

TEST_CASE("lexicon: save/load round trip and dense ids") {
  TempDir tmp("lexicon_rt");
  PhonemeLexicon lex = BuildToyLexicon();
  lex.Save(tmp.Sub("lex.txt"));
  PhonemeLexicon loaded = PhonemeLexicon::Load(tmp.Sub("lex.txt"));
  CHECK(loaded.num_words() == lex.num_words());
  CHECK(lex.num_words() >= 200);

  // ids may be assigned in a different order across files; the phone
  // sequences themselves must round trip
  auto to_symbols = [](const PhonemeLexicon& l, const std::vector<int>& ids) {
    std::vector<std::string> out;
    for (int id : ids) out.push_back(l.symbols()[static_cast<size_t>(id)]);
    return out;
  };
  CHECK(to_symbols(loaded, loaded.Phonemize("the water")) ==
        to_symbols(lex, lex.Phonemize("the water")));

  // a second save is byte-identical (deterministic file order)
  loaded.Save(tmp.Sub("lex2.txt"));
  CHECK(ReadTextFile(tmp.Sub("lex2.txt")) == ReadTextFile(tmp.Sub("lex.txt")));
}

TEST_CASE("feature invariants hold across a randomized corpus") {
  TempDir tmp("corpus_inv");
  ToyCorpus corpus = MakeToyCorpus(tmp.Sub("c"), 4, 2, 31);
  PhonemeLexicon lex = BuildToyLexicon();
  StftConfig stft;
  for (const auto& rec : corpus.records) {
    Waveform wav = LoadAudio(rec.audio_path);
    FeatureBundle fb = ComputeFeatures(wav.samples, wav.sample_rate, stft);
    int expect = static_cast<int>(wav.samples.size()) / stft.hop;
    CHECK(fb.frame_count == expect);
    CHECK(fb.linear_spec.cols() == expect);
    CHECK(fb.mel_spec.cols() == expect);
    CHECK(fb.f0.size() == expect);
    CHECK((fb.linear_spec.array() >= 0.0).all());

    // determinism: bitwise-equal recomputation
    FeatureBundle fb2 = ComputeFeatures(wav.samples, wav.sample_rate, stft);
    CHECK(fb.linear_spec == fb2.linear_spec);
    CHECK(fb.mel_spec == fb2.mel_spec);
    CHECK(fb.f0 == fb2.f0);

    // phoneme ids always index into the lexicon
    for (int id : rec.phoneme_ids) {
      CHECK(id >= 0);
      CHECK(id < static_cast<int>(lex.num_symbols()));
    }
  }
}

TEST_CASE("wav io: pcm16 round trip and resampling") {
  TempDir tmp("wav_rt");
  auto x = Sine(440.0, 0.5);
  WriteWav(tmp.Sub("a.wav"), x);
  Waveform back = ReadWav(tmp.Sub("a.wav"));
  REQUIRE(back.samples.size() == x.size());
  double max_err = 0;
  for (size_t i = 0; i < x.size(); ++i) max_err = std::max(max_err, std::abs(back.samples[i] - x[i]));
  CHECK(max_err < 1.0 / 32000.0);

  WriteWav(tmp.Sub("b.wav"), Sine(440.0, 0.5, 8000), 8000);
  Waveform up = LoadAudio(tmp.Sub("b.wav"));
  CHECK(up.sample_rate == 16000);
  CHECK(up.samples.size() == 8000);
}
