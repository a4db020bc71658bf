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

#include "accentforge/classifier.hpp"
#include "accentforge/evalsuite.hpp"
#include "accentforge/metrics.hpp"
#include "accentforge/selfcheck.hpp"
#include "accentforge/toyset.hpp"
#include "test_helpers.hpp"

using namespace accentforge;
using aftest::TempDir;

TEST_CASE("wer: identical sequences score zero") {
  CHECK(WordErrorRate("hello there world", "hello there world") == 0.0);
}

TEST_CASE("wer: anchor cases 33.33 and 150.0") {
  CHECK(WordErrorRate("the cat sat", "the cat") == Catch::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(WordErrorRate("a b", "x y z") == Catch::Approx(150.0).epsilon(1e-12));
}

TEST_CASE("wer: empty reference rejected") {
  CHECK_THROWS_AS(WordErrorRate("", "hello"), Error);
}

TEST_CASE("wer: matches brute-force edit cost on 200 random cases") {
  Rng rng(7);
  std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int c = 0; c < 200; ++c) {
    std::vector<std::string> ref, hyp;
    int nr = static_cast<int>(rng.UniformInt(1, 5));
    int nh = static_cast<int>(rng.UniformInt(0, 5));
    for (int i = 0; i < nr; ++i) ref.push_back(alphabet[rng.UniformInt(0, 3)]);
    for (int i = 0; i < nh; ++i) hyp.push_back(alphabet[rng.UniformInt(0, 3)]);
    double expect = 100.0 * EditCostBruteForce(ref, hyp) / ref.size();
    REQUIRE(WordErrorRate(ref, hyp) == Catch::Approx(expect).margin(1e-9));
  }
}

TEST_CASE("wer: asymmetry counterexample") {
  // one deletion over three words vs one insertion over two words
  double ab = WordErrorRate("a b c", "a b");
  double ba = WordErrorRate("a b", "a b c");
  CHECK(ab == Catch::Approx(100.0 / 3.0));
  CHECK(ba == Catch::Approx(50.0));
  CHECK(ab != ba);
}

TEST_CASE("secs: anchors and properties") {
  Vec a(3), b(3);
  a << 1, 2, 3;
  CHECK(Secs(a, a) == Catch::Approx(1.0).epsilon(1e-12));
  b << -1, -2, -3;
  CHECK(Secs(a, b) == Catch::Approx(-1.0).epsilon(1e-12));
  Vec c(2), d(2);
  c << 1, 0;
  d << 0, 1;
  CHECK(Secs(c, d) == 0.0);
  CHECK_THROWS_AS(Secs(c, Vec::Zero(2)), Error);
  CHECK_THROWS_AS(Secs(c, Vec::Ones(3)), Error);

  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    Vec v = rng.NormalMat(8, 1);
    if (v.norm() < 1e-6) continue;
    CHECK(Secs(v, v) == Catch::Approx(1.0).epsilon(1e-9));
    Vec w = rng.NormalMat(8, 1);
    if (w.norm() < 1e-6) continue;
    CHECK(std::abs(Secs(v, w)) <= 1.0 + 1e-12);
  }
  CHECK(SecsSameSpeaker(0.86));
  CHECK_FALSE(SecsSameSpeaker(0.85));
}

TEST_CASE("accent classifier: degenerate always-nonnative scores 100") {
  // Train to saturation on nonnative-only labels.
  Rng rng(11);
  AccentClassifier clf(4, 4, 33);
  std::vector<Vec> feats;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    feats.push_back(rng.NormalMat(4, 1));
    labels.push_back(1);
  }
  clf.Train(feats, labels, 400, 5e-2);
  CHECK(AccentAccuracy(clf, feats) == 100.0);
  CHECK_THROWS_AS(AccentAccuracy(clf, {}), Error);
}

TEST_CASE("accent classifier: separable features reach 95 percent on held-out data") {
  Rng rng(13);
  auto sample = [&](double shift) {
    Vec v = rng.NormalMat(6, 1);
    v.array() += shift;
    return v;
  };
  std::vector<Vec> train_feats, held_nonnative, held_native;
  std::vector<int> train_labels;
  for (int i = 0; i < 60; ++i) {
    train_feats.push_back(sample(i % 2 ? 2.0 : -2.0));
    train_labels.push_back(i % 2);
  }
  for (int i = 0; i < 40; ++i) {
    held_nonnative.push_back(sample(2.0));
    held_native.push_back(sample(-2.0));
  }
  AccentClassifier clf(6, 8, 44);
  clf.Train(train_feats, train_labels, 300, 3e-2);
  CHECK(AccentAccuracy(clf, held_nonnative) >= 95.0);
  CHECK(AccentAccuracy(clf, held_native) <= 5.0);
}

TEST_CASE("mel stats features separate the toy accents") {
  TempDir tmp("acc_toy");
  ToyCorpus corpus = MakeToyCorpus(tmp.Sub("c"), 8, 8, 77);
  StftConfig stft;
  std::vector<Vec> feats;
  std::vector<int> labels;
  for (const auto& rec : corpus.records) {
    Waveform wav = LoadAudio(rec.audio_path);
    FeatureBundle fb = ComputeFeatures(wav.samples, wav.sample_rate, stft);
    feats.push_back(MelStatsFeatures(fb.mel_spec));
    labels.push_back(rec.accent_label == AccentLabel::kNonnative ? 1 : 0);
  }
  AccentClassifier clf(static_cast<int>(feats[0].size()), 16, 55);
  clf.Train(feats, labels, 300, 1e-2);
  int correct = 0;
  for (size_t i = 0; i < feats.size(); ++i)
    if (clf.IsNonnative(feats[i]) == (labels[i] == 1)) ++correct;
  CHECK(correct >= static_cast<int>(feats.size()) - 1);  // near-perfect on train
}

namespace {

struct SuiteFixture {
  TempDir tmp;
  ToyCorpus corpus;
  StftConfig stft;
  AccentClassifier clf;

  SuiteFixture(const std::string& name)
      : tmp(name), corpus(MakeToyCorpus(tmp.Sub("c"), 3, 3, 88)), clf(2 * stft.n_mels, 8, 66) {
    std::vector<Vec> feats;
    std::vector<int> labels;
    for (const auto& rec : corpus.records) {
      Waveform wav = LoadAudio(rec.audio_path);
      FeatureBundle fb = ComputeFeatures(wav.samples, wav.sample_rate, stft);
      feats.push_back(MelStatsFeatures(fb.mel_spec));
      labels.push_back(rec.accent_label == AccentLabel::kNonnative ? 1 : 0);
    }
    clf.Train(feats, labels, 120, 1e-2);
  }

  SystemOutputs SelfSystem(const std::string& name) const {
    SystemOutputs sys;
    sys.name = name;
    for (const auto& rec : corpus.records) sys.utterances.push_back({rec.id, rec.audio_path});
    return sys;
  }

  std::map<std::string, std::string> Transcripts() const {
    std::map<std::string, std::string> t;
    for (const auto& rec : corpus.records) t[rec.id] = rec.transcript;
    return t;
  }
};

}  // namespace

TEST_CASE("evaluate_suite: references through identity asr give zero wer and secs one") {
  SuiteFixture fx("suite_identity");
  IdentityAsr asr(fx.Transcripts());
  MelStatsEmbedder embedder(fx.stft);
  EvalReport report = EvaluateSuite({fx.SelfSystem("original")}, fx.corpus.records, asr, embedder,
                                    fx.clf, fx.stft);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].wer == 0.0);
  CHECK(report.rows[0].secs == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(report.rows[0].evaluated == static_cast<int>(fx.corpus.records.size()));
  CHECK_FALSE(report.rows[0].partial);
  CHECK(!report.footnotes.empty());
}

TEST_CASE("evaluate_suite: two systems, three utterances -> 2 rows, 6 details") {
  SuiteFixture fx("suite_cardinality");
  std::vector<UtteranceRecord> refs;
  for (const auto& r : fx.corpus.records)
    if (refs.size() < 3) refs.push_back(r);
  SystemOutputs a, b;
  a.name = "sys_a";
  b.name = "sys_b";
  for (const auto& r : refs) {
    a.utterances.push_back({r.id, r.audio_path});
    b.utterances.push_back({r.id, r.audio_path});
  }
  IdentityAsr asr(fx.Transcripts());
  MelStatsEmbedder embedder(fx.stft);
  EvalReport report = EvaluateSuite({a, b}, refs, asr, embedder, fx.clf, fx.stft);
  CHECK(report.rows.size() == 2);
  CHECK(report.details.size() == 6);
}

TEST_CASE("evaluate_suite: permutation invariant over utterance order") {
  SuiteFixture fx("suite_perm");
  IdentityAsr asr(fx.Transcripts());
  MelStatsEmbedder embedder(fx.stft);
  SystemOutputs fwd = fx.SelfSystem("sys");
  SystemOutputs rev = fwd;
  std::reverse(rev.utterances.begin(), rev.utterances.end());
  EvalReport r1 = EvaluateSuite({fwd}, fx.corpus.records, asr, embedder, fx.clf, fx.stft);
  EvalReport r2 = EvaluateSuite({rev}, fx.corpus.records, asr, embedder, fx.clf, fx.stft);
  CHECK(r1.rows[0].wer == r2.rows[0].wer);
  CHECK(r1.rows[0].acc == r2.rows[0].acc);
  CHECK(r1.rows[0].secs == r2.rows[0].secs);
  // details merge deterministically in id order
  REQUIRE(r1.details.size() == r2.details.size());
  for (size_t i = 0; i < r1.details.size(); ++i) CHECK(r1.details[i].id == r2.details[i].id);
}

TEST_CASE("evaluate_suite: unknown id is an error; asr failure marks the row partial") {
  SuiteFixture fx("suite_errors");
  IdentityAsr asr(fx.Transcripts());
  MelStatsEmbedder embedder(fx.stft);

  SystemOutputs bad = fx.SelfSystem("bad");
  bad.utterances[0].id = "nonexistent";
  CHECK_THROWS_AS(
      EvaluateSuite({bad}, fx.corpus.records, asr, embedder, fx.clf, fx.stft), Error);

  // an ASR that fails on one id
  class FlakyAsr : public AsrClient {
   public:
    explicit FlakyAsr(std::map<std::string, std::string> t) : inner_(std::move(t)) {}
    std::vector<std::string> Transcribe(const std::string& id, const std::string& p) override {
      if (id.ends_with("000")) ThrowIo("asr backend unavailable");
      return inner_.Transcribe(id, p);
    }

   private:
    IdentityAsr inner_;
  };
  FlakyAsr flaky(fx.Transcripts());
  EvalReport report =
      EvaluateSuite({fx.SelfSystem("sys")}, fx.corpus.records, flaky, embedder, fx.clf, fx.stft);
  CHECK(report.rows[0].partial);
  CHECK(report.rows[0].failed == 2);  // nat000 and non000
  int errored = 0;
  for (const auto& d : report.details)
    if (!d.error.empty()) ++errored;
  CHECK(errored == 2);
}

TEST_CASE("external command asr adapter reads one transcript line") {
  ExternalCommandAsr asr("echo hello world #");
  auto words = asr.Transcribe("any", "/tmp/nonexistent.wav");
  REQUIRE(words.size() == 2);
  CHECK(words[0] == "hello");
  ExternalCommandAsr failing("exit 3 #");
  CHECK_THROWS_AS(failing.Transcribe("any", "/tmp/x.wav"), Error);
}

TEST_CASE("eval report formatting: wer printed to one decimal") {
  EvalReport report;
  EvalRow row;
  row.name = "proposed";
  row.wer = 12.3456;
  row.acc = 17.21;
  row.secs = 0.834;
  row.evaluated = 3;
  report.rows.push_back(row);
  std::string table = report.ToTable();
  CHECK(table.find("12.3") != std::string::npos);
  CHECK(table.find("17.2") != std::string::npos);
  CHECK(table.find("0.83") != std::string::npos);
}
