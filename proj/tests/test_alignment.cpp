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

#include "accentforge/mas.hpp"
#include "accentforge/selfcheck.hpp"
#include "test_helpers.hpp"

using namespace accentforge;
using aftest::RandomGaussian;

TEST_CASE("build_loglik: standard normal at its mean") {
  int d = 6;
  DiagonalGaussian text{Mat::Zero(d, 1), Mat::Zero(d, 1)};
  Mat latent = Mat::Zero(d, 1);
  Mat ll = BuildLogLikelihood(latent, text);
  REQUIRE(ll.rows() == 1);
  REQUIRE(ll.cols() == 1);
  CHECK(ll(0, 0) == Catch::Approx(-0.5 * d * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("build_loglik: scalar unit Gaussian one sigma out") {
  DiagonalGaussian text{Mat::Zero(1, 1), Mat::Zero(1, 1)};
  Mat latent = Mat::Constant(1, 1, 1.0);
  Mat ll = BuildLogLikelihood(latent, text);
  CHECK(ll(0, 0) == Catch::Approx(-0.5 * std::log(2.0 * M_PI) - 0.5).epsilon(1e-12));
  CHECK(ll(0, 0) == Catch::Approx(-1.4189385332).epsilon(1e-9));
}

TEST_CASE("build_loglik: 5 tokens x 12 frames shape") {
  Rng rng(3);
  DiagonalGaussian text = RandomGaussian(rng, 8, 5);
  Mat latent = rng.NormalMat(8, 12);
  Mat ll = BuildLogLikelihood(latent, text);
  CHECK(ll.rows() == 5);
  CHECK(ll.cols() == 12);
  CHECK(ll.allFinite());
}

TEST_CASE("build_loglik: dimension mismatch rejected") {
  Rng rng(4);
  DiagonalGaussian text = RandomGaussian(rng, 8, 5);
  CHECK_THROWS_AS(BuildLogLikelihood(rng.NormalMat(7, 12), text), Error);
}

TEST_CASE("mas_search: single token takes every frame") {
  Mat ll = Mat::Zero(1, 5);
  AlignmentMatrix a = MasSearch(ll);
  REQUIRE(a.durations.size() == 1);
  CHECK(a.durations[0] == 5);
}

TEST_CASE("mas_search: forced diagonal") {
  Mat ll = Mat::Constant(4, 4, kMasNegInf);
  for (int i = 0; i < 4; ++i) ll(i, i) = 10.0;
  AlignmentMatrix a = MasSearch(ll);
  CHECK(a.durations == std::vector<int>{1, 1, 1, 1});
}

TEST_CASE("mas_search: rejects N > T and N == 0") {
  CHECK_THROWS_AS(MasSearch(Mat::Zero(5, 3)), Error);
  CHECK_THROWS_AS(MasSearch(Mat::Zero(0, 3)), Error);
}

TEST_CASE("mas_search: matches exhaustive enumeration on random instances") {
  Rng rng(42);
  for (int c = 0; c < 200; ++c) {
    int n = static_cast<int>(rng.UniformInt(1, 6));
    int t = static_cast<int>(rng.UniformInt(n, 10));
    Mat ll = rng.NormalMat(n, t) * 2.0;
    AlignmentMatrix a = MasSearch(ll);
    a.Validate();
    std::vector<int> best_durations;
    double best = EnumerateBestAlignmentScore(ll, &best_durations);
    double got = AlignmentScore(ll, a);
    REQUIRE(got == Catch::Approx(best).margin(1e-9));
  }
}

TEST_CASE("mas_search: sample 4x7 case agrees with the brute-force oracle") {
  Rng rng(7);
  Mat ll = rng.NormalMat(4, 7);
  AlignmentMatrix a = MasSearch(ll);
  double best = EnumerateBestAlignmentScore(ll);
  CHECK(AlignmentScore(ll, a) == Catch::Approx(best).margin(1e-9));
}

TEST_CASE("mas_search: invariant to adding a constant to the log-likelihoods") {
  Rng rng(11);
  for (int c = 0; c < 20; ++c) {
    int n = static_cast<int>(rng.UniformInt(1, 5));
    int t = static_cast<int>(rng.UniformInt(n, 9));
    Mat ll = rng.NormalMat(n, t);
    AlignmentMatrix a1 = MasSearch(ll);
    AlignmentMatrix a2 = MasSearch(Mat(ll.array() + 37.5));
    CHECK(a1.durations == a2.durations);
  }
}

TEST_CASE("mas_search: outputs satisfy the alignment invariants") {
  Rng rng(13);
  for (int c = 0; c < 100; ++c) {
    int n = static_cast<int>(rng.UniformInt(1, 6));
    int t = static_cast<int>(rng.UniformInt(n, 10));
    AlignmentMatrix a = MasSearch(rng.NormalMat(n, t));
    a.Validate();  // monotone, surjective, durations sum to T
    Mat grid = a.ToGrid();
    for (int col = 0; col < t; ++col) CHECK(grid.col(col).sum() == 1.0);
    // monotone non-decreasing token index across frames
    auto f2t = a.FrameToToken();
    for (size_t f = 1; f < f2t.size(); ++f) CHECK(f2t[f] >= f2t[f - 1]);
  }
}

TEST_CASE("upsample_text: durations repeat token rows") {
  Rng rng(17);
  DiagonalGaussian text = RandomGaussian(rng, 4, 2);
  AlignmentMatrix a;
  a.num_tokens = 2;
  a.num_frames = 5;
  a.durations = {2, 3};
  DiagonalGaussian up = UpsampleText(text, a);
  REQUIRE(up.length() == 5);
  CHECK(up.mean.col(0) == text.mean.col(0));
  CHECK(up.mean.col(1) == text.mean.col(0));
  CHECK(up.mean.col(2) == text.mean.col(1));
  CHECK(up.mean.col(4) == text.mean.col(1));
  CHECK(up.log_scale.col(3) == text.log_scale.col(1));
}

TEST_CASE("upsample_text: single token gives a constant sequence") {
  Rng rng(19);
  DiagonalGaussian text = RandomGaussian(rng, 3, 1);
  AlignmentMatrix a;
  a.num_tokens = 1;
  a.num_frames = 7;
  a.durations = {7};
  DiagonalGaussian up = UpsampleText(text, a);
  for (int t = 0; t < 7; ++t) CHECK(up.mean.col(t) == text.mean.col(0));
}

TEST_CASE("upsample_text: group-averaging recovers token means exactly") {
  Rng rng(23);
  DiagonalGaussian text = RandomGaussian(rng, 6, 4);
  Mat ll = rng.NormalMat(4, 9);
  AlignmentMatrix a = MasSearch(ll);
  DiagonalGaussian up = UpsampleText(text, a);
  auto f2t = a.FrameToToken();
  for (int i = 0; i < a.num_tokens; ++i) {
    Vec acc = Vec::Zero(6);
    int count = 0;
    for (int t = 0; t < a.num_frames; ++t)
      if (f2t[static_cast<size_t>(t)] == i) {
        acc += up.mean.col(t);
        ++count;
      }
    CHECK((acc / count - text.mean.col(i)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("upsample_text: invalid alignment rejected") {
  Rng rng(29);
  DiagonalGaussian text = RandomGaussian(rng, 3, 2);
  AlignmentMatrix bad;
  bad.num_tokens = 2;
  bad.num_frames = 5;
  bad.durations = {5, 0};  // zero-duration token
  CHECK_THROWS(UpsampleText(text, bad));
}

TEST_CASE("graph-level upsample agrees with the value-level operation") {
  Rng rng(31);
  DiagonalGaussian text = RandomGaussian(rng, 5, 3);
  AlignmentMatrix a = MasSearch(rng.NormalMat(3, 8));
  DiagonalGaussian up = UpsampleText(text, a);
  GaussianNode tg = ConstantGaussian(text);
  GaussianNode upn = UpsampleTextNode(tg, a);
  CHECK(upn.mean->value == up.mean);
  CHECK(upn.log_scale->value == up.log_scale);
}

TEST_CASE("alignment text-grid dump round trips") {
  Rng rng(37);
  AlignmentMatrix a = MasSearch(rng.NormalMat(4, 9));
  std::string grid = a.ToTextGrid();
  AlignmentMatrix back = AlignmentMatrix::FromTextGrid(grid);
  CHECK(back.durations == a.durations);
  CHECK(back.num_frames == a.num_frames);
  CHECK(back.ToTextGrid() == grid);
}
