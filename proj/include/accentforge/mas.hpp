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

#include <string>
#include <vector>

#include "accentforge/common.hpp"
#include "accentforge/gaussian.hpp"

namespace accentforge {

// Effective negative infinity for the DP; keeps arithmetic total without
// NaN traps.
constexpr double kMasNegInf = -1e9;

// Hard monotonic token-to-frame assignment. Every frame belongs to exactly
// one token, assignments never move backwards, and every token receives at
// least one frame.
struct AlignmentMatrix {
  std::vector<int> durations;  // per token, >= 1
  int num_tokens = 0;
  int num_frames = 0;

  void Validate() const {
    if (static_cast<int>(durations.size()) != num_tokens)
      ThrowInternal("AlignmentMatrix: duration count != token count");
    int total = 0;
    for (int d : durations) {
      if (d < 1) ThrowInternal("AlignmentMatrix: token with duration < 1");
      total += d;
    }
    if (total != num_frames) ThrowInternal("AlignmentMatrix: durations do not sum to frame count");
  }

  // frame -> token index, monotone non-decreasing.
  std::vector<int> FrameToToken() const {
    std::vector<int> map;
    map.reserve(static_cast<size_t>(num_frames));
    for (int i = 0; i < num_tokens; ++i)
      for (int d = 0; d < durations[static_cast<size_t>(i)]; ++d) map.push_back(i);
    return map;
  }

  // Dense 0/1 grid, tokens x frames.
  Mat ToGrid() const {
    Mat grid = Mat::Zero(num_tokens, num_frames);
    auto f2t = FrameToToken();
    for (int t = 0; t < num_frames; ++t) grid(f2t[static_cast<size_t>(t)], t) = 1.0;
    return grid;
  }

  // Text-grid debug dump: header "N T", then N lines of T '0'/'1' chars.
  std::string ToTextGrid() const {
    Mat grid = ToGrid();
    std::string out = std::to_string(num_tokens) + " " + std::to_string(num_frames) + "\n";
    for (int i = 0; i < num_tokens; ++i) {
      for (int t = 0; t < num_frames; ++t) out += grid(i, t) > 0.5 ? '1' : '0';
      out += '\n';
    }
    return out;
  }

  static AlignmentMatrix FromTextGrid(const std::string& text) {
    auto lines = Split(text, '\n');
    if (lines.empty()) ThrowData("alignment grid: empty");
    auto header = SplitWords(lines[0]);
    if (header.size() != 2) ThrowData("alignment grid: bad header");
    AlignmentMatrix a;
    a.num_tokens = std::stoi(header[0]);
    a.num_frames = std::stoi(header[1]);
    a.durations.assign(static_cast<size_t>(a.num_tokens), 0);
    int frames_seen = 0;
    for (int i = 0; i < a.num_tokens; ++i) {
      if (static_cast<size_t>(i + 1) >= lines.size())
        ThrowData("alignment grid: missing row " + std::to_string(i));
      const std::string& row = lines[static_cast<size_t>(i + 1)];
      if (static_cast<int>(row.size()) < a.num_frames)
        ThrowData("alignment grid: short row " + std::to_string(i));
      for (int t = 0; t < a.num_frames; ++t)
        if (row[static_cast<size_t>(t)] == '1') {
          ++a.durations[static_cast<size_t>(i)];
          ++frames_seen;
        }
    }
    if (frames_seen != a.num_frames) ThrowData("alignment grid: frame assignments != frame count");
    a.Validate();
    return a;
  }
};

// Log-density table: entry (i, t) is the log-density of frame t's latent
// under token i's diagonal Gaussian.
inline Mat BuildLogLikelihood(const Mat& flowed_latent, const DiagonalGaussian& text_gaussians) {
  text_gaussians.Validate();
  if (flowed_latent.rows() != text_gaussians.dims())
    ThrowData("build_loglik: latent dim " + std::to_string(flowed_latent.rows()) +
              " != text Gaussian dim " + std::to_string(text_gaussians.dims()));
  const int n = static_cast<int>(text_gaussians.length());
  const int t_frames = static_cast<int>(flowed_latent.cols());
  const int d = static_cast<int>(flowed_latent.rows());
  const double log2pi = std::log(2.0 * M_PI);

  Mat loglik(n, t_frames);
  for (int i = 0; i < n; ++i) {
    Eigen::ArrayXd mu = text_gaussians.mean.col(i).array();
    Eigen::ArrayXd ls = text_gaussians.log_scale.col(i).array();
    Eigen::ArrayXd inv_var = (-2.0 * ls).exp();
    double base = -0.5 * d * log2pi - ls.sum();
    for (int t = 0; t < t_frames; ++t) {
      Eigen::ArrayXd diff = flowed_latent.col(t).array() - mu;
      loglik(i, t) = base - 0.5 * (diff.square() * inv_var).sum();
    }
  }
  return loglik;
}

// Monotonic Alignment Search. DP recurrence:
//   Q[i,t] = loglik[i,t] + max(Q[i,t-1], Q[i-1,t-1])
// backtracking from Q[N-1,T-1]; ties prefer Q[i,t-1] (stay on the current
// token), which makes outputs deterministic. No gradients flow through the
// search: it consumes plain value matrices.
inline AlignmentMatrix MasSearch(const Mat& loglik) {
  const int n = static_cast<int>(loglik.rows());
  const int t_frames = static_cast<int>(loglik.cols());
  if (n == 0) ThrowData("mas_search: zero tokens");
  if (n > t_frames)
    ThrowData("mas_search: more tokens (" + std::to_string(n) + ") than frames (" +
              std::to_string(t_frames) + ")");

  Mat q = Mat::Constant(n, t_frames, kMasNegInf);
  q(0, 0) = loglik(0, 0);
  for (int t = 1; t < t_frames; ++t) {
    // Feasibility band: token i needs i frames before it and n-1-i after.
    int i_lo = std::max(0, n - (t_frames - t));
    int i_hi = std::min(n - 1, t);
    for (int i = i_lo; i <= i_hi; ++i) {
      double stay = q(i, t - 1);
      double advance = i > 0 ? q(i - 1, t - 1) : kMasNegInf;
      q(i, t) = loglik(i, t) + std::max(stay, advance);
    }
  }

  AlignmentMatrix a;
  a.num_tokens = n;
  a.num_frames = t_frames;
  a.durations.assign(static_cast<size_t>(n), 0);
  int i = n - 1;
  for (int t = t_frames - 1; t >= 0; --t) {
    ++a.durations[static_cast<size_t>(i)];
    if (t > 0 && i > 0) {
      // Tie prefers staying on the current token.
      if (q(i - 1, t - 1) > q(i, t - 1)) --i;
    }
  }
  a.Validate();
  return a;
}

// Frame-level expansion: frame t inherits mean/log_scale of its token.
inline DiagonalGaussian UpsampleText(const DiagonalGaussian& text_gaussians,
                                     const AlignmentMatrix& alignment) {
  text_gaussians.Validate();
  alignment.Validate();
  if (alignment.num_tokens != static_cast<int>(text_gaussians.length()))
    ThrowData("upsample_text: alignment token count != Gaussian count");
  auto f2t = alignment.FrameToToken();
  DiagonalGaussian out;
  out.mean.resize(text_gaussians.dims(), alignment.num_frames);
  out.log_scale.resize(text_gaussians.dims(), alignment.num_frames);
  for (int t = 0; t < alignment.num_frames; ++t) {
    out.mean.col(t) = text_gaussians.mean.col(f2t[static_cast<size_t>(t)]);
    out.log_scale.col(t) = text_gaussians.log_scale.col(f2t[static_cast<size_t>(t)]);
  }
  return out;
}

// Graph-level counterpart of UpsampleText; gradients scatter back into the
// token-level Gaussians.
inline GaussianNode UpsampleTextNode(const GaussianNode& text, const AlignmentMatrix& alignment) {
  auto f2t = alignment.FrameToToken();
  return {nn::GatherCols(text.mean, f2t), nn::GatherCols(text.log_scale, f2t)};
}

}  // namespace accentforge
