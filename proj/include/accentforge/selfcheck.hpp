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

#include <functional>
#include <string>
#include <vector>

#include "accentforge/common.hpp"
#include "accentforge/mas.hpp"

namespace accentforge {

// Independent cross-checks for the core algorithms. Each oracle here takes
// a deliberately different route from the production implementation:
// exhaustive enumeration instead of dynamic programming, quadrature instead
// of closed forms.

// Enumerates every monotonic surjective alignment (compositions of T frames
// into N positive durations) and returns the best total log-likelihood.
inline double EnumerateBestAlignmentScore(const Mat& loglik,
                                          std::vector<int>* best_durations = nullptr) {
  int n = static_cast<int>(loglik.rows());
  int t = static_cast<int>(loglik.cols());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> durations(static_cast<size_t>(n));
  std::vector<int> best_out;
  std::function<void(int, int, double, int)> recurse = [&](int token, int frames_left,
                                                           double score, int frame_pos) {
    if (token == n - 1) {
      double s = score;
      for (int f = 0; f < frames_left; ++f) s += loglik(token, frame_pos + f);
      durations[static_cast<size_t>(token)] = frames_left;
      if (s > best) {
        best = s;
        best_out = durations;
      }
      return;
    }
    int max_d = frames_left - (n - 1 - token);
    double running = score;
    for (int d = 1; d <= max_d; ++d) {
      running += loglik(token, frame_pos + d - 1);
      durations[static_cast<size_t>(token)] = d;
      recurse(token + 1, frames_left - d, running, frame_pos + d);
    }
  };
  recurse(0, t, 0.0, 0);
  if (best_durations) *best_durations = best_out;
  return best;
}

inline double AlignmentScore(const Mat& loglik, const AlignmentMatrix& a) {
  double s = 0.0;
  auto f2t = a.FrameToToken();
  for (int t = 0; t < a.num_frames; ++t) s += loglik(f2t[static_cast<size_t>(t)], t);
  return s;
}

// KL(N(mu_q, sigma_q) || N(mu_p, sigma_p)) by Simpson quadrature over a
// wide support interval.
inline double KlScalarByQuadrature(double mu_q, double sigma_q, double mu_p, double sigma_p,
                                   int panels = 4000) {
  double lo = std::min(mu_q - 12.0 * sigma_q, mu_p - 12.0 * sigma_p);
  double hi = std::max(mu_q + 12.0 * sigma_q, mu_p + 12.0 * sigma_p);
  auto log_pdf = [](double x, double mu, double sigma) {
    double z = (x - mu) / sigma;
    return -0.5 * std::log(2.0 * M_PI) - std::log(sigma) - 0.5 * z * z;
  };
  auto integrand = [&](double x) {
    double lq = log_pdf(x, mu_q, sigma_q);
    return std::exp(lq) * (lq - log_pdf(x, mu_p, sigma_p));
  };
  double h = (hi - lo) / (2.0 * panels);
  double acc = integrand(lo) + integrand(hi);
  for (int i = 1; i < 2 * panels; ++i) acc += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Minimum edit cost by exhaustive recursion; exponential, for short
// sequences only.
inline int EditCostBruteForce(const std::vector<std::string>& ref,
                              const std::vector<std::string>& hyp, size_t i = 0, size_t j = 0) {
  if (i == ref.size()) return static_cast<int>(hyp.size() - j);
  if (j == hyp.size()) return static_cast<int>(ref.size() - i);
  int sub = EditCostBruteForce(ref, hyp, i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
  int del = EditCostBruteForce(ref, hyp, i + 1, j) + 1;
  int ins = EditCostBruteForce(ref, hyp, i, j + 1) + 1;
  return std::min({sub, del, ins});
}

}  // namespace accentforge
