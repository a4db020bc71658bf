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

namespace accentforge {

// Word error rate in percent: 100 * min-edit-cost / |reference|, unit costs
// for substitution, deletion and insertion. Not symmetric.
inline double WordErrorRate(const std::vector<std::string>& reference,
                            const std::vector<std::string>& hypothesis) {
  if (reference.empty()) ThrowData("word_error_rate: empty reference");
  size_t n = reference.size(), m = hypothesis.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return 100.0 * prev[m] / static_cast<double>(n);
}

inline double WordErrorRate(const std::string& reference, const std::string& hypothesis) {
  return WordErrorRate(SplitWords(reference), SplitWords(hypothesis));
}

constexpr double kSameSpeakerThreshold = 0.85;

// Speaker-embedding cosine similarity; > 0.85 reads as same speaker.
inline double Secs(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) ThrowData("secs: dimension mismatch");
  double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) ThrowData("secs: zero-norm embedding");
  return a.dot(b) / (na * nb);
}

inline bool SecsSameSpeaker(double secs) { return secs > kSameSpeakerThreshold; }

}  // namespace accentforge
