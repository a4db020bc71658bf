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

#include <cmath>
#include <memory>
#include <vector>

#include "accentforge/common.hpp"
#include "accentforge/stft.hpp"

namespace accentforge {

struct PitchConfig {
  double f0_min = 60.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.3;
  int window = 1024;
};

// Frame-level F0 extraction on the shared hop grid. 0 marks unvoiced frames.
// Swappable so that heavier trackers can be dropped in behind the same
// contract.
class F0Extractor {
 public:
  virtual ~F0Extractor() = default;
  virtual std::vector<double> Extract(const std::vector<double>& samples, int sample_rate,
                                      int hop) const = 0;
};

// Normalized-autocorrelation pitch tracker with parabolic peak refinement.
class AutocorrPitchTracker : public F0Extractor {
 public:
  explicit AutocorrPitchTracker(PitchConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.f0_min >= cfg_.f0_max) ThrowData("pitch: f0_min must be below f0_max");
  }

  std::vector<double> Extract(const std::vector<double>& samples, int sample_rate,
                              int hop) const override {
    int frames = FrameCount(samples.size(), hop);
    std::vector<double> f0(frames, 0.0);
    int win = cfg_.window;
    int lag_min = std::max(2, static_cast<int>(std::floor(sample_rate / cfg_.f0_max)));
    int lag_max = static_cast<int>(std::ceil(sample_rate / cfg_.f0_min));

    std::vector<double> frame(win);
    for (int t = 0; t < frames; ++t) {
      size_t start = static_cast<size_t>(t) * hop;
      int avail = static_cast<int>(std::min<size_t>(win, samples.size() - start));
      double mean = 0.0;
      for (int i = 0; i < avail; ++i) mean += samples[start + i];
      mean /= std::max(1, avail);
      for (int i = 0; i < win; ++i)
        frame[i] = i < avail ? samples[start + i] - mean : 0.0;

      double energy = 0.0;
      for (int i = 0; i < win; ++i) energy += frame[i] * frame[i];
      if (energy < 1e-10) continue;  // silence

      int best_lag = 0;
      double best_nacf = 0.0;
      std::vector<double> nacf(lag_max + 2, 0.0);
      for (int lag = lag_min; lag <= lag_max && lag < win; ++lag) {
        double num = 0.0, e0 = 0.0, e1 = 0.0;
        for (int i = 0; i + lag < win; ++i) {
          num += frame[i] * frame[i + lag];
          e0 += frame[i] * frame[i];
          e1 += frame[i + lag] * frame[i + lag];
        }
        double denom = std::sqrt(e0 * e1);
        double v = denom > 1e-12 ? num / denom : 0.0;
        nacf[lag] = v;
        if (v > best_nacf) {
          best_nacf = v;
          best_lag = lag;
        }
      }
      if (best_lag == 0 || best_nacf < cfg_.voicing_threshold) continue;

      // Sub-harmonic guard: the autocorrelation peaks at every multiple of
      // the true period, so take the earliest local peak comparable to the
      // global best.
      for (int lag = lag_min; lag < best_lag; ++lag) {
        if (nacf[lag] >= 0.9 * best_nacf && nacf[lag] >= nacf[lag - 1] &&
            nacf[lag] >= nacf[lag + 1]) {
          best_lag = lag;
          break;
        }
      }

      double lag = best_lag;
      if (best_lag > lag_min && best_lag < lag_max) {
        double a = nacf[best_lag - 1], b = nacf[best_lag], c = nacf[best_lag + 1];
        double denom = a - 2.0 * b + c;
        if (std::abs(denom) > 1e-12) {
          double shift = 0.5 * (a - c) / denom;
          if (std::abs(shift) <= 1.0) lag += shift;
        }
      }
      double hz = sample_rate / lag;
      if (hz >= cfg_.f0_min && hz <= cfg_.f0_max) f0[t] = hz;
    }
    return f0;
  }

  const PitchConfig& config() const { return cfg_; }

 private:
  PitchConfig cfg_;
};

}  // namespace accentforge
