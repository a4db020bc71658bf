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

#include <vector>

#include "accentforge/common.hpp"
#include "accentforge/pitch.hpp"
#include "accentforge/stft.hpp"

namespace accentforge {

// All feature matrices are stored bins-by-frames (one column per frame) and
// share the hop grid: columns(linear) == columns(mel) == f0.size() ==
// floor(samples / hop).
struct FeatureBundle {
  Mat linear_spec;  // linear_bins x frames, nonnegative magnitudes
  Mat mel_spec;     // n_mels x frames, log compressed
  Vec f0;           // frames, Hz; 0 = unvoiced
  int frame_count = 0;
  int hop = 320;

  void Validate() const {
    if (linear_spec.cols() != frame_count || mel_spec.cols() != frame_count ||
        f0.size() != frame_count)
      ThrowInternal("FeatureBundle: frame counts disagree");
    if ((linear_spec.array() < 0.0).any())
      ThrowInternal("FeatureBundle: negative linear magnitudes");
  }
};

inline FeatureBundle ComputeFeatures(const std::vector<double>& samples, int sample_rate,
                                     const StftConfig& stft_cfg, const F0Extractor& f0_extractor) {
  if (samples.size() < static_cast<size_t>(stft_cfg.hop))
    ThrowData("compute_features: waveform shorter than one hop (" +
              std::to_string(samples.size()) + " < " + std::to_string(stft_cfg.hop) + " samples)");
  for (double s : samples)
    if (!std::isfinite(s)) ThrowData("compute_features: non-finite sample in input");

  FeatureBundle fb;
  fb.hop = stft_cfg.hop;
  fb.frame_count = FrameCount(samples.size(), stft_cfg.hop);
  fb.linear_spec = LinearSpectrogram(samples, stft_cfg);
  Mat mel_fb = MelFilterbank(stft_cfg);
  fb.mel_spec = MelFromLinear(fb.linear_spec, mel_fb, stft_cfg.log_floor);
  std::vector<double> f0 = f0_extractor.Extract(samples, sample_rate, stft_cfg.hop);
  fb.f0 = Eigen::Map<const Vec>(f0.data(), static_cast<Eigen::Index>(f0.size()));
  fb.Validate();
  return fb;
}

inline FeatureBundle ComputeFeatures(const std::vector<double>& samples, int sample_rate,
                                     const StftConfig& stft_cfg) {
  AutocorrPitchTracker tracker;
  return ComputeFeatures(samples, sample_rate, stft_cfg, tracker);
}

}  // namespace accentforge
