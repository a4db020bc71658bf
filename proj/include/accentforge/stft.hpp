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
#include <vector>

#include "accentforge/common.hpp"

namespace accentforge {

// Frame grid convention: frame t covers samples [t*hop, t*hop + win), zero
// padded past the end of the signal, so frame_count == floor(samples / hop)
// exactly. The hop doubles as the waveform generator's upsample factor,
// keeping frame and sample counts mutually exact.
struct StftConfig {
  int win_length = 1024;
  int hop = 320;
  int n_mels = 80;
  int sample_rate = 16000;
  double mel_fmin = 0.0;
  double mel_fmax = 8000.0;
  double log_floor = 1e-5;

  int linear_bins() const { return win_length / 2 + 1; }
};

inline Vec HannWindow(int n) {
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  return w;
}

// Real DFT as two dense bases; spectrogram extraction then reduces to GEMM.
struct DftBasis {
  Mat cos_basis;  // bins x win
  Mat sin_basis;  // bins x win

  explicit DftBasis(int win) {
    int bins = win / 2 + 1;
    cos_basis.resize(bins, win);
    sin_basis.resize(bins, win);
    for (int k = 0; k < bins; ++k) {
      for (int n = 0; n < win; ++n) {
        double arg = 2.0 * M_PI * k * n / win;
        cos_basis(k, n) = std::cos(arg);
        sin_basis(k, n) = -std::sin(arg);
      }
    }
  }
};

inline int FrameCount(size_t num_samples, int hop) {
  return static_cast<int>(num_samples / static_cast<size_t>(hop));
}

// Windowed frame matrix: win x frames, zero padded past signal end.
inline Mat FrameSignal(const std::vector<double>& x, int win, int hop, const Vec& window) {
  int frames = FrameCount(x.size(), hop);
  Mat out = Mat::Zero(win, frames);
  for (int t = 0; t < frames; ++t) {
    size_t start = static_cast<size_t>(t) * hop;
    int avail = static_cast<int>(std::min<size_t>(win, x.size() - start));
    for (int i = 0; i < avail; ++i) out(i, t) = x[start + i] * window[i];
  }
  return out;
}

// Magnitude spectrogram, bins x frames.
inline Mat LinearSpectrogram(const std::vector<double>& x, const StftConfig& cfg) {
  static thread_local int cached_win = -1;
  static thread_local DftBasis* basis = nullptr;
  if (cached_win != cfg.win_length) {
    delete basis;
    basis = new DftBasis(cfg.win_length);
    cached_win = cfg.win_length;
  }
  Vec window = HannWindow(cfg.win_length);
  Mat frames = FrameSignal(x, cfg.win_length, cfg.hop, window);
  Mat re = basis->cos_basis * frames;
  Mat im = basis->sin_basis * frames;
  return (re.array().square() + im.array().square()).sqrt().matrix();
}

inline double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular mel filterbank, n_mels x bins.
inline Mat MelFilterbank(const StftConfig& cfg) {
  int bins = cfg.linear_bins();
  Mat fb = Mat::Zero(cfg.n_mels, bins);
  double mel_lo = HzToMel(cfg.mel_fmin);
  double mel_hi = HzToMel(cfg.mel_fmax);
  std::vector<double> centers(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    centers[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  for (int m = 0; m < cfg.n_mels; ++m) {
    double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (int k = 0; k < bins; ++k) {
      double hz = static_cast<double>(k) * cfg.sample_rate / cfg.win_length;
      if (hz <= lo || hz >= hi) continue;
      fb(m, k) = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
    }
  }
  return fb;
}

// Log-compressed mel projection of a magnitude spectrogram.
inline Mat MelFromLinear(const Mat& linear_mag, const Mat& mel_fb, double log_floor) {
  Mat mel = mel_fb * linear_mag;
  return mel.array().max(log_floor).log().matrix();
}

}  // namespace accentforge
