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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "accentforge/common.hpp"

namespace accentforge {

constexpr int kCanonicalSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;  // mono, [-1, 1]
  int sample_rate = kCanonicalSampleRate;
};

namespace detail {

inline uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void PutU32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void PutU16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a RIFF/WAVE file. Accepts PCM16; multi-channel input is averaged
// down to mono.
inline Waveform ReadWav(const std::string& path) {
  std::string bytes = ReadTextFile(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  size_t n = bytes.size();
  if (n < 44 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    ThrowIo("not a RIFF/WAVE file: " + path);

  int sample_rate = 0;
  int channels = 0;
  int bits = 0;
  size_t data_off = 0;
  size_t data_len = 0;

  size_t off = 12;
  while (off + 8 <= n) {
    const unsigned char* chunk = p + off;
    uint32_t chunk_len = detail::ReadU32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0 && off + 8 + 16 <= n) {
      uint16_t fmt = detail::ReadU16(chunk + 8);
      channels = detail::ReadU16(chunk + 10);
      sample_rate = static_cast<int>(detail::ReadU32(chunk + 12));
      bits = detail::ReadU16(chunk + 22);
      if (fmt != 1) ThrowIo("unsupported WAV encoding (want PCM): " + path);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_off = off + 8;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (sample_rate <= 0 || channels <= 0) ThrowIo("missing fmt chunk: " + path);
  if (bits != 16) ThrowIo("unsupported bit depth (want 16): " + path);
  if (data_off == 0) ThrowIo("missing data chunk: " + path);
  if (data_off + data_len > n) data_len = n - data_off;

  size_t frames = data_len / (2 * static_cast<size_t>(channels));
  Waveform wav;
  wav.sample_rate = sample_rate;
  wav.samples.resize(frames);
  const unsigned char* d = p + data_off;
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      int16_t v = static_cast<int16_t>(detail::ReadU16(d + (i * channels + c) * 2));
      acc += static_cast<double>(v) / 32768.0;
    }
    wav.samples[i] = acc / channels;
  }
  return wav;
}

inline void WriteWav(const std::string& path, const std::vector<double>& samples,
                     int sample_rate = kCanonicalSampleRate) {
  std::string out;
  out.reserve(44 + samples.size() * 2);
  uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  out += "RIFF";
  detail::PutU32(out, 36 + data_len);
  out += "WAVEfmt ";
  detail::PutU32(out, 16);
  detail::PutU16(out, 1);                                   // PCM
  detail::PutU16(out, 1);                                   // mono
  detail::PutU32(out, static_cast<uint32_t>(sample_rate));  // sample rate
  detail::PutU32(out, static_cast<uint32_t>(sample_rate * 2));
  detail::PutU16(out, 2);
  detail::PutU16(out, 16);
  out += "data";
  detail::PutU32(out, data_len);
  for (double s : samples) {
    double clipped = std::min(1.0, std::max(-1.0, s));
    auto v = static_cast<int16_t>(std::lrint(clipped * 32767.0));
    detail::PutU16(out, static_cast<uint16_t>(v));
  }
  WriteTextFile(path, out);
}

// Linear-interpolation resampler; adequate for the toy corpus rates.
inline std::vector<double> Resample(const std::vector<double>& x, int from_rate, int to_rate) {
  if (from_rate == to_rate || x.empty()) return x;
  double ratio = static_cast<double>(from_rate) / to_rate;
  size_t out_len = static_cast<size_t>(std::floor(static_cast<double>(x.size()) / ratio));
  std::vector<double> out(out_len);
  for (size_t i = 0; i < out_len; ++i) {
    double src = i * ratio;
    auto i0 = static_cast<size_t>(src);
    size_t i1 = std::min(i0 + 1, x.size() - 1);
    double frac = src - static_cast<double>(i0);
    out[i] = x[i0] * (1.0 - frac) + x[i1] * frac;
  }
  return out;
}

// Canonical-form loader: mono PCM16 resampled to 16 kHz.
inline Waveform LoadAudio(const std::string& path) {
  Waveform wav = ReadWav(path);
  if (wav.sample_rate != kCanonicalSampleRate) {
    wav.samples = Resample(wav.samples, wav.sample_rate, kCanonicalSampleRate);
    wav.sample_rate = kCanonicalSampleRate;
  }
  return wav;
}

}  // namespace accentforge
