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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "accentforge/common.hpp"

namespace accentforge {

inline uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t MixSeed(uint64_t a, uint64_t b) {
  uint64_t s = a;
  uint64_t x = SplitMix64(s) ^ (b + 0x9e3779b97f4a7c15ull);
  return SplitMix64(x);
}

// Deterministic RNG. All sampling paths are hand-rolled on top of the
// mt19937_64 bit stream so results do not depend on libstdc++'s
// distribution implementations. Training never carries RNG state across
// steps: every consumer derives a fresh stream from (root seed, tags),
// which makes checkpoint resume exact.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Inclusive bounds. Modulo bias is irrelevant at the ranges used here.
  int64_t UniformInt(int64_t lo, int64_t hi) {
    if (hi < lo) ThrowInternal("UniformInt: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(engine_() % span);
  }

  // Box-Muller; the spare value is discarded to keep the stream simple.
  double Normal() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Mat NormalMat(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Normal();
    return m;
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  Rng Derive(uint64_t tag) const {
    return Rng(MixSeed(seed_snapshot(), tag));
  }

 private:
  uint64_t seed_snapshot() const {
    // Hash the engine's next outputs without disturbing it: copy is cheap.
    std::mt19937_64 copy = engine_;
    uint64_t a = copy();
    uint64_t b = copy();
    return MixSeed(a, b);
  }

  std::mt19937_64 engine_;
};

// Stateless per-step stream derivation: hash(root, step, tag) -> Rng.
inline Rng DeriveRng(uint64_t root_seed, uint64_t step, const std::string& tag) {
  uint64_t h = MixSeed(root_seed, step + 0x51ed2701ull);
  h = MixSeed(h, Fnv1a64(tag));
  return Rng(h);
}

inline Rng DeriveRng(uint64_t root_seed, const std::string& tag) {
  return Rng(MixSeed(root_seed, Fnv1a64(tag)));
}

}  // namespace accentforge
