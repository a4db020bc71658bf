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

#include <filesystem>
#include <functional>
#include <string>

#include "accentforge/components.hpp"
#include "accentforge/gaussian.hpp"
#include "accentforge/graph.hpp"
#include "accentforge/rng.hpp"

namespace aftest {

using namespace accentforge;

// Central finite differences against the recorded backward pass. `build`
// must reconstruct the scalar loss graph from the current parameter values.
inline double MaxGradRelError(const nn::NodePtr& param,
                              const std::function<nn::NodePtr()>& build, double eps = 1e-5) {
  nn::NodePtr loss = build();
  nn::Backward(loss);
  Mat analytic = param->grad.size() ? param->grad
                                    : Mat::Zero(param->value.rows(), param->value.cols());
  double max_rel = 0.0;
  for (Eigen::Index r = 0; r < param->value.rows(); ++r) {
    for (Eigen::Index c = 0; c < param->value.cols(); ++c) {
      double orig = param->value(r, c);
      param->value(r, c) = orig + eps;
      double up = nn::ScalarValue(build());
      param->value(r, c) = orig - eps;
      double dn = nn::ScalarValue(build());
      param->value(r, c) = orig;
      double fd = (up - dn) / (2.0 * eps);
      double diff = std::abs(fd - analytic(r, c));
      double denom = std::max({1e-6, std::abs(fd), std::abs(analytic(r, c))});
      max_rel = std::max(max_rel, diff / denom);
    }
  }
  return max_rel;
}

inline Mat ZeroOrGrad(const nn::NodePtr& param) {
  return param->grad.size() ? param->grad : Mat::Zero(param->value.rows(), param->value.cols());
}

inline ModelConfig TinyModelConfig(int vocab = 12, int speakers = 3) {
  ModelConfig mc;
  mc.latent_dim = 16;
  mc.hidden = 16;
  mc.d_bnf = 20;
  mc.d_f0 = 8;
  mc.d_spk = 12;
  mc.gen_channels = 16;
  mc.disc_channels = 4;
  mc.flow_layers = 4;
  mc.vocab_size = vocab;
  mc.num_speakers = speakers;
  return mc;
}

inline DiagonalGaussian RandomGaussian(Rng& rng, int dims, int length) {
  DiagonalGaussian g;
  g.mean = rng.NormalMat(dims, length);
  g.log_scale = rng.NormalMat(dims, length) * 0.5;
  return g;
}

// Scratch directory, wiped on construction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("accentforge_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }

  std::string Sub(const std::string& rel) const { return (path / rel).string(); }
};

}  // namespace aftest
