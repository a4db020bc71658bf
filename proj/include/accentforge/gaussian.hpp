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

#include "accentforge/common.hpp"
#include "accentforge/graph.hpp"
#include "accentforge/rng.hpp"

namespace accentforge {

// Predicted log-scales are clamped into this range everywhere a Gaussian is
// produced, keeping KL terms well conditioned on toy data.
constexpr double kLogScaleMin = -9.0;
constexpr double kLogScaleMax = 2.0;

// Per-position diagonal Gaussian, D x T (one column per frame or token).
// The universal currency of priors and posteriors.
struct DiagonalGaussian {
  Mat mean;
  Mat log_scale;

  Eigen::Index dims() const { return mean.rows(); }
  Eigen::Index length() const { return mean.cols(); }

  void Validate() const {
    if (mean.rows() != log_scale.rows() || mean.cols() != log_scale.cols())
      ThrowInternal("DiagonalGaussian: mean/log_scale shape mismatch");
    if (!AllFinite(mean) || !AllFinite(log_scale))
      ThrowInternal("DiagonalGaussian: non-finite entries");
  }

  // Reparameterized sample: mean + exp(log_scale) * eps * noise_scale.
  Mat Sample(Rng& rng, double noise_scale) const {
    if (noise_scale == 0.0) return mean;
    Mat eps = rng.NormalMat(mean.rows(), mean.cols());
    return mean + (log_scale.array().exp() * eps.array() * noise_scale).matrix();
  }
};

// Graph-level counterpart used inside training paths.
struct GaussianNode {
  nn::NodePtr mean;
  nn::NodePtr log_scale;

  DiagonalGaussian Values() const { return {mean->value, log_scale->value}; }

  GaussianNode Detached() const { return {nn::Detach(mean), nn::Detach(log_scale)}; }

  // mean + exp(log_scale) .* eps * noise_scale, differentiable in both
  // mean and log_scale.
  nn::NodePtr SampleNode(Rng& rng, double noise_scale) const {
    if (noise_scale == 0.0) return mean;
    Mat eps = rng.NormalMat(mean->value.rows(), mean->value.cols()) * noise_scale;
    return nn::Add(mean, nn::Mul(nn::Exp(log_scale), nn::Constant(eps)));
  }
};

inline GaussianNode ConstantGaussian(const DiagonalGaussian& g) {
  return {nn::Constant(g.mean), nn::Constant(g.log_scale)};
}

// Splits a (2D x T) projection into a clamped Gaussian over D dims.
inline GaussianNode SplitProjection(const nn::NodePtr& proj) {
  int d = static_cast<int>(proj->value.rows()) / 2;
  GaussianNode g;
  g.mean = nn::SliceRows(proj, 0, d);
  g.log_scale = nn::Clamp(nn::SliceRows(proj, d, d), kLogScaleMin, kLogScaleMax);
  return g;
}

// Closed-form KL(q || p) between elementwise diagonal Gaussians, one value
// per (dim, position) entry. Uses the log-scale difference so KL(q, q) is
// exactly zero in floating point.
inline Mat KlElementwise(const DiagonalGaussian& q, const DiagonalGaussian& p) {
  if (q.mean.rows() != p.mean.rows() || q.mean.cols() != p.mean.cols())
    ThrowData("kl: shape mismatch between q and p");
  Eigen::ArrayXXd delta_ls = q.log_scale.array() - p.log_scale.array();
  Eigen::ArrayXXd var_ratio = (2.0 * delta_ls).exp();
  Eigen::ArrayXXd quad =
      (q.mean.array() - p.mean.array()).square() * (-2.0 * p.log_scale.array()).exp();
  return (-delta_ls + 0.5 * (var_ratio + quad) - 0.5).matrix();
}

}  // namespace accentforge
