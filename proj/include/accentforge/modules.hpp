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

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "accentforge/graph.hpp"
#include "accentforge/rng.hpp"

namespace accentforge {
namespace nn {

// Fully-qualified parameter name -> leaf node. Ordered so that every
// serialization and iteration is deterministic.
using ParamMap = std::map<std::string, NodePtr>;

inline NodePtr RegisterParam(ParamMap& params, const std::string& name, Mat init) {
  if (params.count(name)) ThrowInternal("duplicate parameter name: " + name);
  NodePtr p = Param(std::move(init));
  params[name] = p;
  return p;
}

inline Mat KaimingInit(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng) {
  double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
  return rng.NormalMat(rows, cols) * scale;
}

struct Linear {
  NodePtr w;  // out x in
  NodePtr b;  // out x 1

  Linear() = default;
  Linear(ParamMap& params, const std::string& prefix, int in, int out, Rng& rng,
         bool zero_init = false) {
    Mat wi = zero_init ? Mat::Zero(out, in) : KaimingInit(out, in, in, rng);
    w = RegisterParam(params, prefix + ".weight", std::move(wi));
    b = RegisterParam(params, prefix + ".bias", Mat::Zero(out, 1));
  }

  NodePtr operator()(NodePtr x) const { return AddColVec(Matmul(w, x), b); }
};

struct Conv1dLayer {
  NodePtr w;  // out x in*k
  NodePtr b;  // out x 1
  int k = 1, stride = 1, pad = 0, dilation = 1;

  Conv1dLayer() = default;
  Conv1dLayer(ParamMap& params, const std::string& prefix, int in, int out, int kernel,
              Rng& rng, int stride_ = 1, int dilation_ = 1, bool zero_init = false,
              double init_scale = 1.0) {
    k = kernel;
    stride = stride_;
    dilation = dilation_;
    pad = dilation_ * (kernel - 1) / 2;  // "same" length at stride 1
    Mat wi = zero_init ? Mat::Zero(out, in * kernel)
                       : Mat(KaimingInit(out, static_cast<Eigen::Index>(in) * kernel,
                                         static_cast<Eigen::Index>(in) * kernel, rng) *
                             init_scale);
    w = RegisterParam(params, prefix + ".weight", std::move(wi));
    b = RegisterParam(params, prefix + ".bias", Mat::Zero(out, 1));
  }

  NodePtr operator()(NodePtr x) const { return Conv1d(x, w, b, k, stride, pad, dilation); }
};

struct ConvTranspose1dLayer {
  NodePtr w;  // out*k x in
  NodePtr b;  // out x 1
  int cout = 0, k = 1, stride = 1, pad = 0;

  ConvTranspose1dLayer() = default;
  ConvTranspose1dLayer(ParamMap& params, const std::string& prefix, int in, int out, int kernel,
                       int stride_, Rng& rng) {
    cout = out;
    k = kernel;
    stride = stride_;
    pad = (kernel - stride_) / 2;  // output length == stride * input length
    w = RegisterParam(params, prefix + ".weight",
                      KaimingInit(static_cast<Eigen::Index>(out) * kernel, in, in, rng));
    b = RegisterParam(params, prefix + ".bias", Mat::Zero(out, 1));
  }

  NodePtr operator()(NodePtr x) const { return ConvTranspose1d(x, w, b, cout, k, stride, pad); }
};

struct EmbeddingTable {
  NodePtr w;  // dim x vocab

  EmbeddingTable() = default;
  EmbeddingTable(ParamMap& params, const std::string& prefix, int vocab, int dim, Rng& rng) {
    w = RegisterParam(params, prefix + ".weight", rng.NormalMat(dim, vocab) * 0.1);
  }

  NodePtr operator()(const std::vector<int>& ids) const { return GatherCols(w, ids); }
};

}  // namespace nn
}  // namespace accentforge
