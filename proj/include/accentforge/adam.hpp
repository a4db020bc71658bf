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
#include <string>
#include <vector>

#include "accentforge/graph.hpp"

namespace accentforge {
namespace nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double eps = 1e-9;
  double lr_decay = 0.999875;  // per optimizer step
};

// Adam over an explicit named parameter set. Parameters whose gradient is
// empty in a given step are skipped entirely (their moments do not decay),
// which keeps resumed runs identical to uninterrupted ones.
class Adam {
 public:
  struct Slot {
    Mat m;
    Mat v;
  };

  Adam() = default;
  Adam(std::map<std::string, NodePtr> params, AdamConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {}

  void Step() {
    ++t_;
    double lr_t = cfg_.lr * std::pow(cfg_.lr_decay, static_cast<double>(t_ - 1));
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [name, p] : params_) {
      if (p->grad.size() == 0) continue;
      Slot& slot = slots_[name];
      if (slot.m.size() == 0) {
        slot.m = Mat::Zero(p->value.rows(), p->value.cols());
        slot.v = Mat::Zero(p->value.rows(), p->value.cols());
      }
      slot.m = cfg_.beta1 * slot.m + (1.0 - cfg_.beta1) * p->grad;
      slot.v = (cfg_.beta2 * slot.v.array() + (1.0 - cfg_.beta2) * p->grad.array().square()).matrix();
      Mat m_hat = slot.m / bc1;
      Mat v_hat = slot.v / bc2;
      p->value.array() -= lr_t * m_hat.array() / (v_hat.array().sqrt() + cfg_.eps);
      p->grad = Mat();  // consume the gradient
    }
  }

  void ZeroGrad() {
    for (auto& [name, p] : params_) p->grad = Mat();
  }

  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }
  const std::map<std::string, NodePtr>& params() const { return params_; }
  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::map<std::string, NodePtr> params_;
  std::map<std::string, Slot> slots_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

}  // namespace nn
}  // namespace accentforge
