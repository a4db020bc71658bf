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

#include "accentforge/adam.hpp"
#include "accentforge/common.hpp"
#include "accentforge/graph.hpp"
#include "accentforge/modules.hpp"
#include "accentforge/rng.hpp"

namespace accentforge {

// Mean/std-pooled mel statistics; the classifier's utterance-level features.
inline Vec MelStatsFeatures(const Mat& mel) {
  if (mel.cols() < 1) ThrowData("accent features: empty mel");
  Vec mean = mel.rowwise().mean();
  Vec var = (mel.colwise() - mean).array().square().rowwise().mean();
  Vec out(2 * mel.rows());
  out << mean, var.array().sqrt().matrix();
  return out;
}

// Small feed-forward binary classifier over pooled mel statistics; the
// positive class is "non-native". Trained with the same Adam machinery as
// the main model.
class AccentClassifier {
 public:
  AccentClassifier(int feature_dim, int hidden, uint64_t seed) : feature_dim_(feature_dim) {
    Rng rng = DeriveRng(seed, "accent_classifier");
    l1_ = nn::Linear(params_, "clf.l1", feature_dim, hidden, rng);
    l2_ = nn::Linear(params_, "clf.l2", hidden, 1, rng);
  }

  // Probability that the utterance is non-native.
  double Classify(const Vec& features) const { return nn::ScalarValue(Logit(features)); }

  bool IsNonnative(const Vec& features) const { return Classify(features) > 0.5; }

  // Binary cross-entropy training on (features, is_nonnative) rows.
  void Train(const std::vector<Vec>& features, const std::vector<int>& labels, int epochs,
             double lr = 1e-2) {
    if (features.size() != labels.size() || features.empty())
      ThrowData("accent classifier: bad training set");
    nn::Adam opt(params_, nn::AdamConfig{lr, 0.9, 0.999, 1e-8, 1.0});
    for (int e = 0; e < epochs; ++e) {
      nn::NodePtr loss = nn::Scalar(0.0);
      for (size_t i = 0; i < features.size(); ++i) {
        nn::NodePtr p = Logit(features[i]);
        p = nn::Clamp(p, 1e-7, 1.0 - 1e-7);
        nn::NodePtr term = labels[i] ? nn::Log(p) : nn::Log(nn::AddScalar(nn::Neg(p), 1.0));
        loss = nn::Sub(loss, term);
      }
      loss = nn::MulScalar(loss, 1.0 / static_cast<double>(features.size()));
      nn::Backward(loss);
      opt.Step();
    }
  }

 private:
  nn::NodePtr Logit(const Vec& features) const {
    if (features.size() != feature_dim_) ThrowData("accent classifier: feature dim mismatch");
    Mat col = features;
    return nn::Sigmoid(l2_(nn::Tanh(l1_(nn::Constant(col)))));
  }

  int feature_dim_;
  nn::ParamMap params_;
  nn::Linear l1_, l2_;
};

// Percent of utterances classified as non-native. Applied to an original
// non-native set this should read high; applied to well-converted audio it
// should read low, and the gap between the two is the conversion strength.
inline double AccentAccuracy(const AccentClassifier& clf, const std::vector<Vec>& feature_rows) {
  if (feature_rows.empty()) ThrowData("accent_accuracy: empty utterance set");
  int nonnative = 0;
  for (const auto& f : feature_rows)
    if (clf.IsNonnative(f)) ++nonnative;
  return 100.0 * nonnative / static_cast<double>(feature_rows.size());
}

}  // namespace accentforge
