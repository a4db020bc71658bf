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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "accentforge/components.hpp"
#include "accentforge/gaussian.hpp"
#include "accentforge/graph.hpp"
#include "accentforge/stft.hpp"

namespace accentforge {

enum class TrainStage { kPretrain, kFinetune };

inline const char* TrainStageName(TrainStage s) {
  return s == TrainStage::kPretrain ? "pretrain" : "finetune";
}

// Weighted-sum coefficients for the generator total. The distillation
// weight must outweigh the frame-level KL and e2e mel pulls on the audio
// prior, or fine-tuning drifts it away from the text prior.
struct LossWeights {
  double mel = 45.0;
  double kl = 1.0;
  double adv = 1.0;
  double fm = 2.0;
  double distill = 10.0;
};

// ------------------------------ KL divergence -------------------------------

// Closed-form KL(q || p) between diagonal Gaussians, averaged over all
// (dimension, position) entries. Written in terms of the log-scale
// difference so that KL(q, q) is exactly zero in floating point.
inline nn::NodePtr KlDiagGaussiansNode(const GaussianNode& q, const GaussianNode& p) {
  if (q.mean->value.rows() != p.mean->value.rows() ||
      q.mean->value.cols() != p.mean->value.cols())
    ThrowData("kl_diag_gaussians: shape mismatch");
  nn::NodePtr delta_ls = nn::Sub(q.log_scale, p.log_scale);
  nn::NodePtr var_ratio = nn::Exp(nn::MulScalar(delta_ls, 2.0));
  nn::NodePtr quad = nn::Mul(nn::Square(nn::Sub(q.mean, p.mean)),
                             nn::Exp(nn::MulScalar(p.log_scale, -2.0)));
  nn::NodePtr elem = nn::AddScalar(
      nn::Add(nn::Neg(delta_ls), nn::MulScalar(nn::Add(var_ratio, quad), 0.5)), -0.5);
  return nn::MeanAll(elem);
}

inline double KlDiagGaussians(const DiagonalGaussian& q, const DiagonalGaussian& p) {
  return KlElementwise(q, p).mean();
}

// Pre-training KL pair. The posterior is carried into flow space: the
// flowed latent acts as the effective posterior mean while the posterior's
// scales ride along unchanged (the additive coupling is volume preserving,
// so no change-of-variables term appears). Both prior KL terms are then
// exact closed forms against that flowed posterior.
inline std::pair<nn::NodePtr, nn::NodePtr> LossKlPretrain(const GaussianNode& q_posterior,
                                                          const GaussianNode& p_text_upsampled,
                                                          const GaussianNode& p_audio,
                                                          const nn::NodePtr& flowed_latent) {
  if (flowed_latent->value.cols() != q_posterior.mean->value.cols())
    ThrowData("loss_kl_pretrain: flowed latent length != posterior length");
  if (p_text_upsampled.mean->value.cols() != flowed_latent->value.cols())
    ThrowData("loss_kl_pretrain: text prior length != frame count");
  if (p_audio.mean->value.cols() != flowed_latent->value.cols())
    ThrowData("loss_kl_pretrain: audio prior length != frame count");
  GaussianNode q_flow{flowed_latent, q_posterior.log_scale};
  return {KlDiagGaussiansNode(q_flow, p_text_upsampled), KlDiagGaussiansNode(q_flow, p_audio)};
}

// ------------------------------ reconstruction ------------------------------

inline nn::NodePtr L1Loss(const nn::NodePtr& target, const nn::NodePtr& pred) {
  if (target->value.rows() != pred->value.rows() || target->value.cols() != pred->value.cols())
    ThrowData("loss_reconstruction: shape mismatch (" + std::to_string(target->value.rows()) +
              "x" + std::to_string(target->value.cols()) + " vs " +
              std::to_string(pred->value.rows()) + "x" + std::to_string(pred->value.cols()) + ")");
  return nn::MeanAbsDiff(target, pred);
}

inline std::pair<nn::NodePtr, nn::NodePtr> LossReconstruction(const nn::NodePtr& mel_target,
                                                              const nn::NodePtr& mel_pred,
                                                              const nn::NodePtr& mel_e2e) {
  return {L1Loss(mel_target, mel_pred), L1Loss(mel_target, mel_e2e)};
}

// ---------------------------- adversarial losses ----------------------------

// Least-squares GAN objective summed over sub-discriminators:
//   adv_d = sum mean[(1 - D(y))^2] + mean[D(y_hat)^2]
//   adv_g = sum mean[(1 - D(y_hat))^2]
inline std::pair<nn::NodePtr, nn::NodePtr> LossAdversarial(
    const std::vector<DiscriminatorOutput>& real, const std::vector<DiscriminatorOutput>& fake) {
  if (real.size() != fake.size()) ThrowData("loss_adversarial: sub-discriminator count mismatch");
  if (real.empty()) ThrowData("loss_adversarial: empty score lists");
  nn::NodePtr adv_d = nn::Scalar(0.0);
  nn::NodePtr adv_g = nn::Scalar(0.0);
  for (size_t i = 0; i < real.size(); ++i) {
    nn::NodePtr d_real = nn::MeanSquare(nn::AddScalar(nn::Neg(real[i].score), 1.0));
    nn::NodePtr d_fake = nn::MeanSquare(fake[i].score);
    adv_d = nn::Add(adv_d, nn::Add(d_real, d_fake));
    adv_g = nn::Add(adv_g, nn::MeanSquare(nn::AddScalar(nn::Neg(fake[i].score), 1.0)));
  }
  return {adv_d, adv_g};
}

// Generator-side feature matching: layerwise mean-L1 between the real and
// generated feature maps, real side treated as constant.
inline nn::NodePtr LossFeatureMatching(const std::vector<DiscriminatorOutput>& real,
                                       const std::vector<DiscriminatorOutput>& fake) {
  if (real.size() != fake.size())
    ThrowData("loss_feature_matching: sub-discriminator count mismatch");
  nn::NodePtr fm = nn::Scalar(0.0);
  for (size_t i = 0; i < real.size(); ++i) {
    if (real[i].fmaps.size() != fake[i].fmaps.size())
      ThrowData("loss_feature_matching: feature map count mismatch");
    for (size_t l = 0; l < real[i].fmaps.size(); ++l)
      fm = nn::Add(fm, nn::MeanAbsDiff(nn::Detach(real[i].fmaps[l]), fake[i].fmaps[l]));
  }
  return fm;
}

// ------------------------------- distillation -------------------------------

// KL(p_audio || p_text): audio prior first, text prior treated as a
// constant so gradients reach only the audio-prior side.
inline nn::NodePtr LossDistill(const GaussianNode& p_audio, const GaussianNode& p_text_upsampled) {
  if (p_audio.mean->value.cols() != p_text_upsampled.mean->value.cols())
    ThrowData("loss_distill: frame length mismatch");
  return KlDiagGaussiansNode(p_audio, p_text_upsampled.Detached());
}

// --------------------------------- totals -----------------------------------

struct GeneratorLossParts {
  nn::NodePtr recon;  // recon_mel + recon_e2e
  nn::NodePtr kl;     // kl_text + kl_audio
  nn::NodePtr adv_g;
  nn::NodePtr fm;
  nn::NodePtr distill;  // finetune only
};

inline nn::NodePtr TotalGeneratorLoss(const GeneratorLossParts& parts, TrainStage stage,
                                      const LossWeights& w) {
  if (!parts.recon || !parts.kl || !parts.adv_g || !parts.fm)
    ThrowData("total_generator_loss: missing required part for stage " +
              std::string(TrainStageName(stage)));
  if (stage == TrainStage::kPretrain && parts.distill)
    ThrowData("total_generator_loss: distill term is not part of the pre-training total");
  if (stage == TrainStage::kFinetune && !parts.distill)
    ThrowData("total_generator_loss: finetune total requires the distill term");
  nn::NodePtr total = nn::MulScalar(parts.recon, w.mel);
  total = nn::Add(total, nn::MulScalar(parts.kl, w.kl));
  total = nn::Add(total, nn::MulScalar(parts.adv_g, w.adv));
  total = nn::Add(total, nn::MulScalar(parts.fm, w.fm));
  if (stage == TrainStage::kFinetune) total = nn::Add(total, nn::MulScalar(parts.distill, w.distill));
  return total;
}

// ------------------------------- loss report --------------------------------

struct LossReport {
  int64_t step = 0;
  double recon_mel = 0, recon_e2e = 0;
  double kl_text = 0, kl_audio = 0;
  std::optional<double> distill;
  double adv_g = 0, adv_d = 0, fm = 0;
  double total_g = 0, total_d = 0;

  bool AllFinite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return ok(recon_mel) && ok(recon_e2e) && ok(kl_text) && ok(kl_audio) && ok(adv_g) &&
           ok(adv_d) && ok(fm) && ok(total_g) && ok(total_d) &&
           (!distill.has_value() || ok(*distill));
  }

  std::string ToJsonLine() const {
    nlohmann::json j;
    j["step"] = step;
    j["recon_mel"] = recon_mel;
    j["recon_e2e"] = recon_e2e;
    j["kl_text"] = kl_text;
    j["kl_audio"] = kl_audio;
    if (distill.has_value()) j["distill"] = *distill;
    j["adv_g"] = adv_g;
    j["adv_d"] = adv_d;
    j["fm"] = fm;
    j["total_g"] = total_g;
    j["total_d"] = total_d;
    return j.dump();
  }

  static LossReport FromJsonLine(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    LossReport r;
    r.step = j.at("step").get<int64_t>();
    r.recon_mel = j.at("recon_mel").get<double>();
    r.recon_e2e = j.at("recon_e2e").get<double>();
    r.kl_text = j.at("kl_text").get<double>();
    r.kl_audio = j.at("kl_audio").get<double>();
    if (j.contains("distill")) r.distill = j.at("distill").get<double>();
    r.adv_g = j.at("adv_g").get<double>();
    r.adv_d = j.at("adv_d").get<double>();
    r.fm = j.at("fm").get<double>();
    r.total_g = j.at("total_g").get<double>();
    r.total_d = j.at("total_d").get<double>();
    return r;
  }

  std::string Breakdown() const {
    std::ostringstream os;
    os << "recon_mel=" << recon_mel << " recon_e2e=" << recon_e2e << " kl_text=" << kl_text
       << " kl_audio=" << kl_audio;
    if (distill.has_value()) os << " distill=" << *distill;
    os << " adv_g=" << adv_g << " adv_d=" << adv_d << " fm=" << fm << " total_g=" << total_g
       << " total_d=" << total_d;
    return os.str();
  }
};

// -------------------------- differentiable log-mel --------------------------

// Same analysis chain as the value-level feature path (windowed frames,
// real DFT magnitudes, mel projection, log with floor), expressed in graph
// ops so reconstruction losses can reach the waveform generator. A small
// epsilon inside the magnitude sqrt keeps the gradient finite on silence.
class MelLossExtractor {
 public:
  explicit MelLossExtractor(const StftConfig& cfg)
      : cfg_(cfg), window_(HannWindow(cfg.win_length)), mel_fb_(MelFilterbank(cfg)) {
    DftBasis basis(cfg.win_length);
    cos_basis_ = std::move(basis.cos_basis);
    sin_basis_ = std::move(basis.sin_basis);
  }

  nn::NodePtr LogMel(const nn::NodePtr& wave) const {
    nn::NodePtr frames = nn::Frames(wave, cfg_.win_length, cfg_.hop);
    nn::NodePtr windowed = nn::MulColVecConst(frames, window_);
    nn::NodePtr re = nn::Matmul(nn::Constant(cos_basis_), windowed);
    nn::NodePtr im = nn::Matmul(nn::Constant(sin_basis_), windowed);
    nn::NodePtr mag = nn::Sqrt(nn::AddScalar(nn::Add(nn::Square(re), nn::Square(im)), 1e-12));
    nn::NodePtr mel = nn::Matmul(nn::Constant(mel_fb_), mag);
    return nn::Log(nn::ClampMin(mel, cfg_.log_floor));
  }

  Mat LogMelValue(const std::vector<double>& samples) const {
    Mat row(1, static_cast<Eigen::Index>(samples.size()));
    for (size_t i = 0; i < samples.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = samples[i];
    return LogMel(nn::Constant(row))->value;
  }

  const StftConfig& config() const { return cfg_; }

 private:
  StftConfig cfg_;
  Vec window_;
  Mat mel_fb_;
  Mat cos_basis_;
  Mat sin_basis_;
};

}  // namespace accentforge
