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

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "accentforge/adam.hpp"
#include "accentforge/checkpoint.hpp"
#include "accentforge/components.hpp"
#include "accentforge/features.hpp"
#include "accentforge/lexicon.hpp"
#include "accentforge/manifest.hpp"
#include "accentforge/mas.hpp"
#include "accentforge/objectives.hpp"
#include "accentforge/synthesis.hpp"
#include "accentforge/wav.hpp"

namespace accentforge {

struct TrainConfig {
  int stage = 1;
  int steps = 500;
  int batch_size = 4;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double lr_decay = 0.999875;
  double adam_beta1 = 0.8;
  double adam_beta2 = 0.99;
  uint64_t seed = 1234;
  LossWeights weights;
  int crop_frames = 16;
  int checkpoint_interval = 0;  // 0 = final checkpoint only
  bool stage2_kl_text = true;   // keep the text KL term during fine-tuning
  bool stage2_update_disc = true;
  double posterior_noise = 1.0;
  double e2e_noise = 1.0;
  std::string e2e_prior = "alternate";  // stage 1: text | audio | alternate
  std::string checkpoint_dir;           // empty = no periodic checkpoints on disk

  // Provenance carried into checkpoints.
  std::string config_text;
  uint64_t config_hash = 0;

  void Validate() const {
    if (steps <= 0) ThrowConfig("train: steps must be > 0");
    if (batch_size <= 0) ThrowConfig("train: batch_size must be > 0");
    if (crop_frames <= 0) ThrowConfig("train: crop_frames must be > 0");
    if (e2e_prior != "text" && e2e_prior != "audio" && e2e_prior != "alternate")
      ThrowConfig("train: e2e_prior must be text|audio|alternate");
  }
};

struct PreparedUtterance {
  UtteranceRecord rec;
  std::vector<double> samples;
  FeatureBundle feats;
  int speaker_index = -1;
};

struct TrainData {
  std::vector<PreparedUtterance> utts;
  std::vector<std::string> speakers;  // registry order == embedding index
  std::vector<std::string> symbols;   // lexicon symbols, for checkpoints

  int SpeakerIndex(const std::string& speaker_id) const {
    auto it = std::find(speakers.begin(), speakers.end(), speaker_id);
    return it == speakers.end() ? -1 : static_cast<int>(it - speakers.begin());
  }
};

// Loads audio and computes features for every record. The speaker registry
// comes out sorted; passing a fixed registry (stage 2, where embedding rows
// must keep their stage-1 indices) pins it, and speakers outside it fall
// back to the mel-projection embedding (index -1).
inline TrainData PrepareTrainData(const std::vector<UtteranceRecord>& records,
                                  const PhonemeLexicon& lexicon, const StftConfig& stft,
                                  const F0Extractor& f0x,
                                  const std::vector<std::string>* fixed_registry = nullptr) {
  TrainData data;
  data.symbols = lexicon.symbols();
  if (fixed_registry) {
    data.speakers = *fixed_registry;
  } else {
    std::vector<std::string> speakers;
    for (const auto& r : records) speakers.push_back(r.speaker_id);
    std::sort(speakers.begin(), speakers.end());
    speakers.erase(std::unique(speakers.begin(), speakers.end()), speakers.end());
    data.speakers = speakers;
  }
  for (const auto& r : records) {
    PreparedUtterance u;
    u.rec = r;
    Waveform wav = LoadAudio(r.audio_path);
    u.rec.sample_rate = wav.sample_rate;
    u.samples = std::move(wav.samples);
    u.feats = ComputeFeatures(u.samples, u.rec.sample_rate, stft, f0x);
    u.speaker_index = data.SpeakerIndex(r.speaker_id);
    data.utts.push_back(std::move(u));
  }
  return data;
}

// Fine-tuning pair: non-native source plus its synthetic native target and
// the alignment used when the target was generated.
struct PreparedPair {
  const PreparedUtterance* source = nullptr;
  std::vector<double> target_samples;
  FeatureBundle target_feats;
  AlignmentMatrix alignment;
};

// Joins a pair manifest against prepared source utterances and loads the
// synthetic targets. Fails on ids missing from the source corpus and on any
// frame-count mismatch.
inline std::vector<PreparedPair> LoadPreparedPairs(const std::vector<GroundTruthPairRecord>& recs,
                                                   const TrainData& sources,
                                                   const StftConfig& stft,
                                                   const F0Extractor& f0x) {
  std::vector<PreparedPair> pairs;
  for (const auto& r : recs) {
    const PreparedUtterance* src = nullptr;
    for (const auto& u : sources.utts)
      if (u.rec.id == r.source_id) {
        src = &u;
        break;
      }
    if (!src) ThrowData("pairs: source id '" + r.source_id + "' not in source manifest");
    PreparedPair p;
    p.source = src;
    Waveform wav = LoadAudio(r.target_path);
    p.target_samples = std::move(wav.samples);
    p.target_feats = ComputeFeatures(p.target_samples, wav.sample_rate, stft, f0x);
    p.alignment = AlignmentMatrix::FromTextGrid(ReadTextFile(r.alignment_path));
    if (p.target_feats.frame_count != src->feats.frame_count)
      ThrowData("pairs: frame count mismatch for '" + r.source_id + "': target " +
                std::to_string(p.target_feats.frame_count) + " vs source " +
                std::to_string(src->feats.frame_count));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

namespace detail {

// Deterministic shuffled epoch order; step -> batch indices is a pure
// function of (seed, corpus size, batch size), so resumed runs see the
// same data stream.
inline std::vector<size_t> BatchIndices(uint64_t seed, int64_t step_index, int batch_size,
                                        size_t corpus_size) {
  std::vector<size_t> batch;
  int64_t global0 = (step_index - 1) * batch_size;
  int64_t cached_epoch = -1;
  std::vector<size_t> order;
  for (int b = 0; b < batch_size; ++b) {
    int64_t global = global0 + b;
    int64_t epoch = global / static_cast<int64_t>(corpus_size);
    size_t pos = static_cast<size_t>(global % static_cast<int64_t>(corpus_size));
    if (epoch != cached_epoch) {
      order.resize(corpus_size);
      std::iota(order.begin(), order.end(), size_t{0});
      Rng rng = DeriveRng(seed, static_cast<uint64_t>(epoch), "data_order");
      rng.Shuffle(order);
      cached_epoch = epoch;
    }
    batch.push_back(order[pos]);
  }
  return batch;
}

struct SampleGraph {
  nn::NodePtr y_hat;       // teacher-forced decode, 1 x S
  nn::NodePtr real_wave;   // matching real segment, constant
  nn::NodePtr recon_mel;
  nn::NodePtr recon_e2e;
  nn::NodePtr kl_text;
  nn::NodePtr kl_audio;
  nn::NodePtr distill;  // stage 2 only
};

inline nn::NodePtr MeanOf(const std::vector<nn::NodePtr>& xs) {
  nn::NodePtr acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = nn::Add(acc, xs[i]);
  return nn::MulScalar(acc, 1.0 / static_cast<double>(xs.size()));
}

}  // namespace detail

class Trainer {
 public:
  Trainer(ComponentSet& set, const TrainConfig& cfg, const StftConfig& stft,
          std::ostream* loss_log)
      : set_(set), cfg_(cfg), stft_(stft), mel_(stft), log_(loss_log) {
    cfg_.Validate();
  }

  // Stage 1: joint native-TTS + AC pre-training.
  CheckpointBundle RunStage1(const TrainData& data, const CheckpointBundle* resume = nullptr) {
    if (data.utts.empty()) ThrowData("train-stage1: empty manifest");
    for (const auto& u : data.utts) {
      if (u.rec.transcript.empty() || u.rec.phoneme_ids.empty())
        ThrowData("train-stage1: utterance '" + u.rec.id + "' has no transcript");
      if (u.rec.accent_label != AccentLabel::kNative)
        ThrowData("train-stage1: utterance '" + u.rec.id +
                  "' is not native-accented; stage 1 trains on native data only");
      if (static_cast<int>(u.rec.phoneme_ids.size()) > u.feats.frame_count)
        ThrowData("train-stage1: utterance '" + u.rec.id + "' has more phonemes (" +
                  std::to_string(u.rec.phoneme_ids.size()) + ") than frames (" +
                  std::to_string(u.feats.frame_count) + ")");
    }
    BuildOptimizers();
    int64_t start_step = 0;
    if (resume) {
      ApplyResume(*resume);
      start_step = static_cast<int64_t>(resume->step);
    }
    for (int64_t s = start_step + 1; s <= cfg_.steps; ++s) {
      RunStep(s, TrainStage::kPretrain, data, nullptr);
      MaybeCheckpoint(s, 1, data);
    }
    return MakeBundle(cfg_.steps, 1, data.symbols, data.speakers);
  }

  // Stage 2: fine-tuning on synthetic ground-truth pairs with the freeze
  // policy: only the bottleneck extractor and the waveform generator (plus
  // discriminators) keep training.
  CheckpointBundle RunStage2(const TrainData& data, const std::vector<PreparedPair>& pairs,
                             const CheckpointBundle* resume = nullptr) {
    if (pairs.empty()) ThrowData("train-stage2: no ground-truth pairs");
    for (const auto& p : pairs) {
      if (p.source->feats.frame_count != p.target_feats.frame_count)
        ThrowData("train-stage2: frame count mismatch for pair '" + p.source->rec.id + "': source " +
                  std::to_string(p.source->feats.frame_count) + " vs target " +
                  std::to_string(p.target_feats.frame_count));
    }
    for (const auto& comp : {"posterior", "text_encoder", "content_encoder", "flow",
                             "f0_encoder", "speaker"})
      set_.SetFrozen(comp, true);
    set_.SetFrozen("bottleneck", false);
    set_.SetFrozen("generator", false);
    BuildOptimizers();
    int64_t start_step = 0;
    if (resume) {
      ApplyResume(*resume);
      start_step = static_cast<int64_t>(resume->step);
    }
    for (int64_t s = start_step + 1; s <= cfg_.steps; ++s) {
      RunStep(s, TrainStage::kFinetune, data, &pairs);
      MaybeCheckpoint(s, 2, data);
    }
    return MakeBundle(cfg_.steps, 2, data.symbols, data.speakers);
  }

  const std::vector<LossReport>& reports() const { return reports_; }
  nn::Adam& opt_g() { return opt_g_; }
  nn::Adam& opt_d() { return opt_d_; }

  CheckpointBundle MakeBundle(int64_t step, int stage, const std::vector<std::string>& symbols,
                              const std::vector<std::string>& speakers) const {
    CheckpointBundle b;
    b.stage = static_cast<uint32_t>(stage);
    b.step = static_cast<uint64_t>(step);
    b.config_hash = cfg_.config_hash;
    b.config_text = cfg_.config_text;
    b.symbols = symbols;
    b.speakers = speakers;
    FillBundleFromComponents(b, set_);
    b.has_opt = true;
    FillOptState(b.opt_g, opt_g_);
    FillOptState(b.opt_d, opt_d_);
    return b;
  }

 private:
  void BuildOptimizers() {
    nn::AdamConfig gcfg{cfg_.lr_g, cfg_.adam_beta1, cfg_.adam_beta2, 1e-9, cfg_.lr_decay};
    nn::AdamConfig dcfg{cfg_.lr_d, cfg_.adam_beta1, cfg_.adam_beta2, 1e-9, cfg_.lr_decay};
    opt_g_ = nn::Adam(set_.GeneratorSideParams(), gcfg);
    opt_d_ = nn::Adam(set_.DiscriminatorParams(), dcfg);
    // Frozen components drop out of the backward graph entirely; their
    // parameters stay bitwise untouched and the tape skips their branches.
    for (auto& [name, p] : set_.params)
      p->requires_grad = !set_.IsFrozen(ComponentSet::ComponentOf(name));
  }

  void ApplyResume(const CheckpointBundle& b) {
    ApplyBundleToComponents(b, set_);
    if (b.has_opt) {
      ApplyOptState(b.opt_g, opt_g_);
      ApplyOptState(b.opt_d, opt_d_);
    }
  }

  void MaybeCheckpoint(int64_t step, int stage, const TrainData& data) {
    if (cfg_.checkpoint_dir.empty() || cfg_.checkpoint_interval <= 0) return;
    if (step % cfg_.checkpoint_interval != 0 && step != cfg_.steps) return;
    namespace fs = std::filesystem;
    fs::create_directories(cfg_.checkpoint_dir);
    std::string path = (fs::path(cfg_.checkpoint_dir) /
                        ("ckpt_" + std::to_string(step) + ".afcp")).string();
    SaveCheckpoint(MakeBundle(step, stage, data.symbols, data.speakers), path);
  }

  // One optimizer step: discriminator update first, then the generator.
  void RunStep(int64_t step, TrainStage stage, const TrainData& data,
               const std::vector<PreparedPair>* pairs) {
    size_t corpus = stage == TrainStage::kPretrain ? data.utts.size() : pairs->size();
    auto batch = detail::BatchIndices(cfg_.seed, step, cfg_.batch_size, corpus);

    std::vector<detail::SampleGraph> graphs;
    for (int slot = 0; slot < static_cast<int>(batch.size()); ++slot) {
      Rng rng = DeriveRng(cfg_.seed, static_cast<uint64_t>(step),
                          "step_sample_" + std::to_string(slot));
      if (stage == TrainStage::kPretrain)
        graphs.push_back(BuildStage1Sample(data.utts[batch[static_cast<size_t>(slot)]], step, rng));
      else
        graphs.push_back(BuildStage2Sample((*pairs)[batch[static_cast<size_t>(slot)]], rng));
    }

    // Discriminator phase on detached fakes.
    LossReport report;
    report.step = step;
    bool update_disc = stage == TrainStage::kPretrain || cfg_.stage2_update_disc;
    {
      std::vector<nn::NodePtr> adv_ds;
      for (auto& sg : graphs) {
        auto real_outs = set_.Discriminate(sg.real_wave);
        auto fake_outs = set_.Discriminate(nn::Detach(sg.y_hat));
        auto [adv_d, adv_g_unused] = LossAdversarial(real_outs, fake_outs);
        adv_ds.push_back(adv_d);
      }
      nn::NodePtr adv_d = detail::MeanOf(adv_ds);
      report.adv_d = nn::ScalarValue(adv_d);
      report.total_d = report.adv_d;
      if (update_disc) {
        nn::Backward(adv_d);
        opt_d_.Step();
      }
    }

    // Generator phase against the updated discriminator.
    {
      std::vector<nn::NodePtr> totals, recon_mels, recon_e2es, kl_texts, kl_audios, advs, fms,
          distills;
      for (auto& sg : graphs) {
        auto real_outs = set_.Discriminate(sg.real_wave);
        auto fake_outs = set_.Discriminate(sg.y_hat);
        auto [adv_d_unused, adv_g] = LossAdversarial(real_outs, fake_outs);
        nn::NodePtr fm = LossFeatureMatching(real_outs, fake_outs);
        GeneratorLossParts parts;
        parts.recon = nn::Add(sg.recon_mel, sg.recon_e2e);
        parts.kl = nn::Add(sg.kl_text, sg.kl_audio);
        parts.adv_g = adv_g;
        parts.fm = fm;
        if (stage == TrainStage::kFinetune) parts.distill = sg.distill;
        totals.push_back(TotalGeneratorLoss(parts, stage, cfg_.weights));
        recon_mels.push_back(sg.recon_mel);
        recon_e2es.push_back(sg.recon_e2e);
        kl_texts.push_back(sg.kl_text);
        kl_audios.push_back(sg.kl_audio);
        advs.push_back(adv_g);
        fms.push_back(fm);
        if (sg.distill) distills.push_back(sg.distill);
      }
      nn::NodePtr total_g = detail::MeanOf(totals);
      report.total_g = nn::ScalarValue(total_g);
      report.recon_mel = nn::ScalarValue(detail::MeanOf(recon_mels));
      report.recon_e2e = nn::ScalarValue(detail::MeanOf(recon_e2es));
      report.kl_text = nn::ScalarValue(detail::MeanOf(kl_texts));
      report.kl_audio = nn::ScalarValue(detail::MeanOf(kl_audios));
      report.adv_g = nn::ScalarValue(detail::MeanOf(advs));
      report.fm = nn::ScalarValue(detail::MeanOf(fms));
      if (!distills.empty()) report.distill = nn::ScalarValue(detail::MeanOf(distills));
      if (!report.AllFinite())
        ThrowTrain("non-finite loss at step " + std::to_string(step) + ": " + report.Breakdown());
      nn::Backward(total_g);
      opt_g_.Step();
    }

    reports_.push_back(report);
    if (log_) (*log_) << report.ToJsonLine() << "\n" << std::flush;
  }

  struct CropView {
    int start = 0;
    int len = 0;
  };

  CropView PickCrop(int frame_count, Rng& rng) const {
    CropView c;
    c.len = std::min(cfg_.crop_frames, frame_count);
    int max_start = frame_count - c.len;
    c.start = max_start > 0 ? static_cast<int>(rng.UniformInt(0, max_start)) : 0;
    return c;
  }

  nn::NodePtr ConstWaveSegment(const std::vector<double>& samples, int start_frame,
                               int frames) const {
    int hop = stft_.hop;
    Mat row(1, static_cast<Eigen::Index>(frames) * hop);
    for (int i = 0; i < frames * hop; ++i)
      row(0, i) = samples[static_cast<size_t>(start_frame) * hop + i];
    return nn::Constant(row);
  }

  nn::NodePtr SpeakerNodeFor(int speaker_index, const Mat& fallback_mel) const {
    return speaker_index >= 0 ? set_.SpeakerEmbed(speaker_index)
                              : set_.SpeakerEmbedFromMel(fallback_mel);
  }

  detail::SampleGraph BuildStage1Sample(const PreparedUtterance& u, int64_t step, Rng& rng) {
    detail::SampleGraph sg;
    nn::NodePtr g = SpeakerNodeFor(u.speaker_index, u.feats.mel_spec);
    auto [q, z] = set_.PosteriorEncode(u.feats.linear_spec, g, rng, cfg_.posterior_noise);
    nn::NodePtr z_flow = set_.FlowForward(z, g);

    GaussianNode text_g = set_.TextPriorEncode(u.rec.phoneme_ids);
    Mat loglik = BuildLogLikelihood(z_flow->value, text_g.Values());
    AlignmentMatrix align = MasSearch(loglik);
    GaussianNode p_text = UpsampleTextNode(text_g, align);

    nn::NodePtr bnf = set_.ContentEncode(u.feats.mel_spec);
    GaussianNode p_audio = set_.BottleneckExtract(bnf);

    auto [kl_text, kl_audio] = LossKlPretrain(q, p_text, p_audio, z_flow);
    sg.kl_text = kl_text;
    sg.kl_audio = kl_audio;

    CropView crop = PickCrop(u.feats.frame_count, rng);
    nn::NodePtr f0_emb = set_.F0Encode(u.feats.f0.segment(crop.start, crop.len));
    nn::NodePtr z_crop = nn::SliceCols(z, crop.start, crop.len);
    sg.y_hat = set_.GenerateWaveform(z_crop, g, f0_emb);
    sg.real_wave = ConstWaveSegment(u.samples, crop.start, crop.len);

    nn::NodePtr mel_target = nn::Constant(mel_.LogMel(sg.real_wave)->value);
    sg.recon_mel = L1Loss(mel_target, mel_.LogMel(sg.y_hat));

    bool use_text_prior = cfg_.e2e_prior == "text" ||
                          (cfg_.e2e_prior == "alternate" && step % 2 == 1);
    const GaussianNode& prior = use_text_prior ? p_text : p_audio;
    GaussianNode prior_crop{nn::SliceCols(prior.mean, crop.start, crop.len),
                            nn::SliceCols(prior.log_scale, crop.start, crop.len)};
    nn::NodePtr z_e2e = prior_crop.SampleNode(rng, cfg_.e2e_noise);
    nn::NodePtr z_dec = set_.FlowInverse(z_e2e, g);
    nn::NodePtr y_e2e = set_.GenerateWaveform(z_dec, g, f0_emb);
    sg.recon_e2e = L1Loss(mel_target, mel_.LogMel(y_e2e));
    return sg;
  }

  detail::SampleGraph BuildStage2Sample(const PreparedPair& pair, Rng& rng) {
    detail::SampleGraph sg;
    const PreparedUtterance& src = *pair.source;
    // Speaker conditioning is extracted from the synthetic ground-truth side.
    nn::NodePtr g = SpeakerNodeFor(src.speaker_index, pair.target_feats.mel_spec);

    // Posterior, F0 and reconstruction targets come from the synthetic
    // ground-truth; the content encoder sees the non-native source.
    auto [q, z] = set_.PosteriorEncode(pair.target_feats.linear_spec, g, rng,
                                       cfg_.posterior_noise);
    nn::NodePtr z_flow = set_.FlowForward(z, g);

    GaussianNode text_g = set_.TextPriorEncode(src.rec.phoneme_ids);
    GaussianNode p_text = UpsampleTextNode(text_g, pair.alignment);

    nn::NodePtr bnf = set_.ContentEncode(src.feats.mel_spec);
    GaussianNode p_audio = set_.BottleneckExtract(bnf);

    auto [kl_text, kl_audio] = LossKlPretrain(q, p_text, p_audio, z_flow);
    sg.kl_text = cfg_.stage2_kl_text ? kl_text : nn::Scalar(0.0);
    sg.kl_audio = kl_audio;
    sg.distill = LossDistill(p_audio, p_text);

    CropView crop = PickCrop(pair.target_feats.frame_count, rng);
    nn::NodePtr f0_emb = set_.F0Encode(pair.target_feats.f0.segment(crop.start, crop.len));
    nn::NodePtr z_crop = nn::SliceCols(z, crop.start, crop.len);
    sg.y_hat = set_.GenerateWaveform(z_crop, g, f0_emb);
    sg.real_wave = ConstWaveSegment(pair.target_samples, crop.start, crop.len);

    nn::NodePtr mel_target = nn::Constant(mel_.LogMel(sg.real_wave)->value);
    sg.recon_mel = L1Loss(mel_target, mel_.LogMel(sg.y_hat));

    GaussianNode prior_crop{nn::SliceCols(p_audio.mean, crop.start, crop.len),
                            nn::SliceCols(p_audio.log_scale, crop.start, crop.len)};
    nn::NodePtr z_e2e = prior_crop.SampleNode(rng, cfg_.e2e_noise);
    nn::NodePtr z_dec = set_.FlowInverse(z_e2e, g);
    nn::NodePtr y_e2e = set_.GenerateWaveform(z_dec, g, f0_emb);
    sg.recon_e2e = L1Loss(mel_target, mel_.LogMel(y_e2e));
    return sg;
  }

  ComponentSet& set_;
  TrainConfig cfg_;
  StftConfig stft_;
  MelLossExtractor mel_;
  std::ostream* log_ = nullptr;
  nn::Adam opt_g_, opt_d_;
  std::vector<LossReport> reports_;
};

}  // namespace accentforge
