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
#include <utility>
#include <vector>

#include "accentforge/adam.hpp"
#include "accentforge/gaussian.hpp"
#include "accentforge/graph.hpp"
#include "accentforge/modules.hpp"
#include "accentforge/rng.hpp"

namespace accentforge {

struct ModelConfig {
  int latent_dim = 192;  // even; the flow splits it in half
  int hidden = 192;
  int d_bnf = 256;
  int d_f0 = 64;
  int d_spk = 256;
  int f_lin = 513;
  int f_mel = 80;
  int flow_layers = 4;
  int f0_bins = 256;
  double f0_min = 60.0;
  double f0_max = 400.0;
  int gen_channels = 128;                  // halves at every upsample stage
  std::vector<int> gen_rates = {8, 8, 5};  // product must equal hop
  std::vector<int> gen_kernels = {16, 16, 11};
  std::vector<int> mpd_periods = {2, 3, 5};
  int disc_channels = 16;
  int hop = 320;
  int vocab_size = 0;     // from the lexicon
  int num_speakers = 0;   // from the speaker registry

  void Validate() const {
    if (latent_dim <= 0 || latent_dim % 2 != 0) ThrowConfig("model: latent_dim must be positive and even");
    int prod = 1;
    for (int r : gen_rates) prod *= r;
    if (prod != hop)
      ThrowConfig("model: product of generator upsample rates (" + std::to_string(prod) +
                  ") must equal hop (" + std::to_string(hop) + ")");
    if (gen_rates.size() != gen_kernels.size()) ThrowConfig("model: gen rates/kernels length mismatch");
    for (size_t i = 0; i < gen_rates.size(); ++i)
      if ((gen_kernels[i] - gen_rates[i]) % 2 != 0)
        ThrowConfig("model: gen kernel minus rate must be even for exact upsampling");
    if (vocab_size <= 0) ThrowConfig("model: vocab_size not set");
    if (num_speakers <= 0) ThrowConfig("model: num_speakers not set");
  }
};

// ------------------------------- components --------------------------------

// Linear spectrogram -> frame-level posterior q(z|x), speaker conditioned.
struct PosteriorEncoder {
  nn::Conv1dLayer pre, proj;
  std::vector<nn::Conv1dLayer> convs;
  nn::Linear cond;

  PosteriorEncoder(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) {
    pre = nn::Conv1dLayer(p, "posterior.pre", cfg.f_lin, cfg.hidden, 1, rng);
    cond = nn::Linear(p, "posterior.cond", cfg.d_spk, cfg.hidden, rng);
    for (int i = 0; i < 3; ++i)
      convs.emplace_back(p, "posterior.conv" + std::to_string(i), cfg.hidden, cfg.hidden, 5, rng);
    proj = nn::Conv1dLayer(p, "posterior.proj", cfg.hidden, 2 * cfg.latent_dim, 1, rng,
                           1, 1, false, 0.05);
  }

  GaussianNode Forward(const Mat& linear_spec, const nn::NodePtr& g) const {
    nn::NodePtr h = pre(nn::Constant(linear_spec));
    h = nn::AddColVec(h, cond(g));
    for (const auto& c : convs) h = c(nn::LeakyRelu(h));
    return SplitProjection(proj(nn::LeakyRelu(h)));
  }
};

// Phoneme ids -> token-level prior p(z|c_text).
struct TextEncoder {
  nn::EmbeddingTable emb;
  std::vector<nn::Conv1dLayer> convs;
  nn::Conv1dLayer proj;
  int vocab = 0;

  TextEncoder(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) : vocab(cfg.vocab_size) {
    emb = nn::EmbeddingTable(p, "text_encoder.emb", cfg.vocab_size, cfg.hidden, rng);
    for (int i = 0; i < 3; ++i)
      convs.emplace_back(p, "text_encoder.conv" + std::to_string(i), cfg.hidden, cfg.hidden, 5, rng);
    proj = nn::Conv1dLayer(p, "text_encoder.proj", cfg.hidden, 2 * cfg.latent_dim, 1, rng,
                           1, 1, false, 0.05);
  }

  GaussianNode Forward(const std::vector<int>& ids) const {
    if (ids.empty()) ThrowData("text_prior_encode: empty phoneme sequence");
    for (int id : ids)
      if (id < 0 || id >= vocab)
        ThrowData("text_prior_encode: phoneme id " + std::to_string(id) +
                  " outside embedding range [0, " + std::to_string(vocab) + ")");
    nn::NodePtr h = emb(ids);
    for (const auto& c : convs) h = c(nn::LeakyRelu(h));
    return SplitProjection(proj(nn::LeakyRelu(h)));
  }
};

// Mel frames -> content representation (BNFs). Stands in for a large
// self-supervised encoder behind the same audio -> T x D_bnf contract.
struct ContentEncoder {
  nn::Conv1dLayer pre, proj;
  std::vector<nn::Conv1dLayer> convs;
  int f_mel = 0;

  ContentEncoder(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) : f_mel(cfg.f_mel) {
    pre = nn::Conv1dLayer(p, "content_encoder.pre", cfg.f_mel, cfg.hidden, 5, rng);
    for (int i = 0; i < 2; ++i)
      convs.emplace_back(p, "content_encoder.conv" + std::to_string(i), cfg.hidden, cfg.hidden, 5, rng);
    proj = nn::Conv1dLayer(p, "content_encoder.proj", cfg.hidden, cfg.d_bnf, 1, rng);
  }

  nn::NodePtr Forward(const Mat& mel) const {
    if (mel.rows() != f_mel) ThrowData("content_encode: mel dimension mismatch");
    nn::NodePtr h = pre(nn::Constant(mel));
    for (const auto& c : convs) h = c(nn::LeakyRelu(h));
    return proj(nn::LeakyRelu(h));
  }
};

// BNFs -> frame-level audio prior p(z|c_audio). Mirrors the text encoder's
// conv stack minus the embedding table.
struct BottleneckExtractor {
  nn::Conv1dLayer pre, proj;
  std::vector<nn::Conv1dLayer> convs;

  BottleneckExtractor(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) {
    pre = nn::Conv1dLayer(p, "bottleneck.pre", cfg.d_bnf, cfg.hidden, 1, rng);
    for (int i = 0; i < 3; ++i)
      convs.emplace_back(p, "bottleneck.conv" + std::to_string(i), cfg.hidden, cfg.hidden, 5, rng);
    proj = nn::Conv1dLayer(p, "bottleneck.proj", cfg.hidden, 2 * cfg.latent_dim, 1, rng,
                           1, 1, false, 0.05);
  }

  GaussianNode Forward(const nn::NodePtr& bnf) const {
    nn::NodePtr h = pre(bnf);
    for (const auto& c : convs) h = c(nn::LeakyRelu(h));
    return SplitProjection(proj(nn::LeakyRelu(h)));
  }
};

// Stack of additive coupling layers, speaker conditioned. Volume preserving
// (zero log-determinant) and exactly invertible; the final projection of
// each coupling net is zero-initialized so a fresh flow is the identity.
struct Flow {
  struct Coupling {
    nn::Conv1dLayer pre, out;
    nn::Linear cond;
  };
  std::vector<Coupling> layers;
  int half = 0;

  Flow(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) {
    half = cfg.latent_dim / 2;
    for (int i = 0; i < cfg.flow_layers; ++i) {
      Coupling c;
      std::string prefix = "flow.layer" + std::to_string(i);
      c.pre = nn::Conv1dLayer(p, prefix + ".pre", half, cfg.hidden, 3, rng);
      c.cond = nn::Linear(p, prefix + ".cond", cfg.d_spk, cfg.hidden, rng);
      c.out = nn::Conv1dLayer(p, prefix + ".out", cfg.hidden, half, 3, rng,
                              /*stride=*/1, /*dilation=*/1, /*zero_init=*/true);
      layers.push_back(std::move(c));
    }
  }

  nn::NodePtr Shift(const Coupling& c, const nn::NodePtr& kept, const nn::NodePtr& g) const {
    return c.out(nn::LeakyRelu(nn::AddColVec(c.pre(kept), c.cond(g))));
  }

  // Even layers shift the bottom half given the top; odd layers the top
  // given the bottom. No permutation, so identity init holds layerwise.
  nn::NodePtr Forward(nn::NodePtr z, const nn::NodePtr& g) const {
    for (size_t i = 0; i < layers.size(); ++i) {
      nn::NodePtr top = nn::SliceRows(z, 0, half);
      nn::NodePtr bottom = nn::SliceRows(z, half, half);
      if (i % 2 == 0) {
        bottom = nn::Add(bottom, Shift(layers[i], top, g));
      } else {
        top = nn::Add(top, Shift(layers[i], bottom, g));
      }
      z = nn::ConcatRows(top, bottom);
      if (!AllFinite(z->value))
        ThrowTrain("flow_forward: non-finite values at layer " + std::to_string(i));
    }
    return z;
  }

  nn::NodePtr Inverse(nn::NodePtr z, const nn::NodePtr& g) const {
    for (size_t n = layers.size(); n > 0; --n) {
      size_t i = n - 1;
      nn::NodePtr top = nn::SliceRows(z, 0, half);
      nn::NodePtr bottom = nn::SliceRows(z, half, half);
      if (i % 2 == 0) {
        bottom = nn::Sub(bottom, Shift(layers[i], top, g));
      } else {
        top = nn::Sub(top, Shift(layers[i], bottom, g));
      }
      z = nn::ConcatRows(top, bottom);
      if (!AllFinite(z->value))
        ThrowTrain("flow_inverse: non-finite values at layer " + std::to_string(i));
    }
    return z;
  }
};

// F0 track -> embedded prosody sequence. Log-spaced quantization over
// [f0_min, f0_max] with a dedicated unvoiced bin at index 0.
struct F0Encoder {
  nn::EmbeddingTable emb;
  int bins = 0;
  double f0_min = 0, f0_max = 0;

  F0Encoder(nn::ParamMap& p, const ModelConfig& cfg, Rng rng)
      : bins(cfg.f0_bins), f0_min(cfg.f0_min), f0_max(cfg.f0_max) {
    emb = nn::EmbeddingTable(p, "f0_encoder.emb", cfg.f0_bins + 1, cfg.d_f0, rng);
  }

  // Bin b >= 1 covers [f0_min * r^(b-1), f0_min * r^b), r = (max/min)^(1/bins).
  int Quantize(double f0) const {
    if (f0 < 0.0) ThrowData("f0_encode: negative f0 value");
    if (f0 <= 0.0) return 0;
    double pos = bins * (std::log(f0) - std::log(f0_min)) / (std::log(f0_max) - std::log(f0_min));
    int b = 1 + static_cast<int>(std::floor(pos));
    return std::min(std::max(b, 1), bins);
  }

  nn::NodePtr Forward(const Vec& f0) const {
    std::vector<int> ids(static_cast<size_t>(f0.size()));
    for (Eigen::Index t = 0; t < f0.size(); ++t) ids[static_cast<size_t>(t)] = Quantize(f0[t]);
    return emb(ids);
  }
};

// Speaker identity -> unit-norm embedding g. Known speakers use a learned
// table; unseen speakers fall back to a projection of the mean mel frame.
struct SpeakerEncoder {
  nn::EmbeddingTable table;
  nn::Linear mel_proj;
  int num_speakers = 0;
  int f_mel = 0;

  SpeakerEncoder(nn::ParamMap& p, const ModelConfig& cfg, Rng rng)
      : num_speakers(cfg.num_speakers), f_mel(cfg.f_mel) {
    table = nn::EmbeddingTable(p, "speaker.table", cfg.num_speakers, cfg.d_spk, rng);
    mel_proj = nn::Linear(p, "speaker.mel_proj", cfg.f_mel, cfg.d_spk, rng);
  }

  nn::NodePtr FromIndex(int speaker_index) const {
    if (speaker_index < 0 || speaker_index >= num_speakers)
      ThrowData("speaker_embed: unknown speaker index " + std::to_string(speaker_index));
    return nn::L2NormalizeCol(table({speaker_index}));
  }

  nn::NodePtr FromMel(const Mat& mel) const {
    if (mel.rows() != f_mel) ThrowData("speaker_embed: mel dimension mismatch");
    if (mel.cols() < 1) ThrowData("speaker_embed: need at least one frame of reference audio");
    return nn::L2NormalizeCol(mel_proj(nn::ColMean(nn::Constant(mel))));
  }
};

// Upsampling waveform decoder: latent frames -> samples at hop x T, bounded
// in [-1, 1] by the output tanh. Prosody enters by channel concat of the F0
// embedding, speaker identity as a bias after the pre conv.
struct Generator {
  nn::Conv1dLayer pre, post;
  nn::Linear cond;
  struct Stage {
    nn::ConvTranspose1dLayer up;
    nn::Conv1dLayer res1a, res1b;  // dilation 1 and 3
  };
  std::vector<Stage> stages;
  int hop = 0;

  Generator(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) : hop(cfg.hop) {
    pre = nn::Conv1dLayer(p, "generator.pre", cfg.latent_dim + cfg.d_f0, cfg.gen_channels, 7, rng);
    cond = nn::Linear(p, "generator.cond", cfg.d_spk, cfg.gen_channels, rng);
    int ch = cfg.gen_channels;
    for (size_t i = 0; i < cfg.gen_rates.size(); ++i) {
      Stage s;
      std::string prefix = "generator.stage" + std::to_string(i);
      int out_ch = std::max(2, ch / 2);
      s.up = nn::ConvTranspose1dLayer(p, prefix + ".up", ch, out_ch, cfg.gen_kernels[i],
                                      cfg.gen_rates[i], rng);
      s.res1a = nn::Conv1dLayer(p, prefix + ".res_a", out_ch, out_ch, 3, rng, 1, 1);
      s.res1b = nn::Conv1dLayer(p, prefix + ".res_b", out_ch, out_ch, 3, rng, 1, 3);
      stages.push_back(std::move(s));
      ch = out_ch;
    }
    post = nn::Conv1dLayer(p, "generator.post", ch, 1, 7, rng);
  }

  nn::NodePtr Forward(const nn::NodePtr& z, const nn::NodePtr& g, const nn::NodePtr& f0_emb) const {
    if (z->value.cols() != f0_emb->value.cols())
      ThrowData("generate_waveform: latent frames (" + std::to_string(z->value.cols()) +
                ") != f0 frames (" + std::to_string(f0_emb->value.cols()) + ")");
    nn::NodePtr h = pre(nn::ConcatRows(z, f0_emb));
    h = nn::AddColVec(h, cond(g));
    for (const auto& s : stages) {
      h = s.up(nn::LeakyRelu(h));
      nn::NodePtr r = s.res1b(nn::LeakyRelu(s.res1a(nn::LeakyRelu(h))));
      h = nn::Add(h, r);
    }
    return nn::Tanh(post(nn::LeakyRelu(h)));
  }
};

struct DiscriminatorOutput {
  nn::NodePtr score;
  std::vector<nn::NodePtr> fmaps;
};

// 3 multi-period sub-discriminators (periods 2/3/5, phase-as-channel
// reshape) plus 1 multi-scale sub-discriminator on the raw waveform.
struct DiscriminatorSet {
  struct Sub {
    std::vector<nn::Conv1dLayer> convs;
    nn::Conv1dLayer post;
    int period = 0;  // 0 = multi-scale
  };
  std::vector<Sub> subs;
  int min_len = 1;

  DiscriminatorSet(nn::ParamMap& p, const ModelConfig& cfg, Rng rng) {
    int c = cfg.disc_channels;
    for (size_t pi = 0; pi < cfg.mpd_periods.size(); ++pi) {
      int period = cfg.mpd_periods[pi];
      Sub s;
      s.period = period;
      std::string prefix = "disc.period" + std::to_string(period);
      s.convs.emplace_back(p, prefix + ".conv0", period, c, 5, rng, 3);
      s.convs.emplace_back(p, prefix + ".conv1", c, 2 * c, 5, rng, 3);
      s.convs.emplace_back(p, prefix + ".conv2", 2 * c, 2 * c, 5, rng, 3);
      s.post = nn::Conv1dLayer(p, prefix + ".post", 2 * c, 1, 3, rng);
      subs.push_back(std::move(s));
      min_len = std::max(min_len, period);
    }
    Sub msd;
    msd.period = 0;
    msd.convs.emplace_back(p, "disc.scale.conv0", 1, c, 15, rng, 1);
    msd.convs.emplace_back(p, "disc.scale.conv1", c, 2 * c, 15, rng, 4);
    msd.convs.emplace_back(p, "disc.scale.conv2", 2 * c, 2 * c, 15, rng, 4);
    msd.post = nn::Conv1dLayer(p, "disc.scale.post", 2 * c, 1, 3, rng);
    subs.push_back(std::move(msd));
  }

  std::vector<DiscriminatorOutput> Forward(const nn::NodePtr& wave) const {
    if (wave->value.rows() != 1) ThrowData("discriminate: expected a 1 x N waveform");
    if (wave->value.cols() < min_len) ThrowData("discriminate: input too short");
    std::vector<DiscriminatorOutput> outs;
    for (const auto& s : subs) {
      nn::NodePtr h = s.period > 0 ? nn::Frames(wave, s.period, s.period) : wave;
      DiscriminatorOutput out;
      for (const auto& conv : s.convs) {
        h = nn::LeakyRelu(conv(h));
        out.fmaps.push_back(h);
      }
      out.score = s.post(h);
      outs.push_back(std::move(out));
    }
    return outs;
  }
};

// ------------------------------- ComponentSet ------------------------------

inline const std::vector<std::string>& ComponentNames() {
  static const std::vector<std::string> names = {
      "posterior", "text_encoder", "content_encoder", "bottleneck", "flow",
      "f0_encoder", "speaker",     "generator",       "disc"};
  return names;
}

// All trainable components plus the shared parameter namespace. The TTS and
// AC paths are views over one instance set: posterior, flow, generator,
// speaker and F0 encoders exist exactly once.
struct ComponentSet {
  ModelConfig cfg;
  nn::ParamMap params;
  std::map<std::string, bool> freeze;

  std::shared_ptr<PosteriorEncoder> posterior;
  std::shared_ptr<TextEncoder> text_encoder;
  std::shared_ptr<ContentEncoder> content_encoder;
  std::shared_ptr<BottleneckExtractor> bottleneck;
  std::shared_ptr<Flow> flow;
  std::shared_ptr<F0Encoder> f0_encoder;
  std::shared_ptr<SpeakerEncoder> speaker;
  std::shared_ptr<Generator> generator;
  std::shared_ptr<DiscriminatorSet> disc;

  static ComponentSet Build(const ModelConfig& cfg, uint64_t seed) {
    cfg.Validate();
    ComponentSet set;
    set.cfg = cfg;
    auto rng_for = [seed](const std::string& name) { return DeriveRng(seed, "init." + name); };
    set.posterior = std::make_shared<PosteriorEncoder>(set.params, cfg, rng_for("posterior"));
    set.text_encoder = std::make_shared<TextEncoder>(set.params, cfg, rng_for("text_encoder"));
    set.content_encoder =
        std::make_shared<ContentEncoder>(set.params, cfg, rng_for("content_encoder"));
    set.bottleneck = std::make_shared<BottleneckExtractor>(set.params, cfg, rng_for("bottleneck"));
    set.flow = std::make_shared<Flow>(set.params, cfg, rng_for("flow"));
    set.f0_encoder = std::make_shared<F0Encoder>(set.params, cfg, rng_for("f0_encoder"));
    set.speaker = std::make_shared<SpeakerEncoder>(set.params, cfg, rng_for("speaker"));
    set.generator = std::make_shared<Generator>(set.params, cfg, rng_for("generator"));
    set.disc = std::make_shared<DiscriminatorSet>(set.params, cfg, rng_for("disc"));
    for (const auto& name : ComponentNames()) set.freeze[name] = false;
    return set;
  }

  static std::string ComponentOf(const std::string& param_name) {
    auto dot = param_name.find('.');
    return dot == std::string::npos ? param_name : param_name.substr(0, dot);
  }

  bool IsFrozen(const std::string& component) const {
    auto it = freeze.find(component);
    if (it == freeze.end()) ThrowInternal("unknown component: " + component);
    return it->second;
  }

  void SetFrozen(const std::string& component, bool frozen) {
    if (!freeze.count(component)) ThrowInternal("unknown component: " + component);
    freeze[component] = frozen;
  }

  // Generator-side trainable parameters: everything unfrozen except the
  // discriminators.
  std::map<std::string, nn::NodePtr> GeneratorSideParams() const {
    std::map<std::string, nn::NodePtr> out;
    for (const auto& [name, p] : params) {
      std::string comp = ComponentOf(name);
      if (comp == "disc") continue;
      if (IsFrozen(comp)) continue;
      out[name] = p;
    }
    return out;
  }

  std::map<std::string, nn::NodePtr> DiscriminatorParams() const {
    std::map<std::string, nn::NodePtr> out;
    for (const auto& [name, p] : params)
      if (ComponentOf(name) == "disc" && !IsFrozen("disc")) out[name] = p;
    return out;
  }

  // ---- spec-level forward operations ----

  std::pair<GaussianNode, nn::NodePtr> PosteriorEncode(const Mat& linear_spec,
                                                       const nn::NodePtr& g, Rng& rng,
                                                       double noise_scale) const {
    if (linear_spec.rows() != cfg.f_lin)
      ThrowData("posterior_encode: expected " + std::to_string(cfg.f_lin) +
                " linear bins, got " + std::to_string(linear_spec.rows()));
    if (linear_spec.cols() < 1) ThrowData("posterior_encode: empty input");
    GaussianNode q = posterior->Forward(linear_spec, g);
    return {q, q.SampleNode(rng, noise_scale)};
  }

  GaussianNode TextPriorEncode(const std::vector<int>& phoneme_ids) const {
    return text_encoder->Forward(phoneme_ids);
  }

  nn::NodePtr ContentEncode(const Mat& mel) const { return content_encoder->Forward(mel); }

  GaussianNode BottleneckExtract(const nn::NodePtr& bnf) const {
    return bottleneck->Forward(bnf);
  }

  nn::NodePtr FlowForward(const nn::NodePtr& z, const nn::NodePtr& g) const {
    return flow->Forward(z, g);
  }

  nn::NodePtr FlowInverse(const nn::NodePtr& z, const nn::NodePtr& g) const {
    return flow->Inverse(z, g);
  }

  nn::NodePtr F0Encode(const Vec& f0) const { return f0_encoder->Forward(f0); }

  nn::NodePtr SpeakerEmbed(int speaker_index) const { return speaker->FromIndex(speaker_index); }

  nn::NodePtr SpeakerEmbedFromMel(const Mat& mel) const { return speaker->FromMel(mel); }

  nn::NodePtr GenerateWaveform(const nn::NodePtr& z, const nn::NodePtr& g,
                               const nn::NodePtr& f0_emb) const {
    return generator->Forward(z, g, f0_emb);
  }

  std::vector<DiscriminatorOutput> Discriminate(const nn::NodePtr& wave) const {
    return disc->Forward(wave);
  }
};

// Path views: both reference the same underlying instances, which is the
// sharing contract between the TTS and AC sides.
struct TtsPath {
  std::shared_ptr<TextEncoder> prior_encoder;
  std::shared_ptr<PosteriorEncoder> posterior;
  std::shared_ptr<Flow> flow;
  std::shared_ptr<SpeakerEncoder> speaker;
  std::shared_ptr<F0Encoder> f0_encoder;
  std::shared_ptr<Generator> generator;

  explicit TtsPath(const ComponentSet& s)
      : prior_encoder(s.text_encoder), posterior(s.posterior), flow(s.flow), speaker(s.speaker),
        f0_encoder(s.f0_encoder), generator(s.generator) {}
};

struct AcPath {
  std::shared_ptr<ContentEncoder> content_encoder;
  std::shared_ptr<BottleneckExtractor> bottleneck;
  std::shared_ptr<PosteriorEncoder> posterior;
  std::shared_ptr<Flow> flow;
  std::shared_ptr<SpeakerEncoder> speaker;
  std::shared_ptr<F0Encoder> f0_encoder;
  std::shared_ptr<Generator> generator;

  explicit AcPath(const ComponentSet& s)
      : content_encoder(s.content_encoder), bottleneck(s.bottleneck), posterior(s.posterior),
        flow(s.flow), speaker(s.speaker), f0_encoder(s.f0_encoder), generator(s.generator) {}
};

}  // namespace accentforge
