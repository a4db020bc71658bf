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

#include "accentforge/common.hpp"
#include "accentforge/components.hpp"
#include "accentforge/engine.hpp"
#include "accentforge/pitch.hpp"
#include "accentforge/stft.hpp"
#include "accentforge/synthesis.hpp"

namespace accentforge {

enum class ConfigValueType { kInt, kDouble, kBool, kString };
enum class ConfigProvenance { kDefault, kFile, kFlag };

inline const char* ProvenanceName(ConfigProvenance p) {
  switch (p) {
    case ConfigProvenance::kDefault: return "default";
    case ConfigProvenance::kFile: return "file";
    case ConfigProvenance::kFlag: return "flag";
  }
  return "default";
}

struct ConfigKeySpec {
  const char* name;
  ConfigValueType type;
  const char* default_value;
  const char* help;
};

// Every known key with its type and default. Unknown keys are rejected.
inline const std::vector<ConfigKeySpec>& ConfigRegistry() {
  static const std::vector<ConfigKeySpec> keys = {
      {"run.seed", ConfigValueType::kInt, "1234", "root seed; all randomness derives from it"},
      {"run.dir", ConfigValueType::kString, "", "run directory; empty = runs/<stamp>-<hash>"},
      {"data.manifest", ConfigValueType::kString, "", "utterance manifest path"},
      {"data.lexicon", ConfigValueType::kString, "", "phoneme lexicon path"},
      {"data.pairs", ConfigValueType::kString, "", "ground-truth pair manifest path"},
      {"model.latent_dim", ConfigValueType::kInt, "192", "latent dimension (even)"},
      {"model.hidden", ConfigValueType::kInt, "192", "hidden channels"},
      {"model.d_bnf", ConfigValueType::kInt, "256", "content representation dimension"},
      {"model.d_f0", ConfigValueType::kInt, "64", "F0 embedding dimension"},
      {"model.d_spk", ConfigValueType::kInt, "256", "speaker embedding dimension"},
      {"model.flow_layers", ConfigValueType::kInt, "4", "coupling layers in the flow"},
      {"model.f0_bins", ConfigValueType::kInt, "256", "log-spaced F0 bins (plus unvoiced)"},
      {"model.gen_channels", ConfigValueType::kInt, "128", "generator base channels"},
      {"model.disc_channels", ConfigValueType::kInt, "16", "discriminator base channels"},
      {"stft.win_length", ConfigValueType::kInt, "1024", "analysis window length"},
      {"stft.hop", ConfigValueType::kInt, "320", "hop size == generator upsample factor"},
      {"stft.n_mels", ConfigValueType::kInt, "80", "mel bins"},
      {"stft.log_floor", ConfigValueType::kDouble, "1e-5", "mel log floor"},
      {"stft.fmin", ConfigValueType::kDouble, "0", "mel filterbank low edge (Hz)"},
      {"stft.fmax", ConfigValueType::kDouble, "8000", "mel filterbank high edge (Hz)"},
      {"pitch.f0_min", ConfigValueType::kDouble, "60", "pitch search floor (Hz)"},
      {"pitch.f0_max", ConfigValueType::kDouble, "400", "pitch search ceiling (Hz)"},
      {"pitch.voicing_threshold", ConfigValueType::kDouble, "0.3", "NACF voicing threshold"},
      {"train.stage", ConfigValueType::kInt, "1", "training stage (1 or 2)"},
      {"train.steps", ConfigValueType::kInt, "500", "optimizer steps"},
      {"train.batch_size", ConfigValueType::kInt, "4", "utterances per step"},
      {"train.lr_g", ConfigValueType::kDouble, "2e-4", "generator-side learning rate"},
      {"train.lr_d", ConfigValueType::kDouble, "2e-4", "discriminator learning rate"},
      {"train.lr_decay", ConfigValueType::kDouble, "0.999875", "per-step exponential decay"},
      {"train.adam_beta1", ConfigValueType::kDouble, "0.8", "Adam beta1"},
      {"train.adam_beta2", ConfigValueType::kDouble, "0.99", "Adam beta2"},
      {"train.crop_frames", ConfigValueType::kInt, "32", "decode crop length in frames"},
      {"train.checkpoint_interval", ConfigValueType::kInt, "0", "periodic checkpoints; 0 = final only"},
      {"train.weight_mel", ConfigValueType::kDouble, "45", "mel reconstruction weight"},
      {"train.weight_kl", ConfigValueType::kDouble, "1", "KL weight"},
      {"train.weight_adv", ConfigValueType::kDouble, "1", "adversarial weight"},
      {"train.weight_fm", ConfigValueType::kDouble, "2", "feature matching weight"},
      {"train.weight_distill", ConfigValueType::kDouble, "10", "distillation weight"},
      {"train.stage2_kl_text", ConfigValueType::kBool, "true", "keep text KL during fine-tuning"},
      {"train.stage2_update_disc", ConfigValueType::kBool, "true", "update discriminators in stage 2"},
      {"train.posterior_noise", ConfigValueType::kDouble, "1.0", "posterior sampling noise in training"},
      {"train.e2e_noise", ConfigValueType::kDouble, "1.0", "prior sampling noise for the e2e decode"},
      {"train.e2e_prior", ConfigValueType::kString, "alternate", "e2e prior: text|audio|alternate"},
      {"train.allow_config_mismatch", ConfigValueType::kBool, "false",
       "permit loading checkpoints whose config hash differs"},
      {"synth.posterior_noise", ConfigValueType::kDouble, "0", "posterior sampling noise at generation time"},
      {"synth.prior_noise", ConfigValueType::kDouble, "0", "prior sampling noise; 0.667 = quality mode"},
      {"eval.references", ConfigValueType::kString, "", "reference manifest for evaluation"},
      {"eval.systems", ConfigValueType::kString, "", "comma list of name=manifest system outputs"},
      {"eval.asr", ConfigValueType::kString, "identity", "identity or an external command"},
      {"eval.embedder", ConfigValueType::kString, "model", "model or melstats"},
      {"eval.classifier_hidden", ConfigValueType::kInt, "16", "accent classifier hidden units"},
      {"eval.classifier_epochs", ConfigValueType::kInt, "300", "accent classifier training epochs"},
      {"toy.native_utts", ConfigValueType::kInt, "20", "toy corpus native utterance count"},
      {"toy.nonnative_utts", ConfigValueType::kInt, "10", "toy corpus non-native utterance count"},
  };
  return keys;
}

inline const ConfigKeySpec* FindConfigKey(const std::string& name) {
  for (const auto& k : ConfigRegistry())
    if (name == k.name) return &k;
  return nullptr;
}

inline std::string NearestConfigKey(const std::string& name) {
  int best = 1 << 30;
  std::string best_key;
  for (const auto& k : ConfigRegistry()) {
    int d = EditDistance(name, k.name);
    if (d < best) {
      best = d;
      best_key = k.name;
    }
  }
  return best_key;
}

// Layered configuration: defaults < files < flag overrides, provenance per
// key, hash independent of declaration order.
class RunConfig {
 public:
  RunConfig() {
    for (const auto& k : ConfigRegistry()) {
      values_[k.name] = k.default_value;
      prov_[k.name] = ConfigProvenance::kDefault;
    }
  }

  static RunConfig Load(const std::vector<std::string>& files,
                        const std::vector<std::string>& overrides) {
    RunConfig cfg;
    for (const auto& f : files) cfg.ApplyFile(f);
    for (const auto& o : overrides) cfg.ApplyOverride(o);
    return cfg;
  }

  void Set(const std::string& key, const std::string& value, ConfigProvenance prov) {
    const ConfigKeySpec* spec = FindConfigKey(key);
    if (!spec)
      ThrowConfig("unknown config key '" + key + "' (did you mean '" + NearestConfigKey(key) +
                  "'?)");
    CheckType(*spec, value);
    values_[key] = value;
    prov_[key] = prov;
  }

  void ApplyFile(const std::string& path) {
    int line_no = 0;
    for (const auto& raw : Split(ReadTextFile(path), '\n')) {
      ++line_no;
      std::string line = Trim(raw);
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        ThrowConfig("config " + path + " line " + std::to_string(line_no) +
                    ": expected key = value");
      Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)), ConfigProvenance::kFile);
    }
  }

  void ApplyOverride(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
      ThrowUsage("override '" + assignment + "' is not of the form key=value");
    Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)), ConfigProvenance::kFlag);
  }

  int64_t GetInt(const std::string& key) const {
    const std::string& v = Raw(key);
    try {
      size_t pos = 0;
      int64_t out = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      ThrowConfig("config key '" + key + "': '" + v + "' is not an integer");
    }
  }

  double GetDouble(const std::string& key) const {
    const std::string& v = Raw(key);
    try {
      size_t pos = 0;
      double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      ThrowConfig("config key '" + key + "': '" + v + "' is not a number");
    }
  }

  bool GetBool(const std::string& key) const {
    std::string v = ToLower(Raw(key));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    ThrowConfig("config key '" + key + "': '" + v + "' is not a boolean");
  }

  std::string GetString(const std::string& key) const { return Raw(key); }

  ConfigProvenance Provenance(const std::string& key) const {
    auto it = prov_.find(key);
    if (it == prov_.end()) ThrowConfig("unknown config key '" + key + "'");
    return it->second;
  }

  // Canonical text: sorted "key = value" lines; basis of the config hash.
  std::string CanonicalText() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  uint64_t Hash() const { return Fnv1a64(CanonicalText()); }

  std::string ResolvedTextWithProvenance() const {
    std::string out;
    for (const auto& [k, v] : values_)
      out += k + " = " + v + "    # " + ProvenanceName(prov_.at(k)) + "\n";
    return out;
  }

 private:
  const std::string& Raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) ThrowConfig("unknown config key '" + key + "'");
    return it->second;
  }

  static void CheckType(const ConfigKeySpec& spec, const std::string& value) {
    switch (spec.type) {
      case ConfigValueType::kInt: {
        try {
          size_t pos = 0;
          (void)std::stoll(value, &pos);
          if (pos != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
          ThrowConfig("config key '" + std::string(spec.name) + "' expects an integer, got '" +
                      value + "'");
        }
        break;
      }
      case ConfigValueType::kDouble: {
        try {
          size_t pos = 0;
          (void)std::stod(value, &pos);
          if (pos != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
          ThrowConfig("config key '" + std::string(spec.name) + "' expects a number, got '" +
                      value + "'");
        }
        break;
      }
      case ConfigValueType::kBool: {
        std::string v = ToLower(value);
        if (v != "true" && v != "false" && v != "0" && v != "1" && v != "yes" && v != "no")
          ThrowConfig("config key '" + std::string(spec.name) + "' expects a boolean, got '" +
                      value + "'");
        break;
      }
      case ConfigValueType::kString:
        break;
    }
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, ConfigProvenance> prov_;
};

// ---- typed views over the resolved configuration ----

inline StftConfig StftConfigFrom(const RunConfig& cfg) {
  StftConfig s;
  s.win_length = static_cast<int>(cfg.GetInt("stft.win_length"));
  s.hop = static_cast<int>(cfg.GetInt("stft.hop"));
  s.n_mels = static_cast<int>(cfg.GetInt("stft.n_mels"));
  s.log_floor = cfg.GetDouble("stft.log_floor");
  s.mel_fmin = cfg.GetDouble("stft.fmin");
  s.mel_fmax = cfg.GetDouble("stft.fmax");
  return s;
}

inline PitchConfig PitchConfigFrom(const RunConfig& cfg) {
  PitchConfig p;
  p.f0_min = cfg.GetDouble("pitch.f0_min");
  p.f0_max = cfg.GetDouble("pitch.f0_max");
  p.voicing_threshold = cfg.GetDouble("pitch.voicing_threshold");
  return p;
}

inline ModelConfig ModelConfigFrom(const RunConfig& cfg, int vocab_size, int num_speakers) {
  ModelConfig m;
  m.latent_dim = static_cast<int>(cfg.GetInt("model.latent_dim"));
  m.hidden = static_cast<int>(cfg.GetInt("model.hidden"));
  m.d_bnf = static_cast<int>(cfg.GetInt("model.d_bnf"));
  m.d_f0 = static_cast<int>(cfg.GetInt("model.d_f0"));
  m.d_spk = static_cast<int>(cfg.GetInt("model.d_spk"));
  m.flow_layers = static_cast<int>(cfg.GetInt("model.flow_layers"));
  m.f0_bins = static_cast<int>(cfg.GetInt("model.f0_bins"));
  m.f0_min = cfg.GetDouble("pitch.f0_min");
  m.f0_max = cfg.GetDouble("pitch.f0_max");
  m.gen_channels = static_cast<int>(cfg.GetInt("model.gen_channels"));
  m.disc_channels = static_cast<int>(cfg.GetInt("model.disc_channels"));
  m.hop = static_cast<int>(cfg.GetInt("stft.hop"));
  m.f_lin = static_cast<int>(cfg.GetInt("stft.win_length")) / 2 + 1;
  m.f_mel = static_cast<int>(cfg.GetInt("stft.n_mels"));
  m.vocab_size = vocab_size;
  m.num_speakers = num_speakers;
  return m;
}

inline TrainConfig TrainConfigFrom(const RunConfig& cfg) {
  TrainConfig t;
  t.stage = static_cast<int>(cfg.GetInt("train.stage"));
  t.steps = static_cast<int>(cfg.GetInt("train.steps"));
  t.batch_size = static_cast<int>(cfg.GetInt("train.batch_size"));
  t.lr_g = cfg.GetDouble("train.lr_g");
  t.lr_d = cfg.GetDouble("train.lr_d");
  t.lr_decay = cfg.GetDouble("train.lr_decay");
  t.adam_beta1 = cfg.GetDouble("train.adam_beta1");
  t.adam_beta2 = cfg.GetDouble("train.adam_beta2");
  t.seed = static_cast<uint64_t>(cfg.GetInt("run.seed"));
  t.weights.mel = cfg.GetDouble("train.weight_mel");
  t.weights.kl = cfg.GetDouble("train.weight_kl");
  t.weights.adv = cfg.GetDouble("train.weight_adv");
  t.weights.fm = cfg.GetDouble("train.weight_fm");
  t.weights.distill = cfg.GetDouble("train.weight_distill");
  t.crop_frames = static_cast<int>(cfg.GetInt("train.crop_frames"));
  t.checkpoint_interval = static_cast<int>(cfg.GetInt("train.checkpoint_interval"));
  t.stage2_kl_text = cfg.GetBool("train.stage2_kl_text");
  t.stage2_update_disc = cfg.GetBool("train.stage2_update_disc");
  t.posterior_noise = cfg.GetDouble("train.posterior_noise");
  t.e2e_noise = cfg.GetDouble("train.e2e_noise");
  t.e2e_prior = cfg.GetString("train.e2e_prior");
  t.config_text = cfg.CanonicalText();
  t.config_hash = cfg.Hash();
  return t;
}

inline SynthesisOptions SynthesisOptionsFrom(const RunConfig& cfg) {
  SynthesisOptions o;
  o.posterior_noise = cfg.GetDouble("synth.posterior_noise");
  o.prior_noise = cfg.GetDouble("synth.prior_noise");
  o.seed = static_cast<uint64_t>(cfg.GetInt("run.seed"));
  return o;
}

}  // namespace accentforge
