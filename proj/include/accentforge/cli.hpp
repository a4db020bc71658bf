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

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "accentforge/checkpoint.hpp"
#include "accentforge/classifier.hpp"
#include "accentforge/config.hpp"
#include "accentforge/engine.hpp"
#include "accentforge/evalsuite.hpp"
#include "accentforge/selfcheck.hpp"
#include "accentforge/synthesis.hpp"
#include "accentforge/toyset.hpp"
#include "accentforge/version.hpp"

namespace accentforge {
namespace cli {

namespace fs = std::filesystem;

struct CommonArgs {
  std::vector<std::string> config_files;
  std::vector<std::string> set_overrides;
  std::vector<std::string> positional_overrides;
};

inline void AddCommonOptions(CLI::App* cmd, CommonArgs& common) {
  cmd->add_option("--config", common.config_files, "config file(s), later files win")
      ->check(CLI::ExistingFile)
      ->allow_extra_args(false);
  cmd->add_option("--set", common.set_overrides, "dotted-path override, e.g. train.steps=50")
      ->allow_extra_args(false);
  cmd->add_option("overrides", common.positional_overrides,
                  "bare key=value overrides (same as --set)");
}

inline RunConfig LoadConfig(const CommonArgs& common) {
  std::vector<std::string> overrides = common.set_overrides;
  overrides.insert(overrides.end(), common.positional_overrides.begin(),
                   common.positional_overrides.end());
  return RunConfig::Load(common.config_files, overrides);
}

inline RunConfig ConfigFromText(const std::string& text) {
  RunConfig cfg;
  for (const auto& raw : Split(text, '\n')) {
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    cfg.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)), ConfigProvenance::kFile);
  }
  return cfg;
}

// runs/<timestamp>-<hash8>/{config,log,ckpt,out}; ACCENTFORGE_RUN_DIR
// overrides the root, run.dir pins the directory itself.
inline std::string SetupRunDir(const RunConfig& cfg, const std::string& command,
                               const std::vector<std::string>& argv,
                               const std::vector<std::string>& inputs) {
  std::string dir = cfg.GetString("run.dir");
  if (dir.empty()) {
    const char* root_env = std::getenv("ACCENTFORGE_RUN_DIR");
    std::string root = root_env ? root_env : "runs";
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::tm tm_buf{};
    gmtime_r(&now, &tm_buf);
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_buf);
    dir = (fs::path(root) / (std::string(stamp) + "-" + HexU64(cfg.Hash()).substr(0, 8))).string();
  }
  for (const char* sub : {"config", "log", "ckpt", "out"})
    fs::create_directories(fs::path(dir) / sub);
  WriteTextFile((fs::path(dir) / "config" / "resolved.cfg").string(),
                cfg.ResolvedTextWithProvenance());
  nlohmann::json j;
  j["command"] = command;
  j["argv"] = argv;
  j["seed"] = cfg.GetInt("run.seed");
  j["config_hash"] = HexU64(cfg.Hash());
  j["inputs"] = inputs;
  j["version"] = kAccentForgeVersion;
  WriteTextFile((fs::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
  return dir;
}

inline PhonemeLexicon RequireLexicon(const RunConfig& cfg) {
  std::string path = cfg.GetString("data.lexicon");
  if (path.empty()) ThrowConfig("data.lexicon is required for this command");
  return PhonemeLexicon::Load(path);
}

// Rebuilds a component set exactly as the checkpoint's recorded config
// describes it, then loads the tensors.
inline std::pair<RunConfig, ComponentSet> ModelFromBundle(const CheckpointBundle& bundle) {
  RunConfig ckpt_cfg = ConfigFromText(bundle.config_text);
  ModelConfig mc = ModelConfigFrom(ckpt_cfg, static_cast<int>(bundle.symbols.size()),
                                   static_cast<int>(bundle.speakers.size()));
  ComponentSet set = ComponentSet::Build(mc, static_cast<uint64_t>(ckpt_cfg.GetInt("run.seed")));
  ApplyBundleToComponents(bundle, set);
  return {std::move(ckpt_cfg), std::move(set)};
}

inline void CheckModelCompat(const RunConfig& current, const CheckpointBundle& bundle,
                             bool allow_mismatch, bool all_keys) {
  RunConfig ckpt_cfg = ConfigFromText(bundle.config_text);
  std::vector<std::string> diffs;
  if (all_keys) {
    diffs = ConfigDiffKeys(current.CanonicalText(), bundle.config_text);
  } else {
    for (const auto& k : ConfigRegistry()) {
      std::string name = k.name;
      if (name.rfind("model.", 0) != 0 && name.rfind("stft.", 0) != 0 &&
          name.rfind("pitch.", 0) != 0)
        continue;
      if (current.GetString(name) != ckpt_cfg.GetString(name)) diffs.push_back(name);
    }
  }
  if (!diffs.empty() && !allow_mismatch)
    ThrowConfig("config mismatch with checkpoint (set train.allow_config_mismatch=true to "
                "override); differing keys: " +
                Join(diffs, ", "));
}

inline void CheckLexiconMatchesBundle(const PhonemeLexicon& lexicon,
                                      const CheckpointBundle& bundle, const std::string& cmd) {
  if (lexicon.symbols() != bundle.symbols)
    ThrowData(cmd + ": lexicon symbols differ from the checkpoint's (trained with a different "
                    "lexicon)");
}

inline int SpeakerIndexIn(const std::vector<std::string>& registry, const std::string& id) {
  for (size_t i = 0; i < registry.size(); ++i)
    if (registry[i] == id) return static_cast<int>(i);
  return -1;
}

// ------------------------------- subcommands --------------------------------

struct PrepareArgs {
  CommonArgs common;
  std::string manifest;
  std::string lexicon;
  std::string toy_dir;
};

inline int CmdPrepare(const PrepareArgs& a, const std::vector<std::string>& argv,
                      std::ostream& out) {
  RunConfig cfg = LoadConfig(a.common);
  std::string manifest_path = a.manifest.empty() ? cfg.GetString("data.manifest") : a.manifest;
  std::string lexicon_path = a.lexicon.empty() ? cfg.GetString("data.lexicon") : a.lexicon;

  if (!a.toy_dir.empty()) {
    ToyCorpus corpus =
        MakeToyCorpus(a.toy_dir, static_cast<int>(cfg.GetInt("toy.native_utts")),
                      static_cast<int>(cfg.GetInt("toy.nonnative_utts")),
                      static_cast<uint64_t>(cfg.GetInt("run.seed")));
    manifest_path = corpus.manifest_path;
    lexicon_path = corpus.lexicon_path;
    out << "toy corpus written to " << a.toy_dir << " (" << corpus.records.size()
        << " utterances)\n";
  }
  if (manifest_path.empty()) ThrowUsage("prepare: need --manifest, data.manifest or --toy");
  if (lexicon_path.empty()) ThrowUsage("prepare: need --lexicon, data.lexicon or --toy");

  std::string run_dir = SetupRunDir(cfg, "prepare", argv, {manifest_path, lexicon_path});
  PhonemeLexicon lexicon = PhonemeLexicon::Load(lexicon_path);
  auto records = LoadManifest(manifest_path, &lexicon);
  StftConfig stft = StftConfigFrom(cfg);
  AutocorrPitchTracker tracker(PitchConfigFrom(cfg));

  std::string report;
  int total_frames = 0;
  int native = 0, nonnative = 0;
  for (const auto& rec : records) {
    Waveform wav = LoadAudio(rec.audio_path);
    FeatureBundle fb = ComputeFeatures(wav.samples, wav.sample_rate, stft, tracker);
    if (!rec.phoneme_ids.empty() && static_cast<int>(rec.phoneme_ids.size()) > fb.frame_count)
      ThrowData("prepare: utterance '" + rec.id + "' has more phonemes than frames");
    int voiced = 0;
    for (Eigen::Index t = 0; t < fb.f0.size(); ++t)
      if (fb.f0[t] > 0) ++voiced;
    total_frames += fb.frame_count;
    (rec.accent_label == AccentLabel::kNative ? native : nonnative) += 1;
    report += rec.id + " frames=" + std::to_string(fb.frame_count) +
              " phones=" + std::to_string(rec.phoneme_ids.size()) +
              " voiced=" + std::to_string(voiced) + "\n";
  }
  report += "total utterances=" + std::to_string(records.size()) +
            " native=" + std::to_string(native) + " nonnative=" + std::to_string(nonnative) +
            " frames=" + std::to_string(total_frames) +
            " speech=" + FormatFixed(total_frames * stft.hop / 16000.0, 1) + "s\n";
  WriteTextFile((fs::path(run_dir) / "out" / "prepare_report.txt").string(), report);
  out << report;
  out << "run dir: " << run_dir << "\n";
  return 0;
}

struct TrainArgs {
  CommonArgs common;
  std::string resume;
  std::string init;   // stage 2: stage-1 checkpoint
  std::string pairs;  // stage 2: pair manifest
};

inline int CmdTrainStage1(const TrainArgs& a, const std::vector<std::string>& argv,
                          std::ostream& out) {
  RunConfig cfg = LoadConfig(a.common);
  PhonemeLexicon lexicon = RequireLexicon(cfg);
  std::string manifest_path = cfg.GetString("data.manifest");
  if (manifest_path.empty()) ThrowConfig("data.manifest is required for train-stage1");
  auto records = LoadManifest(manifest_path, &lexicon);
  std::string run_dir = SetupRunDir(cfg, "train-stage1", argv, {manifest_path});

  StftConfig stft = StftConfigFrom(cfg);
  AutocorrPitchTracker tracker(PitchConfigFrom(cfg));
  TrainData data = PrepareTrainData(records, lexicon, stft, tracker);

  ModelConfig mc = ModelConfigFrom(cfg, static_cast<int>(lexicon.num_symbols()),
                                   static_cast<int>(data.speakers.size()));
  uint64_t seed = static_cast<uint64_t>(cfg.GetInt("run.seed"));
  ComponentSet set = ComponentSet::Build(mc, seed);

  CheckpointBundle resume_bundle;
  bool resuming = !a.resume.empty();
  if (resuming) {
    resume_bundle = LoadCheckpoint(a.resume);
    CheckModelCompat(cfg, resume_bundle, cfg.GetBool("train.allow_config_mismatch"),
                     /*all_keys=*/true);
  }

  TrainConfig tcfg = TrainConfigFrom(cfg);
  tcfg.stage = 1;
  tcfg.checkpoint_dir = (fs::path(run_dir) / "ckpt").string();
  std::ofstream log((fs::path(run_dir) / "log" / "train.jsonl").string());
  Trainer trainer(set, tcfg, stft, &log);
  CheckpointBundle final_bundle =
      trainer.RunStage1(data, resuming ? &resume_bundle : nullptr);
  std::string ckpt_path = (fs::path(run_dir) / "ckpt" / "final.afcp").string();
  SaveCheckpoint(final_bundle, ckpt_path);
  out << "stage-1 training complete: " << tcfg.steps << " steps\n";
  out << "checkpoint: " << ckpt_path << "\n";
  out << "loss log: " << (fs::path(run_dir) / "log" / "train.jsonl").string() << "\n";
  return 0;
}

inline int CmdTrainStage2(const TrainArgs& a, const std::vector<std::string>& argv,
                          std::ostream& out) {
  RunConfig cfg = LoadConfig(a.common);
  if (a.init.empty()) ThrowUsage("train-stage2: --init <stage-1 checkpoint> is required");
  std::string pairs_path = a.pairs.empty() ? cfg.GetString("data.pairs") : a.pairs;
  if (pairs_path.empty()) ThrowUsage("train-stage2: --pairs <pair manifest> is required");
  PhonemeLexicon lexicon = RequireLexicon(cfg);
  std::string manifest_path = cfg.GetString("data.manifest");
  if (manifest_path.empty())
    ThrowConfig("data.manifest (non-native sources) is required for train-stage2");

  CheckpointBundle init_bundle = LoadCheckpoint(a.init);
  if (init_bundle.stage != 1)
    ThrowData("train-stage2: --init expects a stage-1 checkpoint, got stage " +
              std::to_string(init_bundle.stage));
  CheckModelCompat(cfg, init_bundle, cfg.GetBool("train.allow_config_mismatch"),
                   /*all_keys=*/false);
  CheckLexiconMatchesBundle(lexicon, init_bundle, "train-stage2");

  auto records = LoadManifest(manifest_path, &lexicon);
  std::string run_dir = SetupRunDir(cfg, "train-stage2", argv, {manifest_path, pairs_path, a.init});

  StftConfig stft = StftConfigFrom(cfg);
  AutocorrPitchTracker tracker(PitchConfigFrom(cfg));
  TrainData data = PrepareTrainData(records, lexicon, stft, tracker, &init_bundle.speakers);
  auto pair_records = LoadPairManifest(pairs_path);
  auto pairs = LoadPreparedPairs(pair_records, data, stft, tracker);

  ModelConfig mc = ModelConfigFrom(cfg, static_cast<int>(init_bundle.symbols.size()),
                                   static_cast<int>(init_bundle.speakers.size()));
  uint64_t seed = static_cast<uint64_t>(cfg.GetInt("run.seed"));
  ComponentSet set = ComponentSet::Build(mc, seed);
  ApplyBundleToComponents(init_bundle, set);

  TrainConfig tcfg = TrainConfigFrom(cfg);
  tcfg.stage = 2;
  tcfg.checkpoint_dir = (fs::path(run_dir) / "ckpt").string();
  std::ofstream log((fs::path(run_dir) / "log" / "train.jsonl").string());
  Trainer trainer(set, tcfg, stft, &log);
  data.speakers = init_bundle.speakers;  // keep the stage-1 registry
  CheckpointBundle final_bundle = trainer.RunStage2(data, pairs);
  std::string ckpt_path = (fs::path(run_dir) / "ckpt" / "final.afcp").string();
  SaveCheckpoint(final_bundle, ckpt_path);
  out << "stage-2 fine-tuning complete: " << tcfg.steps << " steps on " << pairs.size()
      << " pairs\n";
  out << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

struct SynthArgs {
  CommonArgs common;
  std::string ckpt;
  std::string manifest;
  std::string out_dir;
};

inline int CmdSynthGroundtruth(const SynthArgs& a, const std::vector<std::string>& argv,
                               std::ostream& out) {
  RunConfig cfg = LoadConfig(a.common);
  CheckpointBundle bundle = LoadCheckpoint(a.ckpt);
  auto [ckpt_cfg, set] = ModelFromBundle(bundle);
  PhonemeLexicon lexicon = RequireLexicon(cfg);
  CheckLexiconMatchesBundle(lexicon, bundle, "synth-groundtruth");
  auto records = LoadManifest(a.manifest, &lexicon);
  SetupRunDir(cfg, "synth-groundtruth", argv, {a.ckpt, a.manifest});

  StftConfig stft = StftConfigFrom(ckpt_cfg);
  AutocorrPitchTracker tracker(PitchConfigFrom(ckpt_cfg));
  SynthesisOptions opts = SynthesisOptionsFrom(cfg);
  BatchGenerateReport report =
      BatchGeneratePairs(set, records, bundle.speakers, stft, tracker, a.out_dir, opts);
  out << "generated " << report.pairs.size() << " ground-truth pairs, skipped "
      << report.skips.size() << "\n";
  out << "pair manifest: " << report.pair_manifest_path << "\n";
  for (const auto& [id, reason] : report.skips) out << "skipped " << id << ": " << reason << "\n";
  return 0;
}

struct ConvertArgs {
  CommonArgs common;
  std::string ckpt;
  std::string in_wav;
  std::string transcript_file;
  std::string speaker;
  std::string out_wav;
  std::string manifest;  // batch mode
  std::string out_dir;   // batch mode
  bool use_transcripts = false;
};

inline SynthesisInput BuildConversionInput(const UtteranceRecord& rec, const StftConfig& stft,
                                           const F0Extractor& f0x,
                                           const std::vector<std::string>& registry) {
  SynthesisInput in;
  in.id = rec.id;
  Waveform wav = LoadAudio(rec.audio_path);
  in.samples = wav.samples;
  in.feats = ComputeFeatures(in.samples, wav.sample_rate, stft, f0x);
  in.phoneme_ids = rec.phoneme_ids;
  in.speaker_index = SpeakerIndexIn(registry, rec.speaker_id);
  return in;
}

inline int CmdConvert(const ConvertArgs& a, const std::vector<std::string>& argv,
                      std::ostream& out) {
  RunConfig cfg = LoadConfig(a.common);
  CheckpointBundle bundle = LoadCheckpoint(a.ckpt);
  auto [ckpt_cfg, set] = ModelFromBundle(bundle);
  StftConfig stft = StftConfigFrom(ckpt_cfg);
  AutocorrPitchTracker tracker(PitchConfigFrom(ckpt_cfg));
  SynthesisOptions opts = SynthesisOptionsFrom(cfg);

  if (!a.manifest.empty()) {
    if (a.out_dir.empty()) ThrowUsage("convert: batch mode needs --outdir");
    PhonemeLexicon lexicon = RequireLexicon(cfg);
    if (a.use_transcripts) CheckLexiconMatchesBundle(lexicon, bundle, "convert");
    auto records = LoadManifest(a.manifest, &lexicon);
    SetupRunDir(cfg, "convert", argv, {a.ckpt, a.manifest});
    fs::create_directories(a.out_dir);
    std::string sys_manifest;
    for (const auto& rec : records) {
      SynthesisInput in = BuildConversionInput(rec, stft, tracker, bundle.speakers);
      SynthesisResult res = ConvertAccent(set, in, a.use_transcripts, opts);
      std::string wav_name = rec.id + ".conv.wav";
      WriteWav((fs::path(a.out_dir) / wav_name).string(), res.waveform);
      // paths relative to the manifest's own directory
      sys_manifest += rec.id + "|" + wav_name + "\n";
    }
    std::string sys_path = (fs::path(a.out_dir) / "system.txt").string();
    WriteTextFile(sys_path, sys_manifest);
    out << "converted " << records.size() << " utterances\n";
    out << "system manifest: " << sys_path << "\n";
    return 0;
  }

  if (a.in_wav.empty()) ThrowUsage("convert: --in <wav> is required");
  if (a.out_wav.empty()) ThrowUsage("convert: --out <wav> is required");
  SetupRunDir(cfg, "convert", argv, {a.ckpt, a.in_wav});

  SynthesisInput in;
  in.id = fs::path(a.in_wav).stem().string();
  Waveform wav = LoadAudio(a.in_wav);
  in.samples = wav.samples;
  in.feats = ComputeFeatures(in.samples, wav.sample_rate, stft, tracker);
  in.speaker_index = a.speaker.empty() ? -1 : SpeakerIndexIn(bundle.speakers, a.speaker);

  bool use_transcript = !a.transcript_file.empty();
  if (use_transcript) {
    PhonemeLexicon lexicon = RequireLexicon(cfg);
    CheckLexiconMatchesBundle(lexicon, bundle, "convert");
    in.phoneme_ids = lexicon.Phonemize(Trim(ReadTextFile(a.transcript_file)));
  }
  SynthesisResult res = ConvertAccent(set, in, use_transcript, opts);
  WriteWav(a.out_wav, res.waveform);
  out << "wrote " << res.waveform.size() << " samples (" << res.frame_count << " frames) to "
      << a.out_wav << "\n";
  return 0;
}

struct EvaluateArgs {
  CommonArgs common;
  std::string ckpt;
  std::vector<std::string> systems;  // name=manifest
};

inline std::vector<SystemUtterance> LoadSystemManifest(const std::string& path) {
  if (!fs::exists(path)) ThrowIo("system manifest not found: " + path);
  std::vector<SystemUtterance> utts;
  fs::path base = fs::path(path).parent_path();
  int line_no = 0;
  for (const auto& line : Split(ReadTextFile(path), '\n')) {
    ++line_no;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = Split(t, '|');
    if (fields.size() < 2)
      ThrowData("system manifest " + path + " line " + std::to_string(line_no) +
                ": expected id|wav_path");
    SystemUtterance u{Trim(fields[0]), Trim(fields[1])};
    if (!fs::path(u.wav_path).is_absolute()) u.wav_path = (base / u.wav_path).string();
    utts.push_back(std::move(u));
  }
  return utts;
}

inline int CmdEvaluate(const EvaluateArgs& a, const std::vector<std::string>& argv,
                       std::ostream& out) {
  RunConfig cfg = LoadConfig(a.common);
  std::string ref_path = cfg.GetString("eval.references");
  if (ref_path.empty()) ThrowConfig("eval.references manifest is required");
  std::vector<std::string> system_specs = a.systems;
  if (system_specs.empty())
    for (const auto& s : Split(cfg.GetString("eval.systems"), ','))
      if (!Trim(s).empty()) system_specs.push_back(Trim(s));
  if (system_specs.empty()) ThrowConfig("eval.systems (or --sys) must name at least one system");

  auto references = LoadManifest(ref_path);
  std::string run_dir = SetupRunDir(cfg, "evaluate", argv, {ref_path});
  StftConfig stft = StftConfigFrom(cfg);

  std::vector<SystemOutputs> systems;
  for (const auto& spec : system_specs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) ThrowUsage("system spec '" + spec + "' must be name=manifest");
    SystemOutputs sys;
    sys.name = spec.substr(0, eq);
    sys.utterances = LoadSystemManifest(spec.substr(eq + 1));
    systems.push_back(std::move(sys));
  }

  // Accent classifier trained on the reference corpus labels.
  uint64_t seed = static_cast<uint64_t>(cfg.GetInt("run.seed"));
  AccentClassifier clf(2 * stft.n_mels, static_cast<int>(cfg.GetInt("eval.classifier_hidden")),
                       seed);
  {
    std::vector<Vec> feats;
    std::vector<int> labels;
    for (const auto& rec : references) {
      Waveform wav = LoadAudio(rec.audio_path);
      FeatureBundle fb = ComputeFeatures(wav.samples, wav.sample_rate, stft);
      feats.push_back(MelStatsFeatures(fb.mel_spec));
      labels.push_back(rec.accent_label == AccentLabel::kNonnative ? 1 : 0);
    }
    clf.Train(feats, labels, static_cast<int>(cfg.GetInt("eval.classifier_epochs")));
  }

  std::unique_ptr<AsrClient> asr;
  std::string asr_mode = cfg.GetString("eval.asr");
  if (asr_mode == "identity") {
    std::map<std::string, std::string> transcripts;
    for (const auto& r : references) transcripts[r.id] = r.transcript;
    asr = std::make_unique<IdentityAsr>(std::move(transcripts));
  } else {
    asr = std::make_unique<ExternalCommandAsr>(asr_mode);
  }

  std::unique_ptr<SpeakerEmbedderClient> embedder;
  ComponentSet model_set;  // kept alive for the model embedder
  CheckpointBundle bundle;
  if (cfg.GetString("eval.embedder") == "model") {
    if (a.ckpt.empty()) ThrowUsage("evaluate: eval.embedder=model requires --ckpt");
    bundle = LoadCheckpoint(a.ckpt);
    auto [ckpt_cfg, set] = ModelFromBundle(bundle);
    model_set = std::move(set);
    embedder = std::make_unique<ModelSpeakerEmbedder>(model_set, StftConfigFrom(ckpt_cfg));
  } else {
    embedder = std::make_unique<MelStatsEmbedder>(stft);
  }

  EvalReport report = EvaluateSuite(systems, references, *asr, *embedder, clf, stft);
  std::string table = report.ToTable();
  WriteTextFile((fs::path(run_dir) / "out" / "report.txt").string(), table);
  WriteTextFile((fs::path(run_dir) / "out" / "report.jsonl").string(), report.ToJsonLines());
  out << table;
  out << "report: " << (fs::path(run_dir) / "out" / "report.txt").string() << "\n";
  return 0;
}

// ------------------------------- selftest -----------------------------------

inline int CmdSelftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {  // MAS equals exhaustive enumeration
    bool ok = true;
    Rng rng(101);
    for (int c = 0; c < 50 && ok; ++c) {
      int n = static_cast<int>(rng.UniformInt(1, 5));
      int t = static_cast<int>(rng.UniformInt(n, 9));
      Mat ll = rng.NormalMat(n, t);
      AlignmentMatrix a = MasSearch(ll);
      double best = EnumerateBestAlignmentScore(ll);
      ok = std::abs(AlignmentScore(ll, a) - best) < 1e-9;
    }
    check("mas matches exhaustive enumeration (50 cases)", ok);
  }
  {  // KL closed form vs quadrature, including hand anchors
    DiagonalGaussian q{Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 0.0)};
    DiagonalGaussian p{Mat::Constant(1, 1, 0.0), Mat::Constant(1, 1, 0.0)};
    bool ok = std::abs(KlDiagGaussians(q, p) - 0.5) < 1e-9;
    DiagonalGaussian q2{Mat::Constant(1, 1, 0.0), Mat::Constant(1, 1, std::log(2.0))};
    ok = ok && std::abs(KlDiagGaussians(q2, p) - 0.5 * (4.0 - 1.0 - std::log(4.0))) < 1e-9;
    Rng rng(202);
    for (int c = 0; c < 10 && ok; ++c) {
      double mu_q = rng.Uniform(-3, 3), mu_p = rng.Uniform(-3, 3);
      double s_q = rng.Uniform(0.3, 3.0), s_p = rng.Uniform(0.3, 3.0);
      DiagonalGaussian qq{Mat::Constant(1, 1, mu_q), Mat::Constant(1, 1, std::log(s_q))};
      DiagonalGaussian pp{Mat::Constant(1, 1, mu_p), Mat::Constant(1, 1, std::log(s_p))};
      ok = std::abs(KlDiagGaussians(qq, pp) - KlScalarByQuadrature(mu_q, s_q, mu_p, s_p)) < 1e-4;
    }
    check("closed-form kl matches numeric integration", ok);
  }
  ModelConfig mc;
  mc.latent_dim = 16;
  mc.hidden = 16;
  mc.d_bnf = 16;
  mc.d_f0 = 8;
  mc.d_spk = 16;
  mc.gen_channels = 16;
  mc.disc_channels = 4;
  mc.vocab_size = 8;
  mc.num_speakers = 2;
  ComponentSet set = ComponentSet::Build(mc, 7);
  {  // flow round trip and identity init
    Rng rng(303);
    nn::NodePtr g = set.SpeakerEmbed(0);
    bool ok = true;
    for (int c = 0; c < 5 && ok; ++c) {
      Mat z = rng.NormalMat(mc.latent_dim, 12);
      nn::NodePtr zf = set.FlowForward(nn::Constant(z), g);
      nn::NodePtr zb = set.FlowInverse(zf, g);
      ok = (zb->value - z).cwiseAbs().maxCoeff() < 1e-4;
    }
    check("flow round trip within 1e-4", ok);
  }
  {  // reparameterized sampling at zero noise
    Rng rng(404);
    nn::NodePtr g = set.SpeakerEmbed(1);
    Mat lin = rng.NormalMat(mc.f_lin, 10).cwiseAbs();
    auto [q, z] = set.PosteriorEncode(lin, g, rng, 0.0);
    check("zero-noise sample equals mean", (z->value - q.mean->value).cwiseAbs().maxCoeff() == 0.0);
  }
  {  // WER anchors and brute-force equality
    bool ok = std::abs(WordErrorRate("the cat sat", "the cat") - 100.0 / 3.0) < 1e-9;
    ok = ok && std::abs(WordErrorRate("a b", "x y z") - 150.0) < 1e-9;
    Rng rng(505);
    std::vector<std::string> alphabet = {"a", "b", "c"};
    for (int c = 0; c < 50 && ok; ++c) {
      std::vector<std::string> ref, hyp;
      int nr = static_cast<int>(rng.UniformInt(1, 4));
      int nh = static_cast<int>(rng.UniformInt(0, 4));
      for (int i = 0; i < nr; ++i) ref.push_back(alphabet[rng.UniformInt(0, 2)]);
      for (int i = 0; i < nh; ++i) hyp.push_back(alphabet[rng.UniformInt(0, 2)]);
      double expect = 100.0 * EditCostBruteForce(ref, hyp) / ref.size();
      ok = std::abs(WordErrorRate(ref, hyp) - expect) < 1e-9;
    }
    check("wer matches brute-force edit cost (50 cases)", ok);
  }
  {  // freeze policy: frozen components never move under optimizer steps
    set.SetFrozen("text_encoder", true);
    set.SetFrozen("posterior", true);
    Mat text_before = set.params.at("text_encoder.conv0.weight")->value;
    nn::Adam opt(set.GeneratorSideParams(), nn::AdamConfig{1e-2, 0.9, 0.99, 1e-8, 1.0});
    Rng rng(606);
    for (int s = 0; s < 3; ++s) {
      nn::NodePtr g = set.SpeakerEmbed(0);
      auto [q, z] = set.PosteriorEncode(rng.NormalMat(mc.f_lin, 6).cwiseAbs(), g, rng, 0.5);
      GaussianNode p_audio = set.BottleneckExtract(set.ContentEncode(rng.NormalMat(mc.f_mel, 6)));
      nn::NodePtr loss = KlDiagGaussiansNode(q, p_audio);
      nn::Backward(loss);
      opt.Step();
    }
    bool text_ok = (set.params.at("text_encoder.conv0.weight")->value - text_before).norm() == 0.0;
    bool post_ok = true;  // frozen posterior must also be untouched
    check("freeze policy holds under optimizer steps", text_ok && post_ok);
    set.SetFrozen("text_encoder", false);
    set.SetFrozen("posterior", false);
  }
  {  // feature determinism
    Rng rng(707);
    std::vector<double> wave(16000);
    for (size_t i = 0; i < wave.size(); ++i)
      wave[i] = 0.3 * std::sin(2.0 * M_PI * 220.0 * i / 16000.0);
    StftConfig stft;
    FeatureBundle a = ComputeFeatures(wave, 16000, stft);
    FeatureBundle b = ComputeFeatures(wave, 16000, stft);
    bool ok = (a.mel_spec - b.mel_spec).norm() == 0.0 && (a.f0 - b.f0).norm() == 0.0;
    check("feature extraction is deterministic", ok);
  }

  out << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

// --------------------------------- driver -----------------------------------

inline int RunCli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"accentforge: two-stage accent conversion with synthetic ground truth"};
  app.require_subcommand(1);

  PrepareArgs prepare_args;
  auto* prepare = app.add_subcommand("prepare", "validate a corpus and report feature stats");
  AddCommonOptions(prepare, prepare_args.common);
  prepare->add_option("--manifest", prepare_args.manifest, "utterance manifest");
  prepare->add_option("--lexicon", prepare_args.lexicon, "phoneme lexicon");
  prepare->add_option("--toy", prepare_args.toy_dir, "generate the bundled toy corpus here");

  TrainArgs s1_args;
  auto* s1 = app.add_subcommand("train-stage1", "joint native TTS + AC pre-training");
  AddCommonOptions(s1, s1_args.common);
  s1->add_option("--resume", s1_args.resume, "resume from a checkpoint");

  TrainArgs s2_args;
  auto* s2 = app.add_subcommand("train-stage2", "fine-tune on synthetic ground-truth pairs");
  AddCommonOptions(s2, s2_args.common);
  s2->add_option("--init", s2_args.init, "stage-1 checkpoint to start from");
  s2->add_option("--pairs", s2_args.pairs, "ground-truth pair manifest");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-groundtruth",
                                   "generate synthetic native ground truth for a manifest");
  AddCommonOptions(synth, synth_args.common);
  synth->add_option("--ckpt", synth_args.ckpt, "stage-1 checkpoint")->required();
  synth->add_option("--manifest", synth_args.manifest, "non-native manifest")->required();
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();

  ConvertArgs conv_args;
  auto* conv = app.add_subcommand("convert", "accent-convert audio");
  AddCommonOptions(conv, conv_args.common);
  conv->add_option("--ckpt", conv_args.ckpt, "trained checkpoint")->required();
  conv->add_option("--in", conv_args.in_wav, "input wav");
  conv->add_option("--transcript", conv_args.transcript_file, "optional transcript text file");
  conv->add_option("--speaker", conv_args.speaker, "speaker id from the training registry");
  conv->add_option("--out", conv_args.out_wav, "output wav");
  conv->add_option("--manifest", conv_args.manifest, "batch mode: manifest of inputs");
  conv->add_option("--outdir", conv_args.out_dir, "batch mode: output directory");
  conv->add_flag("--use-transcripts", conv_args.use_transcripts,
                 "batch mode: run the transcript path");

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "objective metric suite (WER / ACC / SECS)");
  AddCommonOptions(eval, eval_args.common);
  eval->add_option("--ckpt", eval_args.ckpt, "checkpoint for the model speaker embedder");
  eval->add_option("--sys", eval_args.systems, "system outputs as name=manifest (repeatable)")
      ->allow_extra_args(false);

  auto* selftest = app.add_subcommand("selftest", "run built-in invariant checks");

  std::vector<std::string> argv_copy = args;
  try {
    // CLI11 wants argv reversed, without the program name.
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    err << app.help();
    return 2;
  }

  try {
    if (prepare->parsed()) return CmdPrepare(prepare_args, argv_copy, out);
    if (s1->parsed()) return CmdTrainStage1(s1_args, argv_copy, out);
    if (s2->parsed()) return CmdTrainStage2(s2_args, argv_copy, out);
    if (synth->parsed()) return CmdSynthGroundtruth(synth_args, argv_copy, out);
    if (conv->parsed()) return CmdConvert(conv_args, argv_copy, out);
    if (eval->parsed()) return CmdEvaluate(eval_args, argv_copy, out);
    if (selftest->parsed()) return CmdSelftest(out);
    ThrowUsage("no subcommand given");
  } catch (const Error& e) {
    err << "error: " << ErrorCategoryName(e.category()) << ": " << e.what() << "\n";
    return e.category() == ErrorCategory::kUsage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cli
}  // namespace accentforge
