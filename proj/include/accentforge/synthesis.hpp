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
#include <string>
#include <vector>

#include <json.hpp>

#include "accentforge/components.hpp"
#include "accentforge/features.hpp"
#include "accentforge/manifest.hpp"
#include "accentforge/mas.hpp"
#include "accentforge/wav.hpp"

namespace accentforge {

struct SynthesisOptions {
  double posterior_noise = 0.0;  // posterior sampling; 0 keeps alignments reproducible
  double prior_noise = 0.0;      // prior sampling; 0.667 in quality mode, 0 in test mode
  uint64_t seed = 1234;
};

struct SynthesisInput {
  std::string id;
  std::vector<double> samples;
  FeatureBundle feats;
  std::vector<int> phoneme_ids;  // may be empty on the audio path
  int speaker_index = -1;        // -1 -> mel-projection fallback embedding
};

struct SynthesisResult {
  std::vector<double> waveform;
  AlignmentMatrix alignment;  // empty (0 tokens) on the audio path
  Vec f0_used;                // conditioning actually fed to the decoder
  Vec speaker_embedding_used;
  int frame_count = 0;
};

namespace detail {

inline nn::NodePtr SpeakerFor(const ComponentSet& set, const SynthesisInput& in) {
  return in.speaker_index >= 0 ? set.SpeakerEmbed(in.speaker_index)
                               : set.SpeakerEmbedFromMel(in.feats.mel_spec);
}

inline std::vector<double> RowToVector(const Mat& row) {
  std::vector<double> out(static_cast<size_t>(row.cols()));
  for (Eigen::Index i = 0; i < row.cols(); ++i) out[static_cast<size_t>(i)] = row(0, i);
  return out;
}

}  // namespace detail

// Synthetic ground-truth generation: sample the posterior of the non-native
// input, align its flowed latent to the text prior, upsample, sample the
// text prior, invert the flow, and decode with the source's own speaker
// embedding and F0 track. Output duration is exactly source frames x hop.
inline SynthesisResult GenerateGroundTruth(const ComponentSet& set, const SynthesisInput& in,
                                           const SynthesisOptions& opts) {
  if (in.phoneme_ids.empty())
    ThrowData("generate_ground_truth: source '" + in.id + "' has no transcript");
  int t_frames = in.feats.frame_count;
  int n_tokens = static_cast<int>(in.phoneme_ids.size());
  if (n_tokens > t_frames)
    ThrowData("generate_ground_truth: '" + in.id + "' is too short for its transcript (" +
              std::to_string(n_tokens) + " phonemes, " + std::to_string(t_frames) + " frames)");

  SynthesisResult res;
  res.frame_count = t_frames;
  nn::NodePtr g = detail::SpeakerFor(set, in);

  Rng rng_post = DeriveRng(opts.seed, "synth_posterior:" + in.id);
  auto [q, z] = set.PosteriorEncode(in.feats.linear_spec, g, rng_post, opts.posterior_noise);
  nn::NodePtr z_flow = set.FlowForward(z, g);

  GaussianNode text_g = set.TextPriorEncode(in.phoneme_ids);
  Mat loglik = BuildLogLikelihood(z_flow->value, text_g.Values());
  res.alignment = MasSearch(loglik);

  DiagonalGaussian upsampled = UpsampleText(text_g.Values(), res.alignment);
  Rng rng_prior = DeriveRng(opts.seed, "synth_prior:" + in.id);
  Mat z_prior = upsampled.Sample(rng_prior, opts.prior_noise);
  nn::NodePtr z_dec = set.FlowInverse(nn::Constant(z_prior), g);

  nn::NodePtr f0_emb = set.F0Encode(in.feats.f0);
  nn::NodePtr wave = set.GenerateWaveform(z_dec, g, f0_emb);
  res.waveform = detail::RowToVector(wave->value);
  res.f0_used = in.feats.f0;
  res.speaker_embedding_used = g->value.col(0);
  if (static_cast<int>(res.waveform.size()) != t_frames * in.feats.hop)
    ThrowInternal("generate_ground_truth: duration contract violated");
  return res;
}

// Accent conversion. With a transcript this is exactly the ground-truth
// procedure; without one the audio prior path (content encoder ->
// bottleneck extractor) supplies the latent.
inline SynthesisResult ConvertAccent(const ComponentSet& set, const SynthesisInput& in,
                                     bool use_transcript, const SynthesisOptions& opts) {
  if (use_transcript) {
    if (in.phoneme_ids.empty())
      ThrowData("convert: transcript requested but source '" + in.id + "' has none");
    return GenerateGroundTruth(set, in, opts);
  }
  SynthesisResult res;
  res.frame_count = in.feats.frame_count;
  res.alignment.num_tokens = 0;
  res.alignment.num_frames = in.feats.frame_count;

  nn::NodePtr g = detail::SpeakerFor(set, in);
  nn::NodePtr bnf = set.ContentEncode(in.feats.mel_spec);
  DiagonalGaussian p_audio = set.BottleneckExtract(bnf).Values();

  Rng rng_prior = DeriveRng(opts.seed, "convert_prior:" + in.id);
  Mat z_prior = p_audio.Sample(rng_prior, opts.prior_noise);
  nn::NodePtr z_dec = set.FlowInverse(nn::Constant(z_prior), g);

  nn::NodePtr f0_emb = set.F0Encode(in.feats.f0);
  nn::NodePtr wave = set.GenerateWaveform(z_dec, g, f0_emb);
  res.waveform = detail::RowToVector(wave->value);
  res.f0_used = in.feats.f0;
  res.speaker_embedding_used = g->value.col(0);
  if (static_cast<int>(res.waveform.size()) != res.frame_count * in.feats.hop)
    ThrowInternal("convert: duration contract violated");
  return res;
}

// ------------------------- pair manifests on disk ---------------------------

struct GroundTruthPairRecord {
  std::string source_id;
  std::string target_path;
  std::string alignment_path;
};

inline void SavePairManifest(const std::string& path,
                             const std::vector<GroundTruthPairRecord>& pairs) {
  std::string out;
  for (const auto& p : pairs)
    out += p.source_id + "|" + p.target_path + "|" + p.alignment_path + "\n";
  WriteTextFile(path, out);
}

inline std::vector<GroundTruthPairRecord> LoadPairManifest(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) ThrowIo("pair manifest not found: " + path);
  std::vector<GroundTruthPairRecord> pairs;
  fs::path base = fs::path(path).parent_path();
  int line_no = 0;
  for (const auto& line : Split(ReadTextFile(path), '\n')) {
    ++line_no;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = Split(t, '|');
    if (fields.size() != 3)
      ThrowData("pair manifest line " + std::to_string(line_no) +
                ": expected source_id|target_path|alignment_path");
    GroundTruthPairRecord p{Trim(fields[0]), Trim(fields[1]), Trim(fields[2])};
    if (!fs::path(p.target_path).is_absolute()) p.target_path = (base / p.target_path).string();
    if (!fs::path(p.alignment_path).is_absolute())
      p.alignment_path = (base / p.alignment_path).string();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

struct BatchGenerateReport {
  std::vector<GroundTruthPairRecord> pairs;
  std::vector<std::pair<std::string, std::string>> skips;  // id -> reason
  std::string pair_manifest_path;
  std::string skip_report_path;
};

// Runs ground-truth generation over a manifest, writing one target WAV and
// one alignment grid per record. Records whose transcript cannot fit the
// frame budget are skipped with a machine-readable report entry rather than
// failing the whole corpus job.
inline BatchGenerateReport BatchGeneratePairs(const ComponentSet& set,
                                              const std::vector<UtteranceRecord>& records,
                                              const std::vector<std::string>& speaker_registry,
                                              const StftConfig& stft, const F0Extractor& f0x,
                                              const std::string& out_dir,
                                              const SynthesisOptions& opts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) ThrowIo("cannot create output directory: " + out_dir);

  BatchGenerateReport report;
  for (const auto& rec : records) {
    if (rec.transcript.empty())
      ThrowData("synth-groundtruth: record '" + rec.id + "' has no transcript");
    SynthesisInput in;
    in.id = rec.id;
    Waveform wav = LoadAudio(rec.audio_path);
    in.samples = wav.samples;
    in.feats = ComputeFeatures(in.samples, wav.sample_rate, stft, f0x);
    in.phoneme_ids = rec.phoneme_ids;
    auto it = std::find(speaker_registry.begin(), speaker_registry.end(), rec.speaker_id);
    in.speaker_index =
        it == speaker_registry.end() ? -1 : static_cast<int>(it - speaker_registry.begin());

    if (static_cast<int>(in.phoneme_ids.size()) > in.feats.frame_count) {
      report.skips.emplace_back(rec.id, "transcript longer than frame budget (" +
                                            std::to_string(in.phoneme_ids.size()) + " phonemes, " +
                                            std::to_string(in.feats.frame_count) + " frames)");
      continue;
    }
    SynthesisResult res = GenerateGroundTruth(set, in, opts);
    std::string wav_path = (fs::path(out_dir) / (rec.id + ".gt.wav")).string();
    std::string align_path = (fs::path(out_dir) / (rec.id + ".align.txt")).string();
    WriteWav(wav_path, res.waveform);
    WriteTextFile(align_path, res.alignment.ToTextGrid());
    report.pairs.push_back({rec.id, wav_path, align_path});
  }

  report.pair_manifest_path = (fs::path(out_dir) / "pairs.txt").string();
  SavePairManifest(report.pair_manifest_path, report.pairs);
  report.skip_report_path = (fs::path(out_dir) / "skips.jsonl").string();
  std::string skips;
  for (const auto& [id, reason] : report.skips) {
    nlohmann::json j;
    j["id"] = id;
    j["reason"] = reason;
    skips += j.dump() + "\n";
  }
  WriteTextFile(report.skip_report_path, skips);
  return report;
}

}  // namespace accentforge
