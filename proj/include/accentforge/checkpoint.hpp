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

#include <cstring>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "accentforge/adam.hpp"
#include "accentforge/common.hpp"
#include "accentforge/components.hpp"

namespace accentforge {

constexpr uint32_t kCheckpointVersion = 1;
constexpr char kCheckpointMagic[5] = "AFCP";

// Single-file training state container: named parameter tensors, optimizer
// moments, freeze flags and provenance metadata, closed by a CRC-32 of the
// payload. All maps serialize in sorted order, so save -> load -> save is
// byte identical.
struct CheckpointBundle {
  uint32_t version = kCheckpointVersion;
  uint32_t stage = 0;
  uint64_t step = 0;
  uint64_t config_hash = 0;
  std::string config_text;  // canonical resolved config, one key per line
  std::vector<std::string> symbols;
  std::vector<std::string> speakers;
  std::map<std::string, bool> freeze;
  std::map<std::string, Mat> params;

  struct OptState {
    int64_t step_count = 0;
    std::map<std::string, std::pair<Mat, Mat>> slots;  // name -> (m, v)
  };
  bool has_opt = false;
  OptState opt_g, opt_d;
};

namespace detail {

struct ByteWriter {
  std::string buf;

  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void I64(int64_t v) { U64(static_cast<uint64_t>(v)); }
  void F64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    U64(bits);
  }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    buf += s;
  }
  void Matrix(const Mat& m) {
    U32(static_cast<uint32_t>(m.rows()));
    U32(static_cast<uint32_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) F64(m(r, c));
  }
};

struct ByteReader {
  const std::string& buf;
  size_t pos = 0;

  explicit ByteReader(const std::string& b) : buf(b) {}

  void Need(size_t n) const {
    if (pos + n > buf.size()) ThrowIo("checkpoint truncated or corrupt");
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  int64_t I64() { return static_cast<int64_t>(U64()); }
  double F64() {
    uint64_t bits = U64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string Str() {
    uint32_t n = U32();
    Need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  Mat Matrix() {
    uint32_t rows = U32();
    uint32_t cols = U32();
    Mat m(rows, cols);
    for (uint32_t c = 0; c < cols; ++c)
      for (uint32_t r = 0; r < rows; ++r) m(r, c) = F64();
    return m;
  }
};

inline void WriteOptState(ByteWriter& w, const CheckpointBundle::OptState& s) {
  w.I64(s.step_count);
  w.U32(static_cast<uint32_t>(s.slots.size()));
  for (const auto& [name, mv] : s.slots) {
    w.Str(name);
    w.Matrix(mv.first);
    w.Matrix(mv.second);
  }
}

inline CheckpointBundle::OptState ReadOptState(ByteReader& r) {
  CheckpointBundle::OptState s;
  s.step_count = r.I64();
  uint32_t n = r.U32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.Str();
    Mat m = r.Matrix();
    Mat v = r.Matrix();
    s.slots[name] = {std::move(m), std::move(v)};
  }
  return s;
}

}  // namespace detail

inline std::string SerializeCheckpoint(const CheckpointBundle& b) {
  detail::ByteWriter w;
  w.buf += kCheckpointMagic;
  w.U32(b.version);
  w.U32(b.stage);
  w.U64(b.step);
  w.U64(b.config_hash);
  w.Str(b.config_text);
  w.U32(static_cast<uint32_t>(b.symbols.size()));
  for (const auto& s : b.symbols) w.Str(s);
  w.U32(static_cast<uint32_t>(b.speakers.size()));
  for (const auto& s : b.speakers) w.Str(s);
  w.U32(static_cast<uint32_t>(b.freeze.size()));
  for (const auto& [name, flag] : b.freeze) {
    w.Str(name);
    w.buf.push_back(flag ? 1 : 0);
  }
  w.U32(static_cast<uint32_t>(b.params.size()));
  for (const auto& [name, m] : b.params) {
    w.Str(name);
    w.Matrix(m);
  }
  w.buf.push_back(b.has_opt ? 1 : 0);
  if (b.has_opt) {
    detail::WriteOptState(w, b.opt_g);
    detail::WriteOptState(w, b.opt_d);
  }
  uint32_t crc = Crc32(w.buf.data(), w.buf.size());
  w.U32(crc);
  return std::move(w.buf);
}

inline CheckpointBundle DeserializeCheckpoint(const std::string& bytes) {
  if (bytes.size() < 12) ThrowIo("checkpoint truncated or corrupt");
  uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i)
    stored_crc |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[bytes.size() - 4 + i]))
                  << (8 * i);
  uint32_t actual_crc = Crc32(bytes.data(), bytes.size() - 4);
  if (stored_crc != actual_crc) ThrowIo("checkpoint checksum mismatch (file corrupt or truncated)");

  std::string payload = bytes.substr(0, bytes.size() - 4);
  detail::ByteReader r(payload);
  r.Need(4);
  if (std::memcmp(payload.data(), kCheckpointMagic, 4) != 0)
    ThrowIo("not a checkpoint file (bad magic)");
  r.pos = 4;

  CheckpointBundle b;
  b.version = r.U32();
  if (b.version != kCheckpointVersion)
    ThrowIo("checkpoint version mismatch: file has " + std::to_string(b.version) + ", expected " +
            std::to_string(kCheckpointVersion));
  b.stage = r.U32();
  b.step = r.U64();
  b.config_hash = r.U64();
  b.config_text = r.Str();
  uint32_t n_sym = r.U32();
  for (uint32_t i = 0; i < n_sym; ++i) b.symbols.push_back(r.Str());
  uint32_t n_spk = r.U32();
  for (uint32_t i = 0; i < n_spk; ++i) b.speakers.push_back(r.Str());
  uint32_t n_freeze = r.U32();
  for (uint32_t i = 0; i < n_freeze; ++i) {
    std::string name = r.Str();
    r.Need(1);
    b.freeze[name] = payload[r.pos++] != 0;
  }
  uint32_t n_params = r.U32();
  for (uint32_t i = 0; i < n_params; ++i) {
    std::string name = r.Str();
    b.params[name] = r.Matrix();
  }
  r.Need(1);
  b.has_opt = payload[r.pos++] != 0;
  if (b.has_opt) {
    b.opt_g = detail::ReadOptState(r);
    b.opt_d = detail::ReadOptState(r);
  }
  return b;
}

inline void SaveCheckpoint(const CheckpointBundle& b, const std::string& path) {
  WriteTextFile(path, SerializeCheckpoint(b));
}

inline CheckpointBundle LoadCheckpoint(const std::string& path) {
  return DeserializeCheckpoint(ReadTextFile(path));
}

// ---- bridging to live components ----

inline void FillBundleFromComponents(CheckpointBundle& b, const ComponentSet& set) {
  b.freeze = set.freeze;
  b.params.clear();
  for (const auto& [name, p] : set.params) b.params[name] = p->value;
}

inline void FillOptState(CheckpointBundle::OptState& s, const nn::Adam& opt) {
  s.step_count = opt.step_count();
  s.slots.clear();
  for (const auto& [name, slot] : opt.slots()) s.slots[name] = {slot.m, slot.v};
}

// Copies tensors into an existing component set; shapes must match, which
// guards against loading a checkpoint built under different dimensions.
inline void ApplyBundleToComponents(const CheckpointBundle& b, ComponentSet& set) {
  for (const auto& [name, p] : set.params) {
    auto it = b.params.find(name);
    if (it == b.params.end()) ThrowIo("checkpoint missing parameter: " + name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      ThrowIo("checkpoint parameter shape mismatch for " + name + ": file has " +
              std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
              ", model wants " + std::to_string(p->value.rows()) + "x" +
              std::to_string(p->value.cols()));
    p->value = it->second;
    p->grad = Mat();
  }
  for (const auto& [name, flag] : b.freeze)
    if (set.freeze.count(name)) set.freeze[name] = flag;
}

inline void ApplyOptState(const CheckpointBundle::OptState& s, nn::Adam& opt) {
  opt.set_step_count(s.step_count);
  opt.slots().clear();
  for (const auto& [name, mv] : s.slots) opt.slots()[name] = {mv.first, mv.second};
}

// Compares two canonical config texts ("key = value" lines); returns the
// keys whose values differ or that exist on one side only.
inline std::vector<std::string> ConfigDiffKeys(const std::string& a, const std::string& b) {
  auto parse = [](const std::string& text) {
    std::map<std::string, std::string> kv;
    for (const auto& line : Split(text, '\n')) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      kv[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
    }
    return kv;
  };
  auto ka = parse(a);
  auto kb = parse(b);
  std::vector<std::string> diff;
  for (const auto& [k, v] : ka) {
    auto it = kb.find(k);
    if (it == kb.end() || it->second != v) diff.push_back(k);
  }
  for (const auto& [k, v] : kb)
    if (!ka.count(k)) diff.push_back(k);
  std::sort(diff.begin(), diff.end());
  diff.erase(std::unique(diff.begin(), diff.end()), diff.end());
  return diff;
}

}  // namespace accentforge
