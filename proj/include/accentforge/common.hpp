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

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace accentforge {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Error categories map one-to-one onto the CLI's machine-parsable failure
// lines and exit codes (usage -> 2, everything else -> 1).
enum class ErrorCategory { kUsage, kConfig, kIo, kData, kTrain, kInternal };

inline const char* ErrorCategoryName(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kData: return "data";
    case ErrorCategory::kTrain: return "train";
    case ErrorCategory::kInternal: return "internal";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void ThrowUsage(const std::string& m) { throw Error(ErrorCategory::kUsage, m); }
[[noreturn]] inline void ThrowConfig(const std::string& m) { throw Error(ErrorCategory::kConfig, m); }
[[noreturn]] inline void ThrowIo(const std::string& m) { throw Error(ErrorCategory::kIo, m); }
[[noreturn]] inline void ThrowData(const std::string& m) { throw Error(ErrorCategory::kData, m); }
[[noreturn]] inline void ThrowTrain(const std::string& m) { throw Error(ErrorCategory::kTrain, m); }
[[noreturn]] inline void ThrowInternal(const std::string& m) { throw Error(ErrorCategory::kInternal, m); }

inline std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream stream(s);
  while (std::getline(stream, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.push_back("");
  if (s.empty()) out.push_back("");
  return out;
}

inline std::string Trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string ToLower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::vector<std::string> SplitWords(const std::string& s) {
  std::vector<std::string> out;
  std::string w;
  std::istringstream stream(s);
  while (stream >> w) out.push_back(w);
  return out;
}

inline std::string Join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// 64-bit FNV-1a; used for config hashing and seed derivation.
inline uint64_t Fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t Fnv1a64(const std::string& s) { return Fnv1a64(s.data(), s.size()); }

// CRC-32 (IEEE 802.3) over a byte buffer; checkpoint integrity checks.
inline uint32_t Crc32(const void* data, size_t n, uint32_t crc = 0) {
  static const auto table = [] {
    std::vector<uint32_t> t(256);
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc = ~crc;
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) crc = table[(crc ^ p[i]) & 0xffu] ^ (crc >> 8);
  return ~crc;
}

inline std::string HexU64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

inline std::string FormatFixed(double v, int decimals) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  os << v;
  return os.str();
}

inline std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open file for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot open file for writing: " + path);
  out << content;
  if (!out) ThrowIo("write failed: " + path);
}

inline bool AllFinite(const Mat& m) { return m.allFinite(); }

// Levenshtein distance over characters; config typo suggestions.
inline int EditDistance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace accentforge
