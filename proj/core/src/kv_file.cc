// Copyright 2026 The splitpub Authors.
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

#include "splitpub/kv_file.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "splitpub/errors.h"

namespace splitpub {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string FormatReal(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double ParseReal(const std::string& text, const std::string& what) {
  const std::string t = Trim(text);
  if (t == "inf" || t == "+inf" || t == "infinity") return INFINITY;
  if (t == "-inf") return -INFINITY;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE ||
      std::isnan(v)) {
    throw ConfigError(what + ": '" + text + "' is not a real number");
  }
  return v;
}

std::uint64_t ParseCount(const std::string& text, const std::string& what) {
  const std::string t = Trim(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(what + ": '" + text + "' is not a non-negative integer");
  }
  return v;
}

std::vector<std::size_t> ParseSizeList(const std::string& text,
                                       const std::string& what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (Trim(item).empty()) continue;
    out.push_back(ParseCount(item, what));
  }
  return out;
}

std::pair<std::size_t, std::size_t> ParseSizeRange(const std::string& text,
                                                   const std::string& what) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const std::size_t v = ParseCount(text, what);
    return {v, v};
  }
  return {ParseCount(text.substr(0, dots), what),
          ParseCount(text.substr(dots + 2), what)};
}

KvFile KvFile::Parse(const std::string& text, const std::string& origin) {
  KvFile kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) +
                        ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    }
    if (kv.Has(key)) {
      throw ConfigError(origin + ":" + std::to_string(number) +
                        ": duplicate key '" + key + "'");
    }
    kv.Set(key, Trim(line.substr(eq + 1)));
  }
  return kv;
}

KvFile KvFile::Read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str(), path);
}

std::string KvFile::Serialize() const {
  std::string out;
  for (const std::string& k : order_) out += k + " = " + values_.at(k) + "\n";
  return out;
}

void KvFile::Write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << Serialize();
  if (!out) throw ConfigError("failed writing " + path);
}

bool KvFile::Has(const std::string& key) const { return values_.count(key) > 0; }

void KvFile::Set(const std::string& key, const std::string& value) {
  if (!Has(key)) order_.push_back(key);
  values_[key] = value;
}

void KvFile::SetDouble(const std::string& key, double value) {
  Set(key, FormatReal(value));
}

void KvFile::SetInt(const std::string& key, std::uint64_t value) {
  Set(key, std::to_string(value));
}

std::optional<std::string> KvFile::GetString(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KvFile::GetDouble(const std::string& key) const {
  auto s = GetString(key);
  if (!s) return std::nullopt;
  return ParseReal(*s, key);
}

std::optional<std::uint64_t> KvFile::GetInt(const std::string& key) const {
  auto s = GetString(key);
  if (!s) return std::nullopt;
  return ParseCount(*s, key);
}

std::optional<bool> KvFile::GetBool(const std::string& key) const {
  auto s = GetString(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  throw ConfigError(key + ": '" + *s + "' is not a boolean");
}

std::optional<std::vector<std::size_t>> KvFile::GetSizeList(
    const std::string& key) const {
  auto s = GetString(key);
  if (!s) return std::nullopt;
  return ParseSizeList(*s, key);
}

double KvFile::RequireDouble(const std::string& key) const {
  auto v = GetDouble(key);
  if (!v) throw ConfigError("missing key '" + key + "'");
  return *v;
}

}  // namespace splitpub
