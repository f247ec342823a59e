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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace splitpub {

// Flat "key = value" text: one entry per line, '#' starts a comment, blank
// lines ignored. Keys are unique; insertion order is preserved on write.
class KvFile {
 public:
  static KvFile Parse(const std::string& text, const std::string& origin = "");
  static KvFile Read(const std::string& path);
  void Write(const std::string& path) const;
  std::string Serialize() const;

  bool Has(const std::string& key) const;
  void Set(const std::string& key, const std::string& value);
  void SetDouble(const std::string& key, double value);
  void SetInt(const std::string& key, std::uint64_t value);

  // Typed getters throw ConfigError naming the key on a malformed value.
  std::optional<std::string> GetString(const std::string& key) const;
  std::optional<double> GetDouble(const std::string& key) const;
  std::optional<std::uint64_t> GetInt(const std::string& key) const;
  std::optional<bool> GetBool(const std::string& key) const;
  std::optional<std::vector<std::size_t>> GetSizeList(const std::string& key) const;

  // Throws ConfigError if the key is absent.
  double RequireDouble(const std::string& key) const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

// Shortest round-tripping decimal form of `v` ("inf" for infinity).
std::string FormatReal(double v);
double ParseReal(const std::string& text, const std::string& what);
std::uint64_t ParseCount(const std::string& text, const std::string& what);
// "16,32,64" -> {16, 32, 64}.
std::vector<std::size_t> ParseSizeList(const std::string& text,
                                       const std::string& what);
// "2..50" -> {2, 50}; a single number "8" -> {8, 8}.
std::pair<std::size_t, std::size_t> ParseSizeRange(const std::string& text,
                                                   const std::string& what);

}  // namespace splitpub
