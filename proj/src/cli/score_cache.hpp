// Copyright 2026 The twostepqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace twostepqa::cli {

// Text file, one entry per line after the header:
//
//   twostepqa-score-cache 1
//   <metric> <metric version> <key> <value>
//
// Keys are content hashes, so renaming an image keeps its scores and editing
// it invalidates them. Bumping a metric version orphans its old entries.
class ScoreCache {
 public:
  ScoreCache() = default;
  explicit ScoreCache(std::filesystem::path path);

  std::optional<double> find(const std::string& metric, int version,
                             const std::string& key) const;
  void put(const std::string& metric, int version, const std::string& key, double value);

  /// Rewrites the file with entries in sorted order. No-op without a path.
  void save() const;

  std::size_t size() const;

 private:
  std::filesystem::path path_;
  std::map<std::string, double> entries_;
  mutable std::mutex mutex_;
};

}  // namespace twostepqa::cli
