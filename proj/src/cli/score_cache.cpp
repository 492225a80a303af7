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

#include "cli/score_cache.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twostepqa/error.hpp"

namespace twostepqa::cli {

namespace {

constexpr std::string_view kHeader = "twostepqa-score-cache 1";

std::string entry_key(const std::string& metric, int version, const std::string& key) {
  return metric + ' ' + std::to_string(version) + ' ' + key;
}

}  // namespace

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    // Unknown or older layout: start over rather than trust it.
    return;
  }
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string metric, key, value;
    int version = 0;
    if (!(fields >> metric >> version >> key >> value)) continue;
    double v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || std::isnan(v)) continue;
    entries_[entry_key(metric, version, key)] = v;
  }
}

std::optional<double> ScoreCache::find(const std::string& metric, int version,
                                       const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(entry_key(metric, version, key));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::put(const std::string& metric, int version, const std::string& key,
                     double value) {
  std::lock_guard lock(mutex_);
  entries_[entry_key(metric, version, key)] = value;
}

std::size_t ScoreCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void ScoreCache::save() const {
  if (path_.empty()) return;
  std::lock_guard lock(mutex_);
  const auto tmp = std::filesystem::path(path_.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot write score cache " + tmp.string());
    out << kHeader << '\n';
    char buf[64];
    for (const auto& [k, v] : entries_) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out << k << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
    if (!out) throw Error(Errc::io_failure, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path_);
}

}  // namespace twostepqa::cli
