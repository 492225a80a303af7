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

#include "twostepqa/fusion_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twostepqa/error.hpp"

namespace twostepqa::fusion {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_number(const std::string& text, std::size_t line_no) {
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    throw Error(Errc::parse_error,
                "fusion config line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return v;
}

std::string base_name(const std::string& metric) {
  constexpr std::string_view kRef = "@ref";
  if (metric.size() > kRef.size() &&
      metric.compare(metric.size() - kRef.size(), kRef.size(), kRef) == 0) {
    return metric.substr(0, metric.size() - kRef.size());
  }
  return metric;
}

}  // namespace

FusionConfig FusionConfig::defaults() {
  FusionConfig cfg;
  cfg.ranges["ms_ssim"] = {1.0, 0.0};
  cfg.ranges["ssim"] = {1.0, 0.0};
  cfg.ranges["niqe"] = {0.0, 100.0};
  return cfg;
}

const MetricRange& FusionConfig::range(const std::string& metric) const {
  const auto it = ranges.find(base_name(metric));
  if (it == ranges.end()) {
    throw Error(Errc::invalid_argument,
                "no best/worst range configured for metric '" + base_name(metric) + "'");
  }
  return it->second;
}

Extremals FusionConfig::extremals(const Combination& combo) const {
  const auto& fr = range(combo.fr_metric);
  const auto& nr = range(combo.nr_metric);
  return {fr.best, fr.worst, nr.best, nr.worst};
}

FusionConfig parse_fusion_config(const std::string& text) {
  FusionConfig cfg = FusionConfig::defaults();
  std::map<std::string, std::pair<bool, bool>> seen;  // best, worst given in file
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::parse_error,
                  "fusion config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "combine") {
      std::istringstream parts(value);
      Combination c;
      std::string extra;
      if (!(parts >> c.fr_metric >> c.nr_metric) || (parts >> extra)) {
        throw Error(Errc::parse_error, "fusion config line " + std::to_string(line_no) +
                                           ": combine takes '<fr metric> <nr metric>'");
      }
      cfg.combinations.push_back(c);
    } else if (key == "alpha") {
      cfg.alpha = to_number(value, line_no);
      if (!(cfg.alpha > 0)) {
        throw Error(Errc::parse_error,
                    "fusion config line " + std::to_string(line_no) + ": alpha must be positive");
      }
    } else if (const auto dot = key.rfind('.'); dot != std::string::npos && dot > 0) {
      const std::string metric = key.substr(0, dot);
      const std::string field = key.substr(dot + 1);
      auto& range = cfg.ranges[metric];
      if (field == "best") {
        range.best = to_number(value, line_no);
        seen[metric].first = true;
      } else if (field == "worst") {
        range.worst = to_number(value, line_no);
        seen[metric].second = true;
      } else {
        throw Error(Errc::parse_error, "fusion config line " + std::to_string(line_no) +
                                           ": unknown field '" + field + "'");
      }
    } else {
      throw Error(Errc::parse_error,
                  "fusion config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  for (const auto& [metric, flags] : seen) {
    const bool builtin = FusionConfig::defaults().ranges.count(metric) > 0;
    if (!builtin && !(flags.first && flags.second)) {
      throw Error(Errc::parse_error,
                  "fusion config: metric '" + metric + "' needs both best and worst");
    }
    const auto& r = cfg.ranges.at(metric);
    if (r.best == r.worst) {
      throw Error(Errc::parse_error,
                  "fusion config: metric '" + metric + "' has best == worst");
    }
  }
  return cfg;
}

FusionConfig load_fusion_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(std::filesystem::exists(path) ? Errc::io_failure : Errc::missing_file,
                "cannot open fusion config " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_fusion_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace twostepqa::fusion
