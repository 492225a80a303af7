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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "twostepqa/fusion.hpp"

namespace twostepqa::fusion {

/// Best/worst raw score of one metric. Polarity follows from their order.
struct MetricRange {
  double best = 1;
  double worst = 0;
  bool higher_is_better() const noexcept { return best > worst; }
};

struct Combination {
  std::string fr_metric;
  std::string nr_metric;  ///< scored on the reference image
};

// Key-value text, one entry per line, '#' starts a comment:
//
//   <metric>.best = <number>
//   <metric>.worst = <number>
//   combine = <fr metric> <nr metric>
//   alpha = <number>
//
// Built-in ranges: ms_ssim 1 -> 0, ssim 1 -> 0, niqe 0 -> 100. A file entry
// overrides the built-in value. `combine` lines accumulate.
struct FusionConfig {
  std::map<std::string, MetricRange> ranges;
  std::vector<Combination> combinations;
  double alpha = kDefaultAlpha;

  static FusionConfig defaults();
  /// Range of a metric; an "@ref" suffix is ignored. Throws when unknown.
  const MetricRange& range(const std::string& metric) const;
  Extremals extremals(const Combination& combo) const;
};

FusionConfig parse_fusion_config(const std::string& text);
FusionConfig load_fusion_config(const std::filesystem::path& path);

}  // namespace twostepqa::fusion
