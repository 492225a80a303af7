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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "twostepqa/dataset.hpp"
#include "twostepqa/fusion.hpp"

namespace twostepqa::eval {

enum class Polarity { higher_better, lower_better };

/// Per-record raw scores keyed by column name ("psnr", "ms_ssim", "niqe",
/// "niqe@ref", external metric names, ...), aligned with the records.
using ScoreTable = std::map<std::string, std::vector<double>>;

/// Content groups, MOS and raw scores of the records being evaluated.
struct EvalInput {
  std::vector<std::string> content_ids;
  std::vector<double> mos;
  ScoreTable scores;

  /// Content ids and MOS from the dataset; external scores are copied into
  /// the table when every record has them.
  static EvalInput from_dataset(const Dataset& ds);
  void validate() const;
};

/// A column correlated as is (negated first when lower is better).
struct DirectMetric {
  std::string column;
  Polarity polarity = Polarity::higher_better;
};

/// MS-SSIM(ref, dst) * (1 - NIQE(ref) / alpha).
struct Basic2StepMetric {
  std::string fr_column = "ms_ssim";
  std::string nr_column = "niqe@ref";
  double alpha = fusion::kDefaultAlpha;
};

/// Rescaled product with beta chosen on each split's training side, or held
/// at `fixed_beta` when set.
struct Rescaled2StepMetric {
  std::string fr_column;
  std::string nr_column;
  fusion::Extremals extremals;
  double grid_step = fusion::kBetaGridStep;
  std::optional<double> fixed_beta;
};

struct MetricSpec {
  std::string name;
  std::variant<DirectMetric, Basic2StepMetric, Rescaled2StepMetric> kind;
};

struct SplitOptions {
  std::size_t n_splits = 1000;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct SplitDescriptor {
  std::vector<std::string> train_contents;  ///< sorted
  std::vector<std::string> test_contents;   ///< sorted
};

inline constexpr std::size_t kMinContents = 5;

/// Content-disjoint random partitions. Split k shuffles the sorted content
/// ids with an mt19937_64 seeded by seed_seq{seed_lo, seed_hi, k} using a
/// Fisher-Yates pass with rejection-sampled bounds, so the sequence is the
/// same on every platform. The training side takes
/// round(train_fraction * contents), clamped to [1, contents - 1].
std::vector<SplitDescriptor> make_splits(std::span<const std::string> content_ids,
                                         const SplitOptions& options);

struct MetricResult {
  std::string name;
  double median_srocc = 0;
  double median_pcc = 0;
  std::vector<double> srocc_trace;
  std::vector<double> pcc_trace;
  std::vector<double> beta_trace;  ///< rescaled metrics only
};

struct AlphaRow {
  double alpha = 0;
  double median_srocc = 0;
  double median_pcc = 0;
};

struct EvalReport {
  std::uint64_t seed = 0;
  std::size_t n_splits = 0;
  double train_fraction = 0;
  std::vector<MetricResult> metrics;
  std::vector<SplitDescriptor> splits;
  std::vector<AlphaRow> alpha_sweep;

  const MetricResult& metric(const std::string& name) const;
};

/// Test-side SROCC and logistic-mapped PCC of every metric on every split,
/// summarized by their medians. Predictions that are constant on a test side
/// score 0 for that split. Test sides with fewer than five records use a
/// least-squares line in place of the logistic.
EvalReport run_splits(const EvalInput& input, std::span<const MetricSpec> metrics,
                      const SplitOptions& options);

/// run_splits of the basic product at each alpha, same splits throughout.
std::vector<AlphaRow> alpha_sweep(const EvalInput& input, std::span<const double> alphas,
                                  const SplitOptions& options,
                                  const Basic2StepMetric& base = {});

/// Machine-readable report: one row per metric with medians, then per-split
/// traces.
std::string report_csv(const EvalReport& report);
/// Per-split traces: split, metric, srocc, pcc, beta, test contents
/// (space separated).
std::string splits_csv(const EvalReport& report);
/// Aligned text table with SROCC and PCC columns.
std::string report_table(const EvalReport& report);
std::string sweep_csv(std::span<const AlphaRow> rows);
/// Two polylines (SROCC, PCC) against alpha on a log-scaled axis.
std::string sweep_svg(std::span<const AlphaRow> rows);

}  // namespace twostepqa::eval
