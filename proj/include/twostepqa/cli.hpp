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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "twostepqa/image.hpp"
#include "twostepqa/nr_metrics.hpp"
#include "twostepqa/protocol.hpp"

namespace twostepqa::cli {

namespace fs = std::filesystem;

inline constexpr const char* kModelEnvVar = "TWOSTEPQA_NIQE_MODEL";
/// Version tag of the structured (JSON) output records.
inline constexpr int kOutputSchemaVersion = 1;

/// --model flag, then $TWOSTEPQA_NIQE_MODEL, then the bundled model.
fs::path resolve_model_path(const std::optional<fs::path>& flag);
fs::path bundled_model_path();

unsigned default_threads();

struct PairScores {
  double psnr = 0;
  double ms_ssim = 0;
  double niqe_ref = 0;
  double niqe_dst = 0;
  double two_step = 0;
};

PairScores score_pair(const LumaImage& ref, const LumaImage& dst, const nr::NiqeModel& model,
                      double alpha);

struct ScoreOptions {
  fs::path ref;
  fs::path dst;
  std::optional<fs::path> model;
  double alpha = 100;
  bool json = false;
};

int cmd_score(const ScoreOptions& opt, std::ostream& out, std::ostream& err);

struct DatasetOptions {
  fs::path manifest;
  std::optional<fs::path> config;
  std::optional<fs::path> model;
  std::optional<fs::path> cache;  ///< default: <manifest>.scores.cache
  bool use_cache = true;
  bool image_metrics = true;
  unsigned threads = 1;
};

struct EvalOptions {
  std::size_t n_splits = 1000;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::optional<double> alpha;  ///< overrides the config file
  std::optional<double> beta;   ///< fixes beta instead of searching
  double beta_step = 0.01;
};

struct ScoringStats {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t decodes = 0;
};

/// Ingests the manifest and fills the score table: manifest metric columns
/// first, then psnr / ms_ssim / niqe / niqe@ref for any column the manifest
/// does not supply (unless image metrics are disabled).
eval::EvalInput prepare_scores(const DatasetOptions& opt, ScoringStats* stats = nullptr);

/// Metric list for a benchmark over the available columns.
std::vector<eval::MetricSpec> benchmark_metrics(const eval::EvalInput& input,
                                                const DatasetOptions& data,
                                                const EvalOptions& eval);

struct BenchmarkOptions {
  DatasetOptions data;
  EvalOptions eval;
  fs::path out_prefix = "report";  ///< writes <prefix>.csv, _splits.csv, .txt
  bool json = false;
};

int cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out, std::ostream& err,
                  ScoringStats* stats = nullptr);

struct SweepOptions {
  DatasetOptions data;
  EvalOptions eval;
  std::vector<double> alphas;
  fs::path csv_path = "alpha_sweep.csv";
  std::optional<fs::path> svg_path;  ///< default: csv path with .svg
  bool json = false;
};

int cmd_alpha_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

struct TrainOptions {
  fs::path corpus_dir;
  fs::path out_model;
  nr::NiqeParams params;
  unsigned threads = 1;
  bool json = false;
};

/// Every regular file in `dir` whose header is a supported image format,
/// sorted by path.
std::vector<fs::path> list_images(const fs::path& dir);

int cmd_train_niqe(const TrainOptions& opt, std::ostream& out, std::ostream& err);

struct LadderOptions {
  std::vector<fs::path> sources;  ///< files or directories
  fs::path out_dir;
  std::vector<int> qualities{90, 50, 25, 10};
  std::optional<fs::path> manifest;  ///< manifest template with empty MOS
};

int cmd_encode_ladder(const LadderOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace twostepqa::cli
