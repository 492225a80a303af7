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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "twostepqa/cli.hpp"

namespace {

using namespace twostepqa;

void add_data_flags(CLI::App* cmd, cli::DatasetOptions& d) {
  cmd->add_option("manifest", d.manifest,
                  "CSV manifest: content_id,ref_path,dst_path,mos[,metric:NAME...]")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", d.config, "fusion config (metric ranges, combinations, alpha)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--model", d.model,
                  std::string("NIQE model file (default: $") + cli::kModelEnvVar +
                      ", then the bundled model)");
  auto* cache = cmd->add_option("--cache", d.cache,
                                "score cache file (default: <manifest>.scores.cache)");
  auto* no_cache = cmd->add_flag_callback(
      "--no-cache", [&d] { d.use_cache = false; }, "neither read nor write the score cache");
  cache->excludes(no_cache);
  cmd->add_flag_callback(
      "--no-image-metrics", [&d] { d.image_metrics = false; },
      "use only the manifest's metric columns; do not open any image");
  cmd->add_option("--threads", d.threads, "worker threads (0: all cores)")
      ->default_val(0)
      ->check(CLI::NonNegativeNumber);
}

void add_split_flags(CLI::App* cmd, cli::EvalOptions& e) {
  cmd->add_option("--splits", e.n_splits, "number of content-disjoint splits")
      ->default_val(1000)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--train-fraction", e.train_fraction, "share of contents on the training side")
      ->default_val(0.8)
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", e.seed, "split seed")->default_val(0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-reference x no-reference image quality scoring and benchmarking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "twostepqa 0.1.0");

  cli::ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "score a reference/distorted image pair");
  score_cmd->add_option("ref", score.ref, "reference image")->required();
  score_cmd->add_option("dst", score.dst, "distorted image")->required();
  score_cmd->add_option("--model", score.model,
                        std::string("NIQE model file (default: $") + cli::kModelEnvVar +
                            ", then the bundled model)");
  score_cmd->add_option("--alpha", score.alpha, "NIQE normalizer of the product score")
      ->default_val(100.0)
      ->check(CLI::PositiveNumber);
  score_cmd->add_flag("--json", score.json, "structured output");

  cli::BenchmarkOptions bench;
  auto* bench_cmd =
      app.add_subcommand("benchmark", "median SROCC/PCC of every metric over random splits");
  add_data_flags(bench_cmd, bench.data);
  add_split_flags(bench_cmd, bench.eval);
  bench_cmd->add_option("--alpha", bench.eval.alpha,
                        "NIQE normalizer of the product score (default: config, else 100)")
      ->check(CLI::PositiveNumber);
  auto* beta = bench_cmd->add_option("--beta", bench.eval.beta,
                                     "fixed NR floor for rescaled combinations (no search)")
                   ->check(CLI::Range(0.0, 0.999999));
  auto* beta_step = bench_cmd->add_option("--beta-step", bench.eval.beta_step,
                                          "grid step of the NR floor search")
                        ->default_val(0.01)
                        ->check(CLI::Range(1e-6, 1.0));
  beta->excludes(beta_step);
  bench_cmd->add_option("--out", bench.out_prefix,
                        "output prefix: <out>.csv, <out>_splits.csv, <out>.txt")
      ->default_val("report");
  bench_cmd->add_flag("--json", bench.json, "structured output");

  cli::SweepOptions sweep;
  auto* sweep_cmd =
      app.add_subcommand("alpha-sweep", "median SROCC/PCC of the product score against alpha");
  add_data_flags(sweep_cmd, sweep.data);
  add_split_flags(sweep_cmd, sweep.eval);
  sweep_cmd->add_option("--alphas", sweep.alphas, "alpha values, e.g. --alphas 50 100 200")
      ->required()
      ->expected(1, -1)
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--csv", sweep.csv_path, "sweep table")->default_val("alpha_sweep.csv");
  sweep_cmd->add_option("--svg", sweep.svg_path, "line chart (default: CSV path with .svg)");
  sweep_cmd->add_flag("--json", sweep.json, "structured output");

  cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train-niqe", "fit the pristine NIQE model to a corpus");
  train_cmd->add_option("corpus", train.corpus_dir, "directory of pristine images")->required();
  train_cmd->add_option("model", train.out_model, "output model file")->required();
  train_cmd->add_option("--patch-size", train.params.patch_size, "tile side in pixels")
      ->default_val(96);
  train_cmd->add_option("--sharpness-fraction", train.params.sharpness_fraction,
                        "keep tiles at least this fraction of the sharpest")
      ->default_val(0.75);
  train_cmd->add_option("--threads", train.threads, "worker threads (0: all cores)")
      ->default_val(0)
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_flag("--json", train.json, "structured output");

  cli::LadderOptions ladder;
  auto* ladder_cmd =
      app.add_subcommand("encode-ladder", "JPEG-encode source images at several qualities");
  ladder_cmd->add_option("sources", ladder.sources, "source images or directories")
      ->required()
      ->expected(1, -1);
  ladder_cmd->add_option("--out-dir", ladder.out_dir, "output directory")->required();
  ladder_cmd->add_option("--qualities", ladder.qualities, "JPEG qualities")
      ->default_str("90 50 25 10")
      ->expected(1, -1)
      ->check(CLI::Range(1, 100));
  ladder_cmd->add_option("--manifest", ladder.manifest,
                         "also write a manifest template (MOS left empty)");

  CLI11_PARSE(app, argc, argv);

  if (*score_cmd) return cli::cmd_score(score, std::cout, std::cerr);
  if (*bench_cmd) return cli::cmd_benchmark(bench, std::cout, std::cerr);
  if (*sweep_cmd) return cli::cmd_alpha_sweep(sweep, std::cout, std::cerr);
  if (*train_cmd) return cli::cmd_train_niqe(train, std::cout, std::cerr);
  if (*ladder_cmd) return cli::cmd_encode_ladder(ladder, std::cout, std::cerr);
  return 2;
}
