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

#include "twostepqa/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "cli/score_cache.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "twostepqa/correlation.hpp"
#include "twostepqa/digest.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/fr_metrics.hpp"
#include "twostepqa/fusion.hpp"
#include "twostepqa/fusion_config.hpp"
#include "twostepqa/image_io.hpp"

namespace twostepqa::cli {

namespace {

using nlohmann::json;

// Bump a version when the corresponding metric's output changes.
constexpr int kPsnrVersion = 1;
constexpr int kMsSsimVersion = 1;
constexpr int kNiqeVersion = 1;

constexpr const char* kPsnr = "psnr";
constexpr const char* kMsSsim = "ms_ssim";
constexpr const char* kNiqe = "niqe";
constexpr const char* kNiqeRef = "niqe@ref";

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

std::string fixed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_failure, "write failed: " + path.string());
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return fs::path(prefix.string() + suffix);
}

LumaImage decode(const fs::path& path) {
  try {
    return io::decode_to_luma(path);
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.find(path.string()) != std::string::npos) throw;
    throw Error(e.code(), path.string() + ": " + what);
  }
}

// Largest finite PSNR two distinct 8-bit images of `pixels` samples can
// reach (a single one-level difference). Identical pairs are ranked there.
double psnr_ceiling(std::size_t pixels) {
  return 10.0 * std::log10(255.0 * 255.0 * static_cast<double>(pixels));
}

int report_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << '\n';
  return 1;
}

unsigned effective_threads(unsigned threads) {
  return threads == 0 ? default_threads() : threads;
}

eval::SplitOptions split_options(const EvalOptions& e) {
  eval::SplitOptions s;
  s.n_splits = e.n_splits;
  s.train_fraction = e.train_fraction;
  s.seed = e.seed;
  return s;
}

fusion::FusionConfig load_config(const DatasetOptions& opt) {
  return opt.config ? fusion::load_fusion_config(*opt.config) : fusion::FusionConfig::defaults();
}

}  // namespace

fs::path bundled_model_path() { return fs::path(TWOSTEPQA_DEFAULT_MODEL); }

fs::path resolve_model_path(const std::optional<fs::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kModelEnvVar); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return bundled_model_path();
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

PairScores score_pair(const LumaImage& ref, const LumaImage& dst, const nr::NiqeModel& model,
                      double alpha) {
  PairScores s;
  s.psnr = fr::psnr(ref, dst);
  s.ms_ssim = std::clamp(fr::ms_ssim(ref, dst), 0.0, 1.0);
  s.niqe_ref = nr::niqe_score(ref, model);
  s.niqe_dst = nr::niqe_score(dst, model);
  s.two_step = fusion::basic_2step(s.ms_ssim, s.niqe_ref, alpha);
  return s;
}

int cmd_score(const ScoreOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (!(opt.alpha > 0) || !std::isfinite(opt.alpha)) {
      throw Error(Errc::invalid_argument, "alpha must be positive and finite");
    }
    const auto model_path = resolve_model_path(opt.model);
    const auto model = nr::load_model(model_path);
    const auto ref = decode(opt.ref);
    const auto dst = decode(opt.dst);
    const auto s = score_pair(ref, dst, model, opt.alpha);
    if (opt.json) {
      json j{{"schema", "twostepqa.score"},
             {"schema_version", kOutputSchemaVersion},
             {"ref", opt.ref.string()},
             {"dst", opt.dst.string()},
             {"model", model_path.string()},
             {"alpha", opt.alpha},
             {"psnr", number_or_string(s.psnr)},
             {"ms_ssim", s.ms_ssim},
             {"niqe_ref", s.niqe_ref},
             {"niqe_dst", s.niqe_dst},
             {"two_step", s.two_step}};
      out << j.dump(2) << '\n';
    } else {
      out << "PSNR       " << fixed(s.psnr, 4) << " dB\n"
          << "MS-SSIM    " << fixed(s.ms_ssim, 6) << '\n'
          << "NIQE(ref)  " << fixed(s.niqe_ref, 4) << '\n'
          << "NIQE(dst)  " << fixed(s.niqe_dst, 4) << '\n'
          << "2stepQA    " << fixed(s.two_step, 6) << "  (alpha " << opt.alpha << ")\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

eval::EvalInput prepare_scores(const DatasetOptions& opt, ScoringStats* stats) {
  eval::IngestOptions ingest;
  ingest.check_files = opt.image_metrics;
  const auto ds = eval::ingest_dataset(opt.manifest, ingest);
  auto input = eval::EvalInput::from_dataset(ds);
  if (!opt.image_metrics) {
    input.validate();
    return input;
  }

  const bool need_psnr = !input.scores.contains(kPsnr);
  const bool need_ms = !input.scores.contains(kMsSsim);
  const bool need_niqe = !input.scores.contains(kNiqe);
  const bool need_niqe_ref = !input.scores.contains(kNiqeRef);
  if (!(need_psnr || need_ms || need_niqe || need_niqe_ref)) {
    input.validate();
    return input;
  }

  const unsigned threads = effective_threads(opt.threads);
  const std::size_t n = ds.records.size();

  std::optional<nr::NiqeModel> model;
  std::string model_digest;
  if (need_niqe || need_niqe_ref) {
    const auto model_path = resolve_model_path(opt.model);
    model = nr::load_model(model_path);
    model_digest = sha256_file(model_path);
  }

  ScoreCache cache = opt.use_cache ? ScoreCache(opt.cache.value_or(
                                         with_suffix(opt.manifest, ".scores.cache")))
                                   : ScoreCache();

  // Content hash of every referenced file.
  std::vector<fs::path> paths;
  {
    std::set<fs::path> unique;
    for (const auto& r : ds.records) {
      unique.insert(r.ref_path);
      unique.insert(r.dst_path);
    }
    paths.assign(unique.begin(), unique.end());
  }
  std::vector<std::string> digests(paths.size());
  detail::parallel_for(paths.size(), threads,
                       [&](std::size_t i) { digests[i] = sha256_file(paths[i]); });
  std::map<fs::path, std::string> digest_of;
  for (std::size_t i = 0; i < paths.size(); ++i) digest_of[paths[i]] = digests[i];

  std::atomic<std::size_t> hits{0}, misses{0}, decodes{0};
  auto lookup = [&](const char* metric, int version, const std::string& key) {
    auto v = cache.find(metric, version, key);
    ++(v ? hits : misses);
    return v;
  };
  auto load = [&](const fs::path& p) {
    ++decodes;
    return decode(p);
  };

  std::vector<double> psnr(n), ms(n), niqe_dst(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    const auto& r = ds.records[i];
    try {
      const auto& ref_hash = digest_of.at(r.ref_path);
      const auto& dst_hash = digest_of.at(r.dst_path);
      const std::string pair_key = ref_hash + ":" + dst_hash;
      const std::string niqe_key = dst_hash + ":" + model_digest;
      std::optional<double> p, m, q;
      if (need_psnr) p = lookup(kPsnr, kPsnrVersion, pair_key);
      if (need_ms) m = lookup(kMsSsim, kMsSsimVersion, pair_key);
      if (need_niqe) q = lookup(kNiqe, kNiqeVersion, niqe_key);
      const bool pair_missing = (need_psnr && !p) || (need_ms && !m);
      const bool dst_missing = need_niqe && !q;
      if (pair_missing || dst_missing) {
        const auto dst = load(r.dst_path);
        if (dst_missing) {
          q = nr::niqe_score(dst, *model);
          cache.put(kNiqe, kNiqeVersion, niqe_key, *q);
        }
        if (pair_missing) {
          const auto ref = load(r.ref_path);
          if (need_psnr && !p) {
            p = fr::psnr(ref, dst);
            if (std::isinf(*p)) p = psnr_ceiling(dst.width() * dst.height());
            cache.put(kPsnr, kPsnrVersion, pair_key, *p);
          }
          if (need_ms && !m) {
            m = std::clamp(fr::ms_ssim(ref, dst), 0.0, 1.0);
            cache.put(kMsSsim, kMsSsimVersion, pair_key, *m);
          }
        }
      }
      if (p) psnr[i] = *p;
      if (m) ms[i] = *m;
      if (q) niqe_dst[i] = *q;
    } catch (const Error& e) {
      throw Error(e.code(), "record " + std::to_string(i + 1) + " (content " + r.content_id +
                                ", " + r.dst_path.string() + "): " + e.what());
    }
  });

  if (need_niqe_ref) {
    std::vector<std::pair<std::string, fs::path>> refs;
    for (const auto& r : ds.records) {
      if (refs.empty() || refs.back().first != r.content_id) {
        refs.emplace_back(r.content_id, r.ref_path);
      }
    }
    std::sort(refs.begin(), refs.end());
    refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
    std::vector<double> ref_scores(refs.size());
    detail::parallel_for(refs.size(), threads, [&](std::size_t i) {
      const auto& [content, path] = refs[i];
      try {
        const std::string key = digest_of.at(path) + ":" + model_digest;
        auto q = lookup(kNiqe, kNiqeVersion, key);
        if (!q) {
          q = nr::niqe_score(load(path), *model);
          cache.put(kNiqe, kNiqeVersion, key, *q);
        }
        ref_scores[i] = *q;
      } catch (const Error& e) {
        throw Error(e.code(), "reference of content " + content + " (" + path.string() +
                                  "): " + e.what());
      }
    });
    std::map<std::string, double> by_content;
    for (std::size_t i = 0; i < refs.size(); ++i) by_content[refs[i].first] = ref_scores[i];
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = by_content.at(ds.records[i].content_id);
    input.scores[kNiqeRef] = std::move(col);
  }

  if (need_psnr) input.scores[kPsnr] = std::move(psnr);
  if (need_ms) input.scores[kMsSsim] = std::move(ms);
  if (need_niqe) input.scores[kNiqe] = std::move(niqe_dst);

  cache.save();
  if (stats != nullptr) {
    stats->cache_hits = hits;
    stats->cache_misses = misses;
    stats->decodes = decodes;
  }
  input.validate();
  return input;
}

std::vector<eval::MetricSpec> benchmark_metrics(const eval::EvalInput& input,
                                                const DatasetOptions& data,
                                                const EvalOptions& eval) {
  const auto config = load_config(data);
  const double alpha = eval.alpha.value_or(config.alpha);
  const auto has = [&](const std::string& c) { return input.scores.contains(c); };
  const auto polarity = [&](const std::string& c) {
    const auto it = config.ranges.find(c);
    if (it == config.ranges.end()) return eval::Polarity::higher_better;
    return it->second.higher_is_better() ? eval::Polarity::higher_better
                                         : eval::Polarity::lower_better;
  };

  std::vector<eval::MetricSpec> metrics;
  if (has(kPsnr)) metrics.push_back({"PSNR", eval::DirectMetric{kPsnr, polarity(kPsnr)}});
  if (has(kMsSsim)) metrics.push_back({"MS-SSIM", eval::DirectMetric{kMsSsim, polarity(kMsSsim)}});
  if (has(kNiqe)) metrics.push_back({"NIQE", eval::DirectMetric{kNiqe, polarity(kNiqe)}});
  if (has(kMsSsim) && has(kNiqeRef)) {
    eval::Basic2StepMetric basic;
    basic.alpha = alpha;
    metrics.push_back({"2stepQA", basic});
  }
  for (const auto& [column, values] : input.scores) {
    if (column == kPsnr || column == kMsSsim || column == kNiqe) continue;
    if (column.ends_with("@ref")) continue;
    metrics.push_back({column, eval::DirectMetric{column, polarity(column)}});
  }
  for (const auto& combo : config.combinations) {
    const std::string nr_column = combo.nr_metric + "@ref";
    if (!has(combo.fr_metric) || !has(nr_column)) {
      throw Error(Errc::missing_score, "combination " + combo.fr_metric + " " +
                                           combo.nr_metric + " needs columns " +
                                           combo.fr_metric + " and " + nr_column);
    }
    eval::Rescaled2StepMetric m;
    m.fr_column = combo.fr_metric;
    m.nr_column = nr_column;
    m.extremals = config.extremals(combo);
    m.grid_step = eval.beta_step;
    m.fixed_beta = eval.beta;
    metrics.push_back({combo.fr_metric + "+" + combo.nr_metric, m});
  }
  if (metrics.empty()) throw Error(Errc::missing_score, "no metric columns to evaluate");
  return metrics;
}

int cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out, std::ostream& err,
                  ScoringStats* stats) {
  try {
    ScoringStats local;
    const auto input = prepare_scores(opt.data, &local);
    if (stats != nullptr) *stats = local;
    const auto metrics = benchmark_metrics(input, opt.data, opt.eval);
    const auto report = eval::run_splits(input, metrics, split_options(opt.eval));

    const auto csv_path = with_suffix(opt.out_prefix, ".csv");
    const auto splits_path = with_suffix(opt.out_prefix, "_splits.csv");
    const auto table_path = with_suffix(opt.out_prefix, ".txt");
    const auto table = eval::report_table(report);
    write_text(csv_path, eval::report_csv(report));
    write_text(splits_path, eval::splits_csv(report));
    write_text(table_path, table);

    if (opt.json) {
      json rows = json::array();
      for (const auto& m : report.metrics) {
        json row{{"name", m.name}, {"median_srocc", m.median_srocc}, {"median_pcc", m.median_pcc}};
        if (!m.beta_trace.empty()) row["median_beta"] = eval::median(m.beta_trace);
        rows.push_back(row);
      }
      json j{{"schema", "twostepqa.benchmark"},
             {"schema_version", kOutputSchemaVersion},
             {"records", input.mos.size()},
             {"seed", report.seed},
             {"n_splits", report.n_splits},
             {"train_fraction", report.train_fraction},
             {"metrics", rows},
             {"outputs",
              {{"report", csv_path.string()},
               {"splits", splits_path.string()},
               {"table", table_path.string()}}},
             {"cache",
              {{"hits", local.cache_hits},
               {"misses", local.cache_misses},
               {"decodes", local.decodes}}}};
      out << j.dump(2) << '\n';
    } else {
      out << table;
      err << "scored " << input.mos.size() << " records: " << local.cache_hits
          << " cache hits, " << local.cache_misses << " misses, " << local.decodes
          << " decodes\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_alpha_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.alphas.empty()) {
      err << "error: alpha list is empty\n";
      return 2;
    }
    for (double a : opt.alphas) {
      if (!(a > 0) || !std::isfinite(a)) {
        throw Error(Errc::invalid_argument, "alpha values must be positive and finite");
      }
    }
    const auto input = prepare_scores(opt.data);
    if (!input.scores.contains(kMsSsim) || !input.scores.contains(kNiqeRef)) {
      throw Error(Errc::missing_score, "alpha sweep needs ms_ssim and niqe@ref scores");
    }
    const auto rows = eval::alpha_sweep(input, opt.alphas, split_options(opt.eval));
    const auto svg_path = opt.svg_path.value_or(fs::path(opt.csv_path).replace_extension(".svg"));
    write_text(opt.csv_path, eval::sweep_csv(rows));
    write_text(svg_path, eval::sweep_svg(rows));
    if (opt.json) {
      json j_rows = json::array();
      for (const auto& r : rows) {
        j_rows.push_back({{"alpha", r.alpha}, {"median_srocc", r.median_srocc},
                          {"median_pcc", r.median_pcc}});
      }
      json j{{"schema", "twostepqa.alpha_sweep"},
             {"schema_version", kOutputSchemaVersion},
             {"seed", opt.eval.seed},
             {"n_splits", opt.eval.n_splits},
             {"rows", j_rows},
             {"outputs", {{"csv", opt.csv_path.string()}, {"svg", svg_path.string()}}}};
      out << j.dump(2) << '\n';
    } else {
      out << std::setw(12) << "alpha" << std::setw(10) << "SROCC" << std::setw(10) << "PCC"
          << '\n';
      for (const auto& r : rows) {
        out << std::setw(12) << r.alpha << std::setw(10) << fixed(r.median_srocc, 4)
            << std::setw(10) << fixed(r.median_pcc, 4) << '\n';
      }
    }
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(fs::exists(dir) ? Errc::invalid_argument : Errc::missing_file,
                "not a directory: " + dir.string());
  }
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::uint8_t head[16] = {};
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (io::sniff_format(std::span<const std::uint8_t>(head, got)) != io::ImageFormat::unknown) {
      images.push_back(entry.path());
    }
  }
  std::sort(images.begin(), images.end());
  return images;
}

int cmd_train_niqe(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    opt.params.validate();
    const auto images = list_images(opt.corpus_dir);
    if (images.size() < nr::kMinCorpusImages) {
      throw Error(Errc::corpus_too_small,
                  "corpus " + opt.corpus_dir.string() + " has " + std::to_string(images.size()) +
                      " images; at least " + std::to_string(nr::kMinCorpusImages) +
                      " are required");
    }
    nr::TrainingSummary summary;
    const auto model =
        nr::train_pristine(images, opt.params, &summary, effective_threads(opt.threads));
    nr::save_model(model, opt.out_model);

    const auto dim = static_cast<std::size_t>(model.mean.size());
    std::vector<double> sd(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      sd[k] = std::sqrt(std::max(0.0, model.covariance(kk, kk)));
    }
    if (opt.json) {
      json j{{"schema", "twostepqa.train_niqe"},
             {"schema_version", kOutputSchemaVersion},
             {"model", opt.out_model.string()},
             {"images", images.size()},
             {"images_used", summary.images_used},
             {"patches", summary.patches},
             {"skipped", summary.skipped},
             {"feature_mean", std::vector<double>(model.mean.data(), model.mean.data() + dim)},
             {"feature_sd", sd}};
      out << j.dump(2) << '\n';
    } else {
      out << "images   " << summary.images_used << " of " << images.size() << '\n'
          << "patches  " << summary.patches << '\n';
      for (const auto& s : summary.skipped) out << "skipped  " << s << '\n';
      out << "feature        mean          sd\n";
      for (std::size_t k = 0; k < dim; ++k) {
        out << std::setw(7) << k + 1 << std::setw(12) << fixed(model.mean[static_cast<Eigen::Index>(k)], 5)
            << std::setw(12) << fixed(sd[k], 5) << '\n';
      }
      out << "wrote " << opt.out_model.string() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_encode_ladder(const LadderOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.qualities.empty()) throw Error(Errc::invalid_argument, "no quality levels given");
    for (int q : opt.qualities) {
      if (q < 1 || q > 100) {
        throw Error(Errc::invalid_argument, "quality " + std::to_string(q) + " outside 1..100");
      }
    }
    std::vector<fs::path> sources;
    for (const auto& s : opt.sources) {
      if (fs::is_directory(s)) {
        const auto found = list_images(s);
        sources.insert(sources.end(), found.begin(), found.end());
      } else {
        sources.push_back(s);
      }
    }
    if (sources.empty()) throw Error(Errc::invalid_argument, "no source images");
    std::set<std::string> stems;
    for (const auto& s : sources) {
      if (!stems.insert(s.stem().string()).second) {
        throw Error(Errc::duplicate_record, "two sources share the name " + s.stem().string());
      }
    }
    fs::create_directories(opt.out_dir);

    std::ostringstream manifest;
    manifest << "content_id,ref_path,dst_path,mos\n";
    for (const auto& src : sources) {
      const auto img = decode(src);
      const auto stem = src.stem().string();
      manifest << stem << ',' << fs::absolute(src).string() << ",,\n";
      for (int q : opt.qualities) {
        const auto dst = opt.out_dir / (stem + "_q" + std::to_string(q) + ".jpg");
        io::encode_jpeg(img, q, dst);
        manifest << stem << ",," << fs::absolute(dst).string() << ",\n";
        out << dst.string() << '\n';
      }
    }
    if (opt.manifest) write_text(*opt.manifest, manifest.str());
    return 0;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

}  // namespace twostepqa::cli
