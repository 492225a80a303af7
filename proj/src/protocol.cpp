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

#include "twostepqa/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "twostepqa/correlation.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/logistic.hpp"

namespace twostepqa::eval {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Uniform integer in [0, bound) from raw 64-bit draws, rejecting the biased
// low range.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

const std::vector<double>& column(const EvalInput& in, const std::string& name,
                                  const std::string& metric) {
  const auto it = in.scores.find(name);
  if (it == in.scores.end()) {
    throw Error(Errc::missing_score,
                "metric '" + metric + "' needs score column '" + name + "', which is missing");
  }
  return it->second;
}

double safe_srocc(std::span<const double> pred, std::span<const double> mos) {
  try {
    return srocc(pred, mos);
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_input) return 0.0;
    throw;
  }
}

double safe_mapped_pcc(std::span<const double> pred, std::span<const double> mos) {
  try {
    if (pred.size() < kMinLogisticPoints) return std::abs(pcc(pred, mos));
    return mapped_pcc(pred, mos);
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_input) return 0.0;
    throw;
  }
}

template <typename T>
std::vector<double> gather(const std::vector<double>& values, const std::vector<T>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(values[i]);
  return out;
}

}  // namespace

EvalInput EvalInput::from_dataset(const Dataset& ds) {
  EvalInput in;
  for (const auto& r : ds.records) {
    in.content_ids.push_back(r.content_id);
    in.mos.push_back(r.mos);
  }
  for (const auto& name : ds.external_metrics) {
    std::vector<double> col;
    for (const auto& r : ds.records) {
      const auto it = r.external_scores.find(name);
      if (it == r.external_scores.end()) break;
      col.push_back(it->second);
    }
    if (col.size() == ds.records.size()) in.scores[name] = std::move(col);
  }
  return in;
}

void EvalInput::validate() const {
  if (content_ids.size() != mos.size()) {
    throw Error(Errc::dimension_mismatch, "content ids and MOS differ in length");
  }
  for (const auto& [name, col] : scores) {
    if (col.size() != mos.size()) {
      throw Error(Errc::dimension_mismatch, "score column '" + name + "' has " +
                                                std::to_string(col.size()) + " entries, expected " +
                                                std::to_string(mos.size()));
    }
    for (double v : col) {
      if (!std::isfinite(v)) {
        throw Error(Errc::non_finite, "score column '" + name + "' contains a non-finite value");
      }
    }
  }
}

std::vector<SplitDescriptor> make_splits(std::span<const std::string> content_ids,
                                         const SplitOptions& options) {
  const std::set<std::string> unique(content_ids.begin(), content_ids.end());
  const std::vector<std::string> contents(unique.begin(), unique.end());
  if (contents.size() < kMinContents) {
    throw Error(Errc::too_few_contents, "content-disjoint splits need at least " +
                                            std::to_string(kMinContents) + " contents, got " +
                                            std::to_string(contents.size()));
  }
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw Error(Errc::invalid_argument, "train fraction must lie in (0, 1)");
  }
  if (options.n_splits == 0) throw Error(Errc::invalid_argument, "need at least one split");

  const std::size_t n = contents.size();
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(options.train_fraction * static_cast<double>(n))), 1,
      n - 1);

  std::vector<SplitDescriptor> splits;
  splits.reserve(options.n_splits);
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < options.n_splits; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xFFFFFFFFu),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(bounded(rng, i + 1));
      std::swap(perm[i], perm[j]);
    }
    SplitDescriptor d;
    for (std::size_t i = 0; i < n; ++i) {
      (i < n_train ? d.train_contents : d.test_contents).push_back(contents[perm[i]]);
    }
    std::sort(d.train_contents.begin(), d.train_contents.end());
    std::sort(d.test_contents.begin(), d.test_contents.end());
    splits.push_back(std::move(d));
  }
  return splits;
}

const MetricResult& EvalReport::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw Error(Errc::invalid_argument, "report has no metric '" + name + "'");
}

EvalReport run_splits(const EvalInput& input, std::span<const MetricSpec> metrics,
                      const SplitOptions& options) {
  input.validate();
  EvalReport report;
  report.seed = options.seed;
  report.n_splits = options.n_splits;
  report.train_fraction = options.train_fraction;
  report.splits = make_splits(input.content_ids, options);

  // Resolve columns up front so a missing score fails before any work.
  struct Resolved {
    const std::vector<double>* a = nullptr;
    const std::vector<double>* b = nullptr;
  };
  std::vector<Resolved> cols;
  for (const auto& m : metrics) {
    Resolved r;
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DirectMetric>) {
            r.a = &column(input, k.column, m.name);
          } else {
            r.a = &column(input, k.fr_column, m.name);
            r.b = &column(input, k.nr_column, m.name);
          }
        },
        m.kind);
    cols.push_back(r);
    report.metrics.push_back(MetricResult{m.name, 0, 0, {}, {}, {}});
  }

  std::vector<std::size_t> train_idx, test_idx;
  for (const auto& split : report.splits) {
    const std::set<std::string> test_set(split.test_contents.begin(), split.test_contents.end());
    train_idx.clear();
    test_idx.clear();
    for (std::size_t i = 0; i < input.content_ids.size(); ++i) {
      (test_set.count(input.content_ids[i]) ? test_idx : train_idx).push_back(i);
    }
    const auto mos_test = gather(input.mos, test_idx);

    for (std::size_t m = 0; m < metrics.size(); ++m) {
      auto& result = report.metrics[m];
      std::vector<double> pred(test_idx.size());
      std::visit(
          [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            const auto& a = *cols[m].a;
            if constexpr (std::is_same_v<K, DirectMetric>) {
              const double sign = k.polarity == Polarity::lower_better ? -1.0 : 1.0;
              for (std::size_t i = 0; i < test_idx.size(); ++i) pred[i] = sign * a[test_idx[i]];
            } else if constexpr (std::is_same_v<K, Basic2StepMetric>) {
              const auto& b = *cols[m].b;
              for (std::size_t i = 0; i < test_idx.size(); ++i) {
                pred[i] = fusion::basic_2step(a[test_idx[i]], b[test_idx[i]], k.alpha);
              }
            } else {
              const auto& b = *cols[m].b;
              double beta = 0;
              if (k.fixed_beta) {
                beta = *k.fixed_beta;
              } else {
                beta = fusion::select_beta(gather(a, train_idx), gather(b, train_idx),
                                           gather(input.mos, train_idx), k.extremals,
                                           k.grid_step);
              }
              result.beta_trace.push_back(beta);
              const auto& ex = k.extremals;
              const auto p = fusion::derive_rescale(ex.r_hi, ex.r_low, ex.nr_hi, ex.nr_low, beta);
              for (std::size_t i = 0; i < test_idx.size(); ++i) {
                pred[i] = fusion::general_2step(a[test_idx[i]], b[test_idx[i]], p);
              }
            }
          },
          metrics[m].kind);
      result.srocc_trace.push_back(safe_srocc(pred, mos_test));
      result.pcc_trace.push_back(safe_mapped_pcc(pred, mos_test));
    }
  }
  for (auto& r : report.metrics) {
    r.median_srocc = median(r.srocc_trace);
    r.median_pcc = median(r.pcc_trace);
  }
  return report;
}

std::vector<AlphaRow> alpha_sweep(const EvalInput& input, std::span<const double> alphas,
                                  const SplitOptions& options, const Basic2StepMetric& base) {
  if (alphas.empty()) throw Error(Errc::invalid_argument, "alpha list is empty");
  std::vector<AlphaRow> rows;
  for (double a : alphas) {
    if (!(a > 0) || !std::isfinite(a)) {
      throw Error(Errc::invalid_argument, "alpha values must be positive and finite");
    }
    Basic2StepMetric m = base;
    m.alpha = a;
    const MetricSpec spec{"2stepQA", m};
    const auto rep = run_splits(input, std::span<const MetricSpec>(&spec, 1), options);
    rows.push_back({a, rep.metrics[0].median_srocc, rep.metrics[0].median_pcc});
  }
  return rows;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "metric,median_srocc,median_pcc,median_beta,n_splits,train_fraction,seed\n";
  for (const auto& m : report.metrics) {
    os << m.name << ',' << num(m.median_srocc) << ',' << num(m.median_pcc) << ','
       << (m.beta_trace.empty() ? std::string() : num(median(m.beta_trace))) << ','
       << report.n_splits << ',' << num(report.train_fraction) << ',' << report.seed << '\n';
  }
  return os.str();
}

std::string splits_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "split,metric,srocc,pcc,beta,test_contents\n";
  for (std::size_t k = 0; k < report.splits.size(); ++k) {
    std::string test;
    for (const auto& c : report.splits[k].test_contents) test += (test.empty() ? "" : " ") + c;
    for (const auto& m : report.metrics) {
      os << k << ',' << m.name << ',' << num(m.srocc_trace[k]) << ',' << num(m.pcc_trace[k])
         << ',' << (m.beta_trace.empty() ? std::string() : num(m.beta_trace[k])) << ",\""
         << test << "\"\n";
    }
  }
  return os.str();
}

std::string report_table(const EvalReport& report) {
  std::size_t width = 7;
  for (const auto& m : report.metrics) width = std::max(width, m.name.size());
  std::ostringstream os;
  const std::string rule = "+" + std::string(width + 2, '-') + "+--------+--------+\n";
  os << rule << "| " << std::left << std::setw(static_cast<int>(width)) << "Metric"
     << " | SROCC  | PCC    |\n"
     << rule;
  for (const auto& m : report.metrics) {
    os << "| " << std::left << std::setw(static_cast<int>(width)) << m.name << " | "
       << fixed(m.median_srocc, 4) << (m.median_srocc < 0 ? "" : " ") << "| "
       << fixed(m.median_pcc, 4) << (m.median_pcc < 0 ? "" : " ") << "|\n";
  }
  os << rule;
  os << "median over " << report.n_splits << " content-disjoint "
     << fixed(100 * report.train_fraction, 0) << "/" << fixed(100 * (1 - report.train_fraction), 0)
     << " splits, seed " << report.seed << "\n";
  return os.str();
}

std::string sweep_csv(std::span<const AlphaRow> rows) {
  std::ostringstream os;
  os << "alpha,median_srocc,median_pcc\n";
  for (const auto& r : rows) {
    os << num(r.alpha) << ',' << num(r.median_srocc) << ',' << num(r.median_pcc) << '\n';
  }
  return os.str();
}

std::string sweep_svg(std::span<const AlphaRow> rows) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 30, kBottom = 60;
  if (rows.empty()) throw Error(Errc::invalid_argument, "no sweep rows to plot");
  double amin = rows.front().alpha, amax = amin;
  double ymin = 1, ymax = -1;
  for (const auto& r : rows) {
    amin = std::min(amin, r.alpha);
    amax = std::max(amax, r.alpha);
    ymin = std::min({ymin, r.median_srocc, r.median_pcc});
    ymax = std::max({ymax, r.median_srocc, r.median_pcc});
  }
  const bool log_x = amax / amin > 10.0;
  auto xval = [&](double a) { return log_x ? std::log10(a) : a; };
  const double x0 = xval(amin);
  const double x1 = amax > amin ? xval(amax) : x0 + 1;
  const double pad = std::max(1e-3, 0.05 * (ymax - ymin));
  const double y0 = ymin - pad;
  const double y1 = ymax + pad;
  auto px = [&](double a) { return kLeft + (xval(a) - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * (kH - kTop - kBottom); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
     << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kH - kBottom << "\" stroke=\"black\"/>\n";
  for (const auto& r : rows) {
    os << "<text x=\"" << px(r.alpha) << "\" y=\"" << kH - kBottom + 18
       << "\" font-size=\"11\" text-anchor=\"middle\">" << num(r.alpha) << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(v) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << fixed(v, 3) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 15
     << "\" font-size=\"13\" text-anchor=\"middle\">alpha" << (log_x ? " (log scale)" : "")
     << "</text>\n";
  const struct {
    const char* name;
    const char* color;
    double AlphaRow::*field;
  } series[] = {{"SROCC", "#1f77b4", &AlphaRow::median_srocc},
                {"PCC", "#d62728", &AlphaRow::median_pcc}};
  int legend = 0;
  for (const auto& s : series) {
    os << "<polyline class=\"" << s.name << "\" fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      os << (i ? " " : "") << px(rows[i].alpha) << ',' << py(rows[i].*(s.field));
    }
    os << "\"/>\n";
    os << "<text x=\"" << kW - kRight - 60 << "\" y=\"" << kTop + 14 * (legend++)
       << "\" font-size=\"12\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace twostepqa::eval
