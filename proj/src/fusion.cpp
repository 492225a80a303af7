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

#include "twostepqa/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "twostepqa/correlation.hpp"
#include "twostepqa/error.hpp"

namespace twostepqa::fusion {

double basic_2step(double ms_ssim_score, double niqe_score, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw Error(Errc::invalid_argument, "alpha must be positive and finite");
  }
  if (!(ms_ssim_score >= 0.0 && ms_ssim_score <= 1.0)) {
    throw Error(Errc::invalid_argument, "MS-SSIM score must lie in [0, 1]");
  }
  if (!(niqe_score >= 0.0) || std::isinf(niqe_score)) {
    throw Error(Errc::invalid_argument, "NIQE score must be finite and nonnegative");
  }
  return ms_ssim_score * (alpha - std::min(niqe_score, alpha)) / alpha;
}

RescaleParams derive_rescale(double r_hi, double r_low, double nr_hi, double nr_low,
                             double beta) {
  for (double v : {r_hi, r_low, nr_hi, nr_low, beta}) {
    if (!std::isfinite(v)) throw Error(Errc::invalid_argument, "rescale anchors must be finite");
  }
  if (r_hi == r_low) {
    throw Error(Errc::singular_system, "FR extremal scores coincide (R_hi == R_low)");
  }
  if (nr_hi == nr_low) {
    throw Error(Errc::singular_system, "NR extremal scores coincide (NR_hi == NR_low)");
  }
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw Error(Errc::invalid_argument, "beta must lie in [0, 1)");
  }
  RescaleParams p;
  p.r_hi = r_hi;
  p.r_low = r_low;
  p.nr_hi = nr_hi;
  p.nr_low = nr_low;
  p.beta = beta;
  p.a1 = 1.0 / (r_hi - r_low);
  p.b1 = -p.a1 * r_low;
  p.a2 = (1.0 - beta) / (nr_hi - nr_low);
  p.b2 = beta - p.a2 * nr_low;
  return p;
}

double rescale_fr(double q_r, const RescaleParams& p) {
  return std::clamp(p.a1 * q_r + p.b1, 0.0, 1.0);
}

double rescale_nr(double q_nr, const RescaleParams& p) {
  return std::clamp(p.a2 * q_nr + p.b2, p.beta, 1.0);
}

double general_2step(double q_r, double q_nr, const RescaleParams& p) {
  return rescale_fr(q_r, p) * rescale_nr(q_nr, p);
}

double select_beta(std::span<const double> q_r, std::span<const double> q_nr,
                   std::span<const double> mos, const Extremals& ex, double grid_step) {
  if (q_r.size() != q_nr.size() || q_r.size() != mos.size()) {
    throw Error(Errc::dimension_mismatch, "beta search inputs differ in length");
  }
  if (q_r.size() < kMinBetaRecords) {
    throw Error(Errc::degenerate_input, "beta search needs at least " +
                                            std::to_string(kMinBetaRecords) + " records");
  }
  if (!(grid_step > 0.0 && grid_step < 1.0)) {
    throw Error(Errc::invalid_argument, "beta grid step must lie in (0, 1)");
  }
  if (std::all_of(mos.begin(), mos.end(), [&](double m) { return m == mos.front(); })) {
    throw Error(Errc::degenerate_input, "beta search: MOS is constant");
  }

  const auto steps = static_cast<std::size_t>(std::ceil(1.0 / grid_step - 1e-9));
  std::vector<double> pred(q_r.size());
  double best_beta = 0.0;
  double best_rho = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < steps; ++k) {
    const double beta = static_cast<double>(k) * grid_step;
    const auto p = derive_rescale(ex.r_hi, ex.r_low, ex.nr_hi, ex.nr_low, beta);
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = general_2step(q_r[i], q_nr[i], p);
    if (std::all_of(pred.begin(), pred.end(), [&](double v) { return v == pred.front(); })) {
      continue;
    }
    const double rho = eval::srocc(pred, mos);
    if (rho > best_rho) {
      best_rho = rho;
      best_beta = beta;
      any = true;
    }
  }
  if (!any) throw Error(Errc::degenerate_input, "beta search: predictions constant for every beta");
  return best_beta;
}

}  // namespace twostepqa::fusion
