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

#include <span>

namespace twostepqa::fusion {

inline constexpr double kDefaultAlpha = 100.0;

/// MS-SSIM * (1 - min(NIQE, alpha) / alpha). NIQE is clamped to [0, alpha]
/// so the NR factor stays inside [0, 1].
double basic_2step(double ms_ssim_score, double niqe_score,
                   double alpha = kDefaultAlpha);

/// Affine maps taking the FR score onto [0, 1] and the NR score onto
/// [beta, 1], anchored at the best/worst raw scores of each model.
struct RescaleParams {
  double a1 = 1, b1 = 0, a2 = 1, b2 = 0;
  double r_hi = 1, r_low = 0, nr_hi = 1, nr_low = 0;
  double beta = 0;
};

/// Solves a1*r_hi + b1 = 1, a1*r_low + b1 = 0, a2*nr_hi + b2 = 1,
/// a2*nr_low + b2 = beta. The "hi" anchors are the best possible scores and
/// may be numerically smaller than the "low" ones.
RescaleParams derive_rescale(double r_hi, double r_low, double nr_hi,
                             double nr_low, double beta);

double rescale_fr(double q_r, const RescaleParams& p);
double rescale_nr(double q_nr, const RescaleParams& p);

/// (a1 q_r + b1) clamped to [0, 1] times (a2 q_nr + b2) clamped to
/// [beta, 1].
double general_2step(double q_r, double q_nr, const RescaleParams& p);

struct Extremals {
  double r_hi = 1, r_low = 0;
  double nr_hi = 0, nr_low = 100;
};

/// MS-SSIM over [0, 1] and NIQE over [0, 100] with reversed polarity.
inline constexpr Extremals kMsSsimNiqeExtremals{};

inline constexpr double kBetaGridStep = 0.01;
inline constexpr std::size_t kMinBetaRecords = 3;

/// Grid search over beta in {0, step, ...} < 1 maximizing SROCC of the
/// rescaled product against MOS. Ties go to the smaller beta.
double select_beta(std::span<const double> q_r, std::span<const double> q_nr,
                   std::span<const double> mos, const Extremals& extremals,
                   double grid_step = kBetaGridStep);

}  // namespace twostepqa::fusion
