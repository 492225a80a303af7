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

#include <array>
#include <span>

namespace twostepqa::eval {

/// Five-parameter monotone logistic used to map objective scores onto MOS
/// before computing PCC:
///
///   f(x) = b1 * (1/2 - 1 / (1 + exp(b2 * (x - b3)))) + b4 * x + b5
struct LogisticFit {
  std::array<double, 5> params{};
  bool converged = false;
  /// True when the nonlinear fit was rejected and params hold a least-squares
  /// line (b1 = b2 = b3 = 0).
  bool linear_fallback = false;
  double residual = 0;  ///< root-mean-square error of the mapping

  double operator()(double x) const;
};

inline constexpr std::size_t kMinLogisticPoints = 5;

double logistic5(const std::array<double, 5>& b, double x);

/// Levenberg-Marquardt fit from two starts (data-extreme initialization and
/// the least-squares line); the lower-residual monotone solution wins.
LogisticFit fit_logistic(std::span<const double> scores, std::span<const double> mos);

/// PCC between MOS and the logistic-mapped scores.
double mapped_pcc(std::span<const double> scores, std::span<const double> mos);

}  // namespace twostepqa::eval
