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
#include <vector>

namespace twostepqa::eval {

/// 1-based ranks; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson product-moment correlation (two-pass). Needs n >= 3 and
/// non-constant inputs of equal length.
double pcc(std::span<const double> x, std::span<const double> y);

/// Spearman rank-order correlation: Pearson correlation of average ranks.
double srocc(std::span<const double> x, std::span<const double> y);

/// Median; even counts average the two middle values.
double median(std::span<const double> values);

}  // namespace twostepqa::eval
