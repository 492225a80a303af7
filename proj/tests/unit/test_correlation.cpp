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

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "twostepqa/correlation.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/logistic.hpp"

namespace {

using namespace twostepqa;
using namespace twostepqa::eval;

// Single-pass textbook formula from raw sums.
double pcc_one_pass(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const auto n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return static_cast<double>((n * sxy - sx * sy) /
                             std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

// Average ranks by counting: rank = 1 + #less + (#equal - 1) / 2.
std::vector<double> ranks_by_counting(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  fixtures::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-10, 10);
  return v;
}

TEST(Srocc, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(srocc(x, std::vector<double>{10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(srocc(x, std::vector<double>{4, 3, 2, 1}), -1.0);
  // Ranks of {1,2,2,3} are {1,2.5,2.5,4}; Pearson against {1,3,2,4}
  // by hand: 4.5 / sqrt(4.5 * 5) = 0.9486832980505138.
  const std::vector<double> tied{1, 2, 2, 3}, other{1, 3, 2, 4};
  EXPECT_NEAR(srocc(tied, other), 4.5 / std::sqrt(4.5 * 5.0), 1e-15);
  EXPECT_EQ(average_ranks(tied), (std::vector<double>{1, 2.5, 2.5, 4}));
}

TEST(Srocc, MatchesRankOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = random_vector(20, seed);
    const auto y = random_vector(20, seed + 100);
    x[3] = x[7];  // one tie
    EXPECT_EQ(average_ranks(x), ranks_by_counting(x));
    EXPECT_NEAR(srocc(x, y), pcc_one_pass(ranks_by_counting(x), ranks_by_counting(y)), 1e-12);
  }
}

TEST(Srocc, InvariantUnderMonotoneTransforms) {
  const auto x = random_vector(50, 1), y = random_vector(50, 2);
  std::vector<double> tx(x.size());
  std::transform(x.begin(), x.end(), tx.begin(), [](double v) { return std::exp(v) + 3 * v; });
  EXPECT_EQ(srocc(tx, y), srocc(x, y));
}

TEST(Pcc, Examples) {
  const auto x = random_vector(30, 3);
  std::vector<double> affine(x.size()), neg(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    affine[i] = 2 * x[i] + 3;
    neg[i] = -x[i];
  }
  EXPECT_NEAR(pcc(x, affine), 1.0, 1e-12);
  EXPECT_NEAR(pcc(x, neg), -1.0, 1e-12);
}

TEST(Pcc, MatchesOnePassOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_vector(20, seed), y = random_vector(20, seed + 50);
    EXPECT_NEAR(pcc(x, y), pcc_one_pass(x, y), 1e-12);
  }
}

TEST(Pcc, InvariantUnderPositiveAffine) {
  const auto x = random_vector(40, 8), y = random_vector(40, 9);
  std::vector<double> ax(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ax[i] = 7.5 * x[i] - 11;
  EXPECT_NEAR(pcc(ax, y), pcc(x, y), 1e-12);
}

TEST(Correlation, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, flat{5, 5, 5}, two{1, 2};
  EXPECT_THROW(pcc(a, b), Error);
  EXPECT_THROW(srocc(a, b), Error);
  try {
    pcc(a, flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_input);
  }
  EXPECT_THROW(srocc(flat, a), Error);
  EXPECT_THROW(pcc(two, two), Error);
  const std::vector<double> bad{1, std::nan(""), 3};
  EXPECT_THROW(pcc(a, bad), Error);
}

TEST(Median, OddEvenAndBounds) {
  EXPECT_EQ(median(std::vector<double>{3, 1, 2}), 2.0);
  EXPECT_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median(std::vector<double>{}), Error);
  const auto v = random_vector(101, 4);
  const double m = median(v);
  EXPECT_GE(m, *std::min_element(v.begin(), v.end()));
  EXPECT_LE(m, *std::max_element(v.begin(), v.end()));
}

TEST(Logistic, RecoversNoiselessLogistic) {
  const std::array<double, 5> truth{60, 0.8, 5, 0.5, 40};
  std::vector<double> x, y;
  for (int i = 0; i <= 40; ++i) {
    x.push_back(i * 0.25);
    y.push_back(logistic5(truth, x.back()));
  }
  const auto fit = fit_logistic(x, y);
  EXPECT_TRUE(fit.converged);
  EXPECT_FALSE(fit.linear_fallback);
  EXPECT_LT(fit.residual, 1e-6);
  EXPECT_NEAR(mapped_pcc(x, y), 1.0, 1e-6);
}

TEST(Logistic, LinearDataNotWorseThanRawPcc) {
  fixtures::Rng rng(10);
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(0, 1);
    y[i] = 30 + 50 * x[i] + rng.normal();
  }
  EXPECT_GE(mapped_pcc(x, y), pcc(x, y) - 1e-9);
  std::vector<double> exact(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) exact[i] = 2 * x[i] + 1;
  EXPECT_GE(mapped_pcc(x, exact), pcc(x, exact) - 1e-9);
}

TEST(Logistic, MappingIsMonotoneOverRange) {
  fixtures::Rng rng(11);
  std::vector<double> x(60), y(60);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(0.7, 1.0);
    y[i] = 100 / (1 + std::exp(-25 * (x[i] - 0.88))) + 5 * rng.normal();
  }
  const auto fit = fit_logistic(x, y);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  double prev = fit(*lo);
  for (int k = 1; k <= 200; ++k) {
    const double v = fit(*lo + (*hi - *lo) * k / 200.0);
    EXPECT_GE(v, prev - 1e-9);
    prev = v;
  }
}

TEST(Logistic, TooFewPoints) {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 5, 9};
  EXPECT_THROW(fit_logistic(x, y), Error);
  const std::vector<double> flat(6, 1.0), y6{1, 2, 3, 4, 5, 6};
  EXPECT_THROW(fit_logistic(flat, y6), Error);
}

}  // namespace
