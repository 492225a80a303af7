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

#include "twostepqa/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "twostepqa/correlation.hpp"
#include "twostepqa/error.hpp"

namespace twostepqa::eval {

double logistic5(const std::array<double, 5>& b, double x) {
  return b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (x - b[2])))) + b[3] * x + b[4];
}

double LogisticFit::operator()(double x) const { return logistic5(params, x); }

namespace {

// Amplitude and slope are optimized as b = B tanh(t / B). Step-like or
// linear data have no finite optimum for them; the bound keeps the fitted
// mapping continuous in the data.
constexpr double kMaxAmplitude = 20.0;
constexpr double kMaxSlope = 25.0;

double bounded(double t, double bound) { return bound * std::tanh(t / bound); }

double unbounded(double b, double bound) {
  const double r = std::clamp(b / bound, -0.999, 0.999);
  return bound * std::atanh(r);
}

// Residual functor in standardized coordinates u = (x - mx) / sx,
// v = (y - my) / sy, over the internal parameters (t1, t2, b3, b4, b5).
struct LogisticResidual : Eigen::DenseFunctor<double> {
  LogisticResidual(const std::vector<double>& u, const std::vector<double>& v)
      : Eigen::DenseFunctor<double>(5, static_cast<int>(u.size())), u_(u), v_(v) {}

  static std::array<double, 5> params(const InputType& t) {
    return {bounded(t(0), kMaxAmplitude), bounded(t(1), kMaxSlope), t(2), t(3), t(4)};
  }

  int operator()(const InputType& t, ValueType& fvec) const {
    const auto p = params(t);
    for (std::size_t i = 0; i < u_.size(); ++i) {
      fvec(static_cast<Eigen::Index>(i)) = logistic5(p, u_[i]) - v_[i];
    }
    return 0;
  }

  int df(const InputType& t, JacobianType& jac) const {
    const auto p = params(t);
    const double th1 = std::tanh(t(0) / kMaxAmplitude);
    const double th2 = std::tanh(t(1) / kMaxSlope);
    const double d1 = 1.0 - th1 * th1;
    const double d2 = 1.0 - th2 * th2;
    for (std::size_t i = 0; i < u_.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double z = p[1] * (u_[i] - p[2]);
      // s = 1 / (1 + e^z); ds/dz = -s (1 - s)
      const double s = z > 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
      const double ds_dz = -s * (1.0 - s);
      jac(r, 0) = (0.5 - s) * d1;
      jac(r, 1) = -p[0] * ds_dz * (u_[i] - p[2]) * d2;
      jac(r, 2) = p[0] * ds_dz * p[1];
      jac(r, 3) = u_[i];
      jac(r, 4) = 1.0;
    }
    return 0;
  }

 private:
  const std::vector<double>& u_;
  const std::vector<double>& v_;
};

struct Candidate {
  std::array<double, 5> params;
  double sse;
  bool converged;
};

double sse_of(const std::array<double, 5>& p, const std::vector<double>& u,
              const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = logistic5(p, u[i]) - v[i];
    s += d * d;
  }
  return s;
}

bool is_monotone(const std::array<double, 5>& p, double lo, double hi) {
  constexpr int kSteps = 256;
  int sign = 0;
  for (int k = 0; k <= kSteps; ++k) {
    const double u = lo + (hi - lo) * k / kSteps;
    const double z = p[1] * (u - p[2]);
    const double s = z > 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    const double slope = p[0] * p[1] * s * (1.0 - s) + p[3];
    if (std::abs(slope) < 1e-12) continue;
    const int sg = slope > 0 ? 1 : -1;
    if (sign == 0) sign = sg;
    if (sg != sign) return false;
  }
  return true;
}

std::optional<Candidate> run_lm(const std::array<double, 5>& start, const std::vector<double>& u,
                                const std::vector<double>& v) {
  LogisticResidual functor(u, v);
  Eigen::LevenbergMarquardt<LogisticResidual> lm(functor);
  lm.setMaxfev(4000);
  lm.setXtol(1e-12);
  lm.setFtol(1e-14);
  Eigen::VectorXd t(5);
  t << unbounded(start[0], kMaxAmplitude), unbounded(start[1], kMaxSlope), start[2], start[3],
      start[4];
  const auto status = lm.minimize(t);
  const auto p = LogisticResidual::params(t);
  if (!std::all_of(p.begin(), p.end(), [](double x) { return std::isfinite(x); })) {
    return std::nullopt;
  }
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  const bool converged = status == Status::RelativeReductionTooSmall ||
                         status == Status::RelativeErrorTooSmall ||
                         status == Status::RelativeErrorAndReductionTooSmall ||
                         status == Status::CosinusTooSmall ||
                         status == Status::FtolTooSmall || status == Status::XtolTooSmall ||
                         status == Status::GtolTooSmall;
  const double sse = sse_of(p, u, v);
  if (!std::isfinite(sse)) return std::nullopt;
  return Candidate{p, sse, converged};
}

}  // namespace

LogisticFit fit_logistic(std::span<const double> scores, std::span<const double> mos) {
  if (scores.size() != mos.size()) {
    throw Error(Errc::dimension_mismatch, "logistic fit inputs differ in length");
  }
  if (scores.size() < kMinLogisticPoints) {
    throw Error(Errc::degenerate_input, "logistic fit needs at least 5 points");
  }
  const std::size_t n = scores.size();
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(scores.begin(), scores.end(), 0.0) / nd;
  const double my = std::accumulate(mos.begin(), mos.end(), 0.0) / nd;
  double vx = 0, vy = 0, cxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i]) || !std::isfinite(mos[i])) {
      throw Error(Errc::non_finite, "logistic fit input is not finite");
    }
    vx += (scores[i] - mx) * (scores[i] - mx);
    vy += (mos[i] - my) * (mos[i] - my);
    cxy += (scores[i] - mx) * (mos[i] - my);
  }
  if (vx == 0) throw Error(Errc::degenerate_input, "logistic fit: scores are constant");
  const double sx = std::sqrt(vx / nd);
  const double sy = vy > 0 ? std::sqrt(vy / nd) : 1.0;

  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (scores[i] - mx) / sx;
    v[i] = (mos[i] - my) / sy;
  }
  const auto [umin, umax] = std::minmax_element(u.begin(), u.end());
  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  const double u_range = *umax - *umin;
  std::vector<double> us = u;
  const double u_median = median(us);

  // Least-squares line in standardized coordinates: slope = corr, intercept 0.
  const double corr = vy > 0 ? cxy / std::sqrt(vx * vy) : 0.0;
  const double direction = corr >= 0 ? 1.0 : -1.0;

  const std::array<double, 5> extreme_start{*vmax - *vmin, direction * 4.0 / u_range, u_median,
                                            0.0, 0.0};
  const std::array<double, 5> linear_start{0.0, direction * 4.0 / u_range, u_median, corr, 0.0};

  std::optional<Candidate> best;
  for (const auto& start : {extreme_start, linear_start}) {
    auto c = run_lm(start, u, v);
    if (!c || !is_monotone(c->params, *umin, *umax)) continue;
    if (!best || c->sse < best->sse) best = c;
  }
  // An unconverged run is kept only while it still beats the straight line,
  // whose standardized residual sum is n (1 - corr^2).
  if (best && !best->converged && best->sse >= nd * (1.0 - corr * corr)) best.reset();

  LogisticFit fit;
  std::array<double, 5> p{};
  if (best) {
    p = best->params;
    fit.converged = best->converged;
  } else {
    p = {0.0, 0.0, 0.0, corr, 0.0};
    fit.linear_fallback = true;
  }
  // Back to raw coordinates.
  fit.params[0] = sy * p[0];
  fit.params[1] = p[1] / sx;
  fit.params[2] = mx + sx * p[2];
  fit.params[3] = sy * p[3] / sx;
  fit.params[4] = sy * p[4] + my - fit.params[3] * mx;
  if (fit.linear_fallback) {
    fit.params[1] = 0.0;
    fit.params[2] = 0.0;
  }
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = fit(scores[i]) - mos[i];
    sse += d * d;
  }
  fit.residual = std::sqrt(sse / nd);
  return fit;
}

double mapped_pcc(std::span<const double> scores, std::span<const double> mos) {
  const auto fit = fit_logistic(scores, mos);
  std::vector<double> mapped(scores.size());
  std::transform(scores.begin(), scores.end(), mapped.begin(), [&](double x) { return fit(x); });
  return pcc(mapped, mos);
}

}  // namespace twostepqa::eval
