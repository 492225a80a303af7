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

#include "twostepqa/kernels.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "twostepqa/error.hpp"

namespace twostepqa::kernels {

GaussianWindow GaussianWindow::gaussian(int radius, double sigma) {
  if (radius < 1) throw Error(Errc::invalid_argument, "window radius must be >= 1");
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw Error(Errc::invalid_argument, "window sigma must be positive");
  }
  std::vector<double> taps(2 * static_cast<std::size_t>(radius) + 1);
  for (int k = -radius; k <= radius; ++k) {
    taps[static_cast<std::size_t>(k + radius)] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= sum;
  // Enforce exact mirror symmetry after normalization.
  for (int k = 1; k <= radius; ++k) {
    taps[static_cast<std::size_t>(radius - k)] = taps[static_cast<std::size_t>(radius + k)];
  }
  return GaussianWindow(radius, sigma, std::move(taps));
}

GaussianWindow GaussianWindow::box(int radius) {
  if (radius < 1) throw Error(Errc::invalid_argument, "window radius must be >= 1");
  const std::size_t n = 2 * static_cast<std::size_t>(radius) + 1;
  return GaussianWindow(radius, std::numeric_limits<double>::infinity(),
                        std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

GaussianWindow ssim_window() { return GaussianWindow::gaussian(5, 1.5); }
GaussianWindow niqe_window() { return GaussianWindow::gaussian(3, 7.0 / 6.0); }

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

namespace {

void require_valid_size(const LumaImage& img, const GaussianWindow& w) {
  const std::size_t span = w.span();
  if (img.width() < span || img.height() < span) {
    throw Error(Errc::image_too_small,
                "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " smaller than " + std::to_string(span) + "-tap window");
  }
}

}  // namespace

LumaImage convolve_separable(const LumaImage& img, const GaussianWindow& w, Border border) {
  const auto& taps = w.taps();
  const std::size_t r = static_cast<std::size_t>(w.radius());
  const std::size_t span = taps.size();
  const std::size_t W = img.width();
  const std::size_t H = img.height();

  if (border == Border::valid) {
    require_valid_size(img, w);
    const std::size_t ow = W - 2 * r;
    const std::size_t oh = H - 2 * r;
    // Row pass keeps all rows, column pass trims them.
    std::vector<double> tmp(ow * H);
    for (std::size_t y = 0; y < H; ++y) {
      const auto src = img.row(y);
      double* dst = tmp.data() + y * ow;
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0;
        for (std::size_t k = 0; k < span; ++k) acc += taps[k] * src[x + k];
        dst[x] = acc;
      }
    }
    std::vector<double> out(ow * oh, 0.0);
    for (std::size_t y = 0; y < oh; ++y) {
      double* dst = out.data() + y * ow;
      for (std::size_t k = 0; k < span; ++k) {
        const double t = taps[k];
        const double* src = tmp.data() + (y + k) * ow;
        for (std::size_t x = 0; x < ow; ++x) dst[x] += t * src[x];
      }
    }
    return LumaImage(ow, oh, std::move(out));
  }

  const auto ri = static_cast<std::ptrdiff_t>(r);
  std::vector<double> padded(W + 2 * r);
  std::vector<double> tmp(W * H);
  for (std::size_t y = 0; y < H; ++y) {
    const auto src = img.row(y);
    for (std::size_t i = 0; i < padded.size(); ++i) {
      padded[i] = src[reflect_index(static_cast<std::ptrdiff_t>(i) - ri, W)];
    }
    double* dst = tmp.data() + y * W;
    for (std::size_t x = 0; x < W; ++x) {
      double acc = 0;
      for (std::size_t k = 0; k < span; ++k) acc += taps[k] * padded[x + k];
      dst[x] = acc;
    }
  }
  std::vector<double> out(W * H, 0.0);
  for (std::size_t y = 0; y < H; ++y) {
    double* dst = out.data() + y * W;
    for (std::size_t k = 0; k < span; ++k) {
      const std::size_t sy =
          reflect_index(static_cast<std::ptrdiff_t>(y + k) - ri, H);
      const double t = taps[k];
      const double* src = tmp.data() + sy * W;
      for (std::size_t x = 0; x < W; ++x) dst[x] += t * src[x];
    }
  }
  return LumaImage(W, H, std::move(out));
}

LumaImage multiply(const LumaImage& a, const LumaImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(Errc::dimension_mismatch, "pointwise product of differently sized images");
  }
  std::vector<double> out(a.size());
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa[i] * pb[i];
  return LumaImage(a.width(), a.height(), std::move(out));
}

LocalMoments local_moments(const LumaImage& img, const GaussianWindow& w, Border border) {
  LumaImage mu = convolve_separable(img, w, border);
  LumaImage sigma = convolve_separable(multiply(img, img), w, border);
  auto s = sigma.pixels();
  const auto m = mu.pixels();
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::sqrt(std::max(0.0, s[i] - m[i] * m[i]));
  }
  return {std::move(mu), std::move(sigma)};
}

LumaImage downsample_dyadic(const LumaImage& img) {
  if (img.width() < 2 || img.height() < 2) {
    throw Error(Errc::image_too_small,
                "dyadic downsampling needs at least 2x2, got " + std::to_string(img.width()) +
                    "x" + std::to_string(img.height()));
  }
  const std::size_t ow = img.width() / 2;
  const std::size_t oh = img.height() / 2;
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    const auto r0 = img.row(2 * y);
    const auto r1 = img.row(2 * y + 1);
    for (std::size_t x = 0; x < ow; ++x) {
      out[y * ow + x] = 0.25 * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
    }
  }
  return LumaImage(ow, oh, std::move(out));
}

}  // namespace twostepqa::kernels
