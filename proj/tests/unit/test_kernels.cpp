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

#include <numeric>

#include "test_support.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/kernels.hpp"

namespace {

using namespace twostepqa;
using kernels::Border;
using kernels::GaussianWindow;

// Dense 2-D correlation with the outer-product kernel, one pixel at a time.
LumaImage dense_convolve(const LumaImage& img, const GaussianWindow& w, Border border) {
  const auto& t = w.taps();
  const int r = w.radius();
  const auto W = static_cast<std::ptrdiff_t>(img.width());
  const auto H = static_cast<std::ptrdiff_t>(img.height());
  const std::ptrdiff_t off = border == Border::valid ? r : 0;
  const auto ow = static_cast<std::size_t>(border == Border::valid ? W - 2 * r : W);
  const auto oh = static_cast<std::size_t>(border == Border::valid ? H - 2 * r : H);
  LumaImage out(ow, oh);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      double acc = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(ox) + off + dx;
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(oy) + off + dy;
          const auto x = kernels::reflect_index(sx, img.width());
          const auto y = kernels::reflect_index(sy, img.height());
          acc += t[static_cast<std::size_t>(dy + r)] * t[static_cast<std::size_t>(dx + r)] * img(x, y);
        }
      }
      out(ox, oy) = acc;
    }
  }
  return out;
}

double max_abs_diff(const LumaImage& a, const LumaImage& b) {
  EXPECT_EQ(a.width(), b.width());
  EXPECT_EQ(a.height(), b.height());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.pixels()[i] - b.pixels()[i]));
  return m;
}

TEST(GaussianWindow, TapsNormalizedAndSymmetric) {
  for (const auto& w : {kernels::ssim_window(), kernels::niqe_window(), GaussianWindow::box(1),
                        GaussianWindow::gaussian(4, 0.7)}) {
    const auto& t = w.taps();
    ASSERT_EQ(t.size(), static_cast<std::size_t>(2 * w.radius() + 1));
    EXPECT_NEAR(std::accumulate(t.begin(), t.end(), 0.0), 1.0, 1e-12);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i], t[t.size() - 1 - i]);
  }
  EXPECT_EQ(kernels::ssim_window().span(), 11u);
  EXPECT_EQ(kernels::niqe_window().span(), 7u);
}

TEST(GaussianWindow, RejectsBadParameters) {
  EXPECT_THROW(GaussianWindow::gaussian(0, 1.0), Error);
  EXPECT_THROW(GaussianWindow::gaussian(2, 0.0), Error);
  EXPECT_THROW(GaussianWindow::gaussian(2, -1.0), Error);
}

TEST(ReflectIndex, HalfSampleSymmetric) {
  EXPECT_EQ(kernels::reflect_index(-1, 5), 0u);
  EXPECT_EQ(kernels::reflect_index(-2, 5), 1u);
  EXPECT_EQ(kernels::reflect_index(5, 5), 4u);
  EXPECT_EQ(kernels::reflect_index(6, 5), 3u);
  EXPECT_EQ(kernels::reflect_index(3, 5), 3u);
  EXPECT_EQ(kernels::reflect_index(-3, 2), 1u);
  EXPECT_EQ(kernels::reflect_index(7, 1), 0u);
}

TEST(ConvolveSeparable, ConstantStaysConstant) {
  const auto img = fixtures::constant_image(20, 17, 42.5);
  for (auto border : {Border::valid, Border::reflect}) {
    const auto out = kernels::convolve_separable(img, kernels::ssim_window(), border);
    for (double v : out.pixels()) EXPECT_NEAR(v, 42.5, 1e-12);
  }
}

TEST(ConvolveSeparable, ImpulseGivesOuterProduct) {
  LumaImage img(15, 15, 0.0);
  img(7, 7) = 1.0;
  const auto w = kernels::niqe_window();
  const auto out = kernels::convolve_separable(img, w, Border::reflect);
  ASSERT_EQ(out.width(), 15u);
  const auto& t = w.taps();
  for (std::size_t y = 0; y < 15; ++y) {
    for (std::size_t x = 0; x < 15; ++x) {
      const auto dx = static_cast<int>(x) - 7;
      const auto dy = static_cast<int>(y) - 7;
      const double expect = (std::abs(dx) <= 3 && std::abs(dy) <= 3)
                                ? t[static_cast<std::size_t>(dx + 3)] * t[static_cast<std::size_t>(dy + 3)]
                                : 0.0;
      EXPECT_NEAR(out(x, y), expect, 1e-15);
    }
  }
}

TEST(ConvolveSeparable, MatchesDenseOracle) {
  const auto img = fixtures::random_image(16, 16, 11);
  for (const auto& w : {kernels::ssim_window(), kernels::niqe_window(), GaussianWindow::box(1)}) {
    EXPECT_LT(max_abs_diff(kernels::convolve_separable(img, w, Border::reflect),
                           dense_convolve(img, w, Border::reflect)),
              1e-10);
    if (img.width() > 2 * static_cast<std::size_t>(w.radius())) {
      EXPECT_LT(max_abs_diff(kernels::convolve_separable(img, w, Border::valid),
                             dense_convolve(img, w, Border::valid)),
                1e-10);
    }
  }
}

TEST(ConvolveSeparable, ValidShrinksAndRejectsSmall) {
  const auto img = fixtures::random_image(20, 12, 1);
  const auto out = kernels::convolve_separable(img, kernels::ssim_window(), Border::valid);
  EXPECT_EQ(out.width(), 10u);
  EXPECT_EQ(out.height(), 2u);
  try {
    kernels::convolve_separable(fixtures::random_image(10, 30, 1), kernels::ssim_window(), Border::valid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::image_too_small);
  }
}

TEST(LocalMoments, ConstantImage) {
  const auto m = kernels::local_moments(fixtures::constant_image(12, 12, 9), kernels::niqe_window(),
                                        Border::reflect);
  for (double v : m.mu.pixels()) EXPECT_NEAR(v, 9.0, 1e-12);
  for (double v : m.sigma.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(LocalMoments, CheckerboardHasPositiveSigma) {
  LumaImage img(9, 9);
  for (std::size_t y = 0; y < 9; ++y)
    for (std::size_t x = 0; x < 9; ++x) img(x, y) = (x + y) % 2 ? 255.0 : 0.0;
  for (auto border : {Border::reflect, Border::valid}) {
    const auto m = kernels::local_moments(img, GaussianWindow::box(1), border);
    for (double v : m.sigma.pixels()) EXPECT_GT(v, 0.0);
  }
}

TEST(LocalMoments, MatchesPerPixelOracle) {
  const auto img = fixtures::random_image(16, 16, 5);
  const auto w = kernels::niqe_window();
  const auto m = kernels::local_moments(img, w, Border::reflect);
  const auto& t = w.taps();
  const int r = w.radius();
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) {
      double s1 = 0, s2 = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const double v = img(kernels::reflect_index(static_cast<std::ptrdiff_t>(x) + dx, 16),
                               kernels::reflect_index(static_cast<std::ptrdiff_t>(y) + dy, 16));
          const double wt = t[static_cast<std::size_t>(dx + r)] * t[static_cast<std::size_t>(dy + r)];
          s1 += wt * v;
          s2 += wt * v * v;
        }
      }
      EXPECT_NEAR(m.mu(x, y), s1, 1e-8);
      EXPECT_NEAR(m.sigma(x, y), std::sqrt(std::max(0.0, s2 - s1 * s1)), 1e-8);
    }
  }
}

TEST(DownsampleDyadic, Examples) {
  const auto c = kernels::downsample_dyadic(fixtures::constant_image(4, 4, 7));
  EXPECT_EQ(c, fixtures::constant_image(2, 2, 7));
  const auto half = kernels::downsample_dyadic(LumaImage(2, 2, std::vector<double>{0, 0, 255, 255}));
  EXPECT_EQ(half, LumaImage(1, 1, std::vector<double>{127.5}));
  EXPECT_EQ(kernels::downsample_dyadic(fixtures::random_image(7, 5, 2)).width(), 3u);
  EXPECT_EQ(kernels::downsample_dyadic(fixtures::random_image(7, 5, 2)).height(), 2u);
  try {
    kernels::downsample_dyadic(fixtures::random_image(1, 4, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::image_too_small);
  }
}

TEST(Multiply, PointwiseAndShapeChecked) {
  const LumaImage a(2, 1, std::vector<double>{2, 3});
  const LumaImage b(2, 1, std::vector<double>{4, 5});
  EXPECT_EQ(kernels::multiply(a, b), LumaImage(2, 1, std::vector<double>{8, 15}));
  EXPECT_THROW(kernels::multiply(a, LumaImage(1, 2)), Error);
}

}  // namespace
