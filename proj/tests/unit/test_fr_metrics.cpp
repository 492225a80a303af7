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
#include "twostepqa/error.hpp"
#include "twostepqa/fr_metrics.hpp"

namespace {

using namespace twostepqa;

// SSIM map straight from the definition, one output pixel at a time.
LumaImage ssim_map_oracle(const LumaImage& a, const LumaImage& b) {
  const auto w = kernels::ssim_window();
  const auto& t = w.taps();
  const int r = w.radius();
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  LumaImage out(a.width() - 2 * r, a.height() - 2 * r);
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = 0; dy <= 2 * r; ++dy) {
        for (int dx = 0; dx <= 2 * r; ++dx) {
          const double wt = t[static_cast<std::size_t>(dx)] * t[static_cast<std::size_t>(dy)];
          const double va = a(x + dx, y + dy);
          const double vb = b(x + dx, y + dy);
          ma += wt * va;
          mb += wt * vb;
          saa += wt * va * va;
          sbb += wt * vb * vb;
          sab += wt * va * vb;
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      out(x, y) = ((2 * ma * mb + c1) * (2 * cov + c2)) /
                  ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return out;
}

TEST(Psnr, Examples) {
  const auto img = fixtures::photo("camera");
  EXPECT_EQ(fr::psnr(img, img), fr::kPsnrIdentical);
  EXPECT_TRUE(std::isinf(fr::kPsnrIdentical) && fr::kPsnrIdentical > 0);

  auto plus_one = img;
  for (auto& v : plus_one.pixels()) v += 1;
  EXPECT_NEAR(fr::psnr(img, plus_one), 20 * std::log10(255.0), 1e-9);
  EXPECT_NEAR(fr::psnr(img, plus_one), 48.1308, 1e-3);

  EXPECT_NEAR(fr::psnr(fixtures::constant_image(8, 8, 0), fixtures::constant_image(8, 8, 255)), 0.0,
              1e-9);
}

TEST(Psnr, SymmetricAndShapeChecked) {
  const auto a = fixtures::random_image(31, 17, 1);
  const auto b = fixtures::random_image(31, 17, 2);
  EXPECT_EQ(fr::psnr(a, b), fr::psnr(b, a));
  try {
    fr::psnr(a, fixtures::random_image(17, 31, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(Ssim, Identity) {
  for (const char* name : {"camera", "coins"}) {
    const auto img = fixtures::photo(name);
    EXPECT_NEAR(fr::ssim(img, img), 1.0, 1e-9);
  }
}

TEST(Ssim, MatchesPerPixelOracle) {
  const auto ref = fixtures::random_image(64, 64, 21);
  const auto dst = fixtures::add_noise(ref, 20, 22);
  const auto map = fr::ssim_map(ref, dst);
  const auto oracle = ssim_map_oracle(ref, dst);
  ASSERT_EQ(map.width(), oracle.width());
  ASSERT_EQ(map.height(), oracle.height());
  double mean = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    EXPECT_NEAR(map.pixels()[i], oracle.pixels()[i], 1e-8);
    mean += oracle.pixels()[i];
  }
  EXPECT_NEAR(fr::ssim(ref, dst), mean / static_cast<double>(oracle.size()), 1e-8);
}

TEST(Ssim, InversionScoresBelowNoiseAtMatchedMse) {
  for (const char* name : {"camera", "coffee", "chelsea"}) {
    const auto img = fixtures::photo(name);
    auto inverted = img;
    double mse = 0;
    for (auto& v : inverted.pixels()) {
      mse += (255 - 2 * v) * (255 - 2 * v);
      v = 255 - v;
    }
    mse /= static_cast<double>(img.size());
    // Unclipped Gaussian noise rescaled to the same MSE.
    fixtures::Rng rng(7);
    std::vector<double> noise(img.size());
    double energy = 0;
    for (auto& n : noise) {
      n = rng.normal();
      energy += n * n;
    }
    const double scale = std::sqrt(mse * static_cast<double>(img.size()) / energy);
    auto noisy = img;
    for (std::size_t i = 0; i < img.size(); ++i) noisy.pixels()[i] += scale * noise[i];
    ASSERT_NEAR(fr::psnr(img, noisy), fr::psnr(img, inverted), 1e-9);
    EXPECT_LT(fr::ssim(img, inverted), fr::ssim(img, noisy)) << name;
    EXPECT_LT(fr::ssim(img, inverted), 0.0) << name;
  }
}

TEST(Ssim, Errors) {
  try {
    fr::ssim(fixtures::random_image(10, 10, 1), fixtures::random_image(10, 10, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::image_too_small);
  }
  try {
    fr::ssim(fixtures::random_image(20, 20, 1), fixtures::random_image(21, 20, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(MsSsim, Identity) {
  for (const char* name : {"camera", "coffee", "coins", "rocket"}) {
    const auto img = fixtures::photo(name);
    EXPECT_NEAR(fr::ms_ssim(img, img), 1.0, 1e-9) << name;
  }
  const auto flat = fixtures::constant_image(200, 180, 77);
  EXPECT_NEAR(fr::ms_ssim(flat, flat), 1.0, 1e-9);
}

TEST(MsSsim, LightNoiseBeatsHeavyNoise) {
  for (const char* name : {"camera", "chelsea", "coins"}) {
    const auto img = fixtures::photo(name);
    const double light = fr::ms_ssim(img, fixtures::add_noise(img, 5, 1));
    const double heavy = fr::ms_ssim(img, fixtures::add_noise(img, 30, 1));
    EXPECT_GT(light, heavy) << name;
    EXPECT_GE(heavy, 0.0);
    EXPECT_LE(light, 1.0);
  }
}

TEST(MsSsim, NonIncreasingOverJpegLadder) {
  for (const char* name : {"camera", "coffee", "chelsea", "rocket"}) {
    const auto img = fixtures::photo(name);
    double prev = 1.0;
    for (int q : {90, 50, 25, 10}) {
      const double s = fr::ms_ssim(img, fixtures::jpeg_roundtrip(img, q));
      EXPECT_LE(s, prev) << name << " q" << q;
      prev = s;
    }
  }
}

TEST(MsSsim, BreakdownCombinesScales) {
  const auto img = fixtures::photo("coins");
  const auto dst = fixtures::jpeg_roundtrip(img, 20);
  const auto b = fr::ms_ssim_breakdown(img, dst);
  const fr::MsSsimConfig cfg;
  ASSERT_EQ(b.cs.size(), 4u);
  double expect = std::pow(std::max(0.0, b.coarse_ssim), cfg.scale_weights[4]);
  for (std::size_t j = 0; j < 4; ++j) expect *= std::pow(std::max(0.0, b.cs[j]), cfg.scale_weights[j]);
  EXPECT_DOUBLE_EQ(b.score, expect);
  EXPECT_DOUBLE_EQ(fr::ms_ssim(img, dst), b.score);
  EXPECT_NEAR(b.cs[0], fr::ssim_stats(img, dst).cs, 1e-15);
}

TEST(MsSsim, NegativeTermsClampToZero) {
  // Inverting a textured image gives a negative contrast-structure term at
  // the finest scale, which zeroes the product.
  const auto img = fixtures::random_image(256, 256, 9);
  auto inverted = img;
  for (auto& v : inverted.pixels()) v = 255 - v;
  const auto b = fr::ms_ssim_breakdown(img, inverted);
  EXPECT_LT(b.cs[0], 0.0);
  EXPECT_EQ(b.score, 0.0);
}

TEST(MsSsim, MinimumSideAndErrors) {
  EXPECT_EQ(fr::ms_ssim_min_side({}), 176u);
  const auto ok = fixtures::random_image(176, 176, 1);
  EXPECT_NO_THROW(fr::ms_ssim(ok, fixtures::add_noise(ok, 3, 2)));
  try {
    fr::ms_ssim(fixtures::random_image(175, 300, 1), fixtures::random_image(175, 300, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::image_too_small);
  }
  try {
    fr::ms_ssim(ok, fixtures::random_image(176, 177, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

TEST(MsSsimConfig, Validation) {
  fr::MsSsimConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.scale_weights = {0.5, 0.5};
  EXPECT_THROW(cfg.validate(), Error);  // length differs from scales
  cfg = {};
  cfg.k1 = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.scale_weights = {0.2, 0.2, 0.2, 0.2, 0.3};
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
