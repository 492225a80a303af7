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

#include "twostepqa/fr_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "twostepqa/error.hpp"

namespace twostepqa::fr {

namespace {

void require_same_dims(const LumaImage& a, const LumaImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(Errc::dimension_mismatch,
                "reference is " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    ", distorted is " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

double mean_of(const LumaImage& img) {
  const auto p = img.pixels();
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

struct SsimMaps {
  LumaImage ssim;
  LumaImage cs;
};

SsimMaps compute_maps(const LumaImage& ref, const LumaImage& dst, const MsSsimConfig& cfg) {
  using kernels::Border;
  const auto& w = cfg.window;
  const auto m1 = kernels::local_moments(ref, w, Border::valid);
  const auto m2 = kernels::local_moments(dst, w, Border::valid);
  const auto e12 = kernels::convolve_separable(kernels::multiply(ref, dst), w, Border::valid);

  const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
  const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

  const std::size_t n = e12.size();
  std::vector<double> ssim(n);
  std::vector<double> cs(n);
  const auto mu1 = m1.mu.pixels();
  const auto mu2 = m2.mu.pixels();
  const auto s1 = m1.sigma.pixels();
  const auto s2 = m2.sigma.pixels();
  const auto x12 = e12.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma12 = x12[i] - mu1[i] * mu2[i];
    const double contrast = (2 * sigma12 + c2) / (s1[i] * s1[i] + s2[i] * s2[i] + c2);
    const double luminance = (2 * mu1[i] * mu2[i] + c1) / (mu1[i] * mu1[i] + mu2[i] * mu2[i] + c1);
    cs[i] = contrast;
    ssim[i] = luminance * contrast;
  }
  return {LumaImage(e12.width(), e12.height(), std::move(ssim)),
          LumaImage(e12.width(), e12.height(), std::move(cs))};
}

}  // namespace

void MsSsimConfig::validate() const {
  if (scales < 1) throw Error(Errc::invalid_argument, "MS-SSIM needs at least one scale");
  if (scale_weights.size() != static_cast<std::size_t>(scales)) {
    throw Error(Errc::invalid_argument, "MS-SSIM scale weight count must equal scale count");
  }
  const double sum = std::accumulate(scale_weights.begin(), scale_weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-3) {
    throw Error(Errc::invalid_argument, "MS-SSIM scale weights must sum to 1");
  }
  if (!(k1 > 0) || !(k2 > 0) || !(dynamic_range > 0)) {
    throw Error(Errc::invalid_argument, "K1, K2 and dynamic range must be positive");
  }
}

double psnr(const LumaImage& ref, const LumaImage& dst) {
  require_same_dims(ref, dst);
  const auto a = ref.pixels();
  const auto b = dst.pixels();
  double sse = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sse += d * d;
  }
  if (sse == 0) return kPsnrIdentical;
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

LumaImage ssim_map(const LumaImage& ref, const LumaImage& dst, const MsSsimConfig& cfg) {
  require_same_dims(ref, dst);
  cfg.validate();
  return compute_maps(ref, dst, cfg).ssim;
}

SsimStats ssim_stats(const LumaImage& ref, const LumaImage& dst, const MsSsimConfig& cfg) {
  require_same_dims(ref, dst);
  cfg.validate();
  const auto maps = compute_maps(ref, dst, cfg);
  return {mean_of(maps.ssim), mean_of(maps.cs)};
}

double ssim(const LumaImage& ref, const LumaImage& dst, const MsSsimConfig& cfg) {
  return ssim_stats(ref, dst, cfg).ssim;
}

std::size_t ms_ssim_min_side(const MsSsimConfig& cfg) {
  return cfg.window.span() << (cfg.scales - 1);
}

MsSsimBreakdown ms_ssim_breakdown(const LumaImage& ref, const LumaImage& dst,
                                  const MsSsimConfig& cfg) {
  require_same_dims(ref, dst);
  cfg.validate();
  const std::size_t min_side = ms_ssim_min_side(cfg);
  if (std::min(ref.width(), ref.height()) < min_side) {
    throw Error(Errc::image_too_small,
                "MS-SSIM with " + std::to_string(cfg.scales) + " scales needs min side >= " +
                    std::to_string(min_side) + ", got " + std::to_string(ref.width()) + "x" +
                    std::to_string(ref.height()));
  }

  MsSsimBreakdown out;
  LumaImage a = ref;
  LumaImage b = dst;
  double score = 1.0;
  for (int s = 0; s < cfg.scales; ++s) {
    const auto stats = ssim_stats(a, b, cfg);
    const double weight = cfg.scale_weights[static_cast<std::size_t>(s)];
    if (s + 1 < cfg.scales) {
      out.cs.push_back(stats.cs);
      score *= std::pow(std::max(0.0, stats.cs), weight);
      a = kernels::downsample_dyadic(a);
      b = kernels::downsample_dyadic(b);
    } else {
      out.coarse_ssim = stats.ssim;
      score *= std::pow(std::max(0.0, stats.ssim), weight);
    }
  }
  out.score = score;
  return out;
}

double ms_ssim(const LumaImage& ref, const LumaImage& dst, const MsSsimConfig& cfg) {
  return ms_ssim_breakdown(ref, dst, cfg).score;
}

}  // namespace twostepqa::fr
