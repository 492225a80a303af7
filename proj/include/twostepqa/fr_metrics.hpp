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
#include <limits>
#include <vector>

#include "twostepqa/image.hpp"
#include "twostepqa/kernels.hpp"

namespace twostepqa::fr {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// Peak signal-to-noise ratio in dB against a 255 peak.
double psnr(const LumaImage& ref, const LumaImage& dst);

/// MS-SSIM parameters. Defaults are the canonical five-scale setting:
/// 11-tap sigma 1.5 window, K1 = 0.01, K2 = 0.03, L = 255.
struct MsSsimConfig {
  int scales = 5;
  std::vector<double> scale_weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  kernels::GaussianWindow window = kernels::ssim_window();

  /// Throws invalid_argument when the invariants do not hold.
  void validate() const;
};

struct SsimStats {
  double ssim = 0.0;  ///< mean of the full SSIM map
  double cs = 0.0;    ///< mean of the contrast-structure map
};

/// Local SSIM map over the valid region (width - 2r) x (height - 2r).
LumaImage ssim_map(const LumaImage& ref, const LumaImage& dst,
                   const MsSsimConfig& cfg = {});
SsimStats ssim_stats(const LumaImage& ref, const LumaImage& dst,
                     const MsSsimConfig& cfg = {});
double ssim(const LumaImage& ref, const LumaImage& dst,
            const MsSsimConfig& cfg = {});

/// Smallest side accepted by ms_ssim(): window span * 2^(scales-1).
std::size_t ms_ssim_min_side(const MsSsimConfig& cfg);

struct MsSsimBreakdown {
  std::vector<double> cs;  ///< per-scale contrast-structure means
  double coarse_ssim = 0;  ///< full SSIM mean at the coarsest scale
  double score = 0;
};

/// Contrast-structure at scales 1..S-1, full SSIM at scale S, combined as
/// prod(cs_j^w_j) * ssim_S^w_S. Negative terms are clamped to zero before
/// the fractional power.
MsSsimBreakdown ms_ssim_breakdown(const LumaImage& ref, const LumaImage& dst,
                                  const MsSsimConfig& cfg = {});
double ms_ssim(const LumaImage& ref, const LumaImage& dst,
               const MsSsimConfig& cfg = {});

}  // namespace twostepqa::fr
