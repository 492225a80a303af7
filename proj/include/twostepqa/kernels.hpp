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

#include <cstddef>
#include <vector>

#include "twostepqa/image.hpp"

namespace twostepqa::kernels {

/// Normalized symmetric 1-D window of 2*radius+1 taps.
class GaussianWindow {
 public:
  /// Sampled Gaussian exp(-k^2 / (2 sigma^2)), k = -radius..radius,
  /// normalized to unit sum.
  static GaussianWindow gaussian(int radius, double sigma);
  /// Flat window (the sigma -> infinity limit).
  static GaussianWindow box(int radius);

  int radius() const noexcept { return radius_; }
  double sigma() const noexcept { return sigma_; }
  std::size_t span() const noexcept { return taps_.size(); }
  const std::vector<double>& taps() const noexcept { return taps_; }

 private:
  GaussianWindow(int radius, double sigma, std::vector<double> taps)
      : radius_(radius), sigma_(sigma), taps_(std::move(taps)) {}

  int radius_;
  double sigma_;
  std::vector<double> taps_;
};

/// 11 taps, sigma 1.5: the SSIM / MS-SSIM local statistics window.
GaussianWindow ssim_window();
/// 7 taps, sigma 7/6: the NIQE local normalization window.
GaussianWindow niqe_window();

enum class Border {
  valid,    ///< output shrinks by 2*radius in each axis
  reflect,  ///< symmetric half-sample extension, output keeps input size
};

/// Maps an out-of-range index into [0, n) by half-sample symmetric
/// reflection (-1 -> 0, n -> n-1), repeating as needed.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept;

/// Row pass followed by column pass of the same window.
LumaImage convolve_separable(const LumaImage& img, const GaussianWindow& w,
                             Border border);

struct LocalMoments {
  LumaImage mu;
  LumaImage sigma;
};

/// Weighted local mean and standard deviation; variance is clamped at zero
/// before the square root.
LocalMoments local_moments(const LumaImage& img, const GaussianWindow& w,
                           Border border);

/// 2x2 box average followed by stride-2 decimation; output is
/// floor(width/2) x floor(height/2).
LumaImage downsample_dyadic(const LumaImage& img);

/// Pointwise product, used for second-moment maps.
LumaImage multiply(const LumaImage& a, const LumaImage& b);

}  // namespace twostepqa::kernels
