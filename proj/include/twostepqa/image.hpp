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
#include <span>
#include <vector>

namespace twostepqa {

/// Single-channel luminance plane, row-major, nominal range [0, 255].
///
/// Samples are kept in double precision from decode onwards. Construction
/// rejects zero dimensions, size mismatches and non-finite samples, so every
/// LumaImage in circulation satisfies those invariants.
class LumaImage {
 public:
  LumaImage() = default;
  LumaImage(std::size_t width, std::size_t height, double fill = 0.0);
  LumaImage(std::size_t width, std::size_t height, std::vector<double> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t x, std::size_t y) const noexcept {
    return data_[y * width_ + x];
  }
  double& operator()(std::size_t x, std::size_t y) noexcept {
    return data_[y * width_ + x];
  }

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> row(std::size_t y) const noexcept {
    return std::span<const double>(data_).subspan(y * width_, width_);
  }

  /// Sub-rectangle copy. Throws if the rectangle leaves the image.
  LumaImage crop(std::size_t x0, std::size_t y0, std::size_t w,
                 std::size_t h) const;
  LumaImage flipped_horizontal() const;

  bool operator==(const LumaImage&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

}  // namespace twostepqa
