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

#include "twostepqa/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twostepqa/error.hpp"

namespace twostepqa {

namespace {

void check_dims(std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) {
    throw Error(Errc::zero_dimension, "image has zero width or height (" +
                                          std::to_string(width) + "x" +
                                          std::to_string(height) + ")");
  }
}

}  // namespace

LumaImage::LumaImage(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  if (!std::isfinite(fill)) {
    throw Error(Errc::non_finite, "non-finite fill value");
  }
  data_.assign(width * height, fill);
}

LumaImage::LumaImage(std::size_t width, std::size_t height,
                     std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != width * height) {
    throw Error(Errc::invalid_argument,
                "pixel count " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (!std::all_of(data_.begin(), data_.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw Error(Errc::non_finite, "image contains NaN or Inf samples");
  }
}

LumaImage LumaImage::crop(std::size_t x0, std::size_t y0, std::size_t w,
                          std::size_t h) const {
  if (w == 0 || h == 0 || x0 + w > width_ || y0 + h > height_) {
    throw Error(Errc::invalid_argument, "crop rectangle outside image");
  }
  std::vector<double> out;
  out.reserve(w * h);
  for (std::size_t y = y0; y < y0 + h; ++y) {
    auto src = row(y).subspan(x0, w);
    out.insert(out.end(), src.begin(), src.end());
  }
  return LumaImage(w, h, std::move(out));
}

LumaImage LumaImage::flipped_horizontal() const {
  LumaImage out = *this;
  for (std::size_t y = 0; y < height_; ++y) {
    auto r = out.pixels().subspan(y * width_, width_);
    std::reverse(r.begin(), r.end());
  }
  return out;
}

}  // namespace twostepqa
