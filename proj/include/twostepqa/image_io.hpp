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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "twostepqa/image.hpp"

namespace twostepqa::io {

enum class ImageFormat { jpeg, png, pgm, bmp, unknown };

/// Format detection by magic bytes; file extensions are ignored.
ImageFormat sniff_format(std::span<const std::uint8_t> head) noexcept;

/// Decodes JPEG, PNG, binary PGM (P5) or uncompressed BMP into luminance.
///
/// Color inputs are reduced with Rec. 601 weights
/// (0.299 R + 0.587 G + 0.114 B) and clamped to [0, 255]; grayscale inputs
/// pass through unchanged. Alpha channels are dropped and EXIF orientation
/// is not applied.
LumaImage decode_to_luma(const std::filesystem::path& path);
LumaImage decode_to_luma(std::span<const std::uint8_t> bytes);

/// Writes a baseline grayscale JPEG at the libjpeg quality scale 1..100.
/// Samples are rounded and clamped to 8 bits. Returns `path`.
std::filesystem::path encode_jpeg(const LumaImage& img, int quality,
                                  const std::filesystem::path& path);
std::vector<std::uint8_t> encode_jpeg(const LumaImage& img, int quality);

/// 8-bit grayscale PNG, used for fixtures and dataset fabrication.
void write_png(const LumaImage& img, const std::filesystem::path& path);
/// 8-bit RGB PNG from interleaved samples (width * height * 3).
void write_png_rgb(std::size_t width, std::size_t height,
                   std::span<const std::uint8_t> rgb,
                   const std::filesystem::path& path);
/// Binary P5 PGM, maxval 255.
void write_pgm(const LumaImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace twostepqa::io
