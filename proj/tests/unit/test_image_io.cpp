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

#include <cstring>
#include <fstream>

#include "test_support.hpp"
#include "twostepqa/error.hpp"
#include "twostepqa/fr_metrics.hpp"
#include "twostepqa/image_io.hpp"

namespace {

using namespace twostepqa;
using fixtures::scratch_dir;

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void put_le(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v, int n) {
  for (int i = 0; i < n; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Bottom-up 24-bit BMP with 4-byte row padding.
std::vector<std::uint8_t> bmp24(int w, int h, const std::vector<std::array<std::uint8_t, 3>>& rgb) {
  const int stride = (w * 3 + 3) / 4 * 4;
  std::vector<std::uint8_t> b(54 + static_cast<std::size_t>(stride * h), 0);
  b[0] = 'B';
  b[1] = 'M';
  put_le(b, 2, static_cast<std::uint32_t>(b.size()), 4);
  put_le(b, 10, 54, 4);
  put_le(b, 14, 40, 4);
  put_le(b, 18, static_cast<std::uint32_t>(w), 4);
  put_le(b, 22, static_cast<std::uint32_t>(h), 4);
  put_le(b, 26, 1, 2);
  put_le(b, 28, 24, 2);
  for (int y = 0; y < h; ++y) {
    const std::size_t row = 54 + static_cast<std::size_t>((h - 1 - y) * stride);
    for (int x = 0; x < w; ++x) {
      const auto& px = rgb[static_cast<std::size_t>(y * w + x)];
      b[row + 3 * x + 0] = px[2];
      b[row + 3 * x + 1] = px[1];
      b[row + 3 * x + 2] = px[0];
    }
  }
  return b;
}

TEST(ImageIo, PgmPassthrough) {
  const auto dir = scratch_dir("pgm");
  const std::vector<std::uint8_t> bytes{'P', '5', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n',
                                        0,   255, 128, 64};
  write_bytes(dir / "a.pgm", bytes);
  const auto img = io::decode_to_luma(dir / "a.pgm");
  EXPECT_EQ(img, LumaImage(2, 2, std::vector<double>{0, 255, 128, 64}));
}

TEST(ImageIo, PgmWithCommentAndRoundTrip) {
  const auto dir = scratch_dir("pgm2");
  const std::string text = "P5\n# made by hand\n3 1\n255\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.insert(bytes.end(), {1, 2, 3});
  write_bytes(dir / "c.pgm", bytes);
  const auto img = io::decode_to_luma(dir / "c.pgm");
  EXPECT_EQ(img, LumaImage(3, 1, std::vector<double>{1, 2, 3}));
  io::write_pgm(img, dir / "d.pgm");
  EXPECT_EQ(io::decode_to_luma(dir / "d.pgm"), img);
}

TEST(ImageIo, SolidRedPngUsesRec601) {
  const auto dir = scratch_dir("red");
  std::vector<std::uint8_t> rgb(8 * 8 * 3, 0);
  for (std::size_t i = 0; i < rgb.size(); i += 3) rgb[i] = 255;
  io::write_png_rgb(8, 8, rgb, dir / "red.png");
  const auto img = io::decode_to_luma(dir / "red.png");
  ASSERT_EQ(img.width(), 8u);
  ASSERT_EQ(img.height(), 8u);
  for (double v : img.pixels()) EXPECT_NEAR(v, 76.245, 1e-9);
}

TEST(ImageIo, GrayPngRoundTripIsExact) {
  const auto dir = scratch_dir("graypng");
  auto img = fixtures::random_image(13, 7, 3);
  for (auto& v : img.pixels()) v = std::round(v);
  io::write_png(img, dir / "g.png");
  EXPECT_EQ(io::decode_to_luma(dir / "g.png"), img);
}

TEST(ImageIo, Bmp24WithRowPadding) {
  const auto dir = scratch_dir("bmp");
  const std::vector<std::array<std::uint8_t, 3>> px{
      {255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {10, 20, 30}, {255, 255, 255}, {0, 0, 0}};
  write_bytes(dir / "a.bmp", bmp24(3, 2, px));
  const auto img = io::decode_to_luma(dir / "a.bmp");
  ASSERT_EQ(img.width(), 3u);
  ASSERT_EQ(img.height(), 2u);
  EXPECT_NEAR(img(0, 0), 76.245, 1e-9);
  EXPECT_NEAR(img(1, 0), 149.685, 1e-9);
  EXPECT_NEAR(img(2, 0), 29.07, 1e-9);
  EXPECT_NEAR(img(0, 1), 0.299 * 10 + 0.587 * 20 + 0.114 * 30, 1e-9);
  EXPECT_NEAR(img(1, 1), 255.0, 1e-9);
  EXPECT_NEAR(img(2, 1), 0.0, 1e-12);
}

TEST(ImageIo, TruncatedJpegIsCorrupt) {
  const auto bytes = io::encode_jpeg(fixtures::photo("camera"), 75);
  const std::vector<std::uint8_t> half(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2));
  try {
    io::decode_to_luma(std::span<const std::uint8_t>(half));
    FAIL() << "truncated JPEG decoded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::corrupt_bitstream);
  }
}

TEST(ImageIo, UnknownFormatAndMissingFile) {
  const std::vector<std::uint8_t> junk{'h', 'e', 'l', 'l', 'o', ' ', 'w', 'o', 'r', 'l', 'd'};
  try {
    io::decode_to_luma(std::span<const std::uint8_t>(junk));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unsupported_format);
  }
  try {
    io::decode_to_luma(std::filesystem::path("/nonexistent/x.png"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_file);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/x.png"), std::string::npos);
  }
}

TEST(ImageIo, ZeroDimensionPgm) {
  const std::string text = "P5\n0 4\n255\n";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  try {
    io::decode_to_luma(std::span<const std::uint8_t>(bytes));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::zero_dimension);
  }
}

TEST(ImageIo, JpegQuality100IsNearLossless) {
  for (const char* name : {"camera", "coffee", "chelsea"}) {
    const auto src = fixtures::photo(name);
    const auto back = fixtures::jpeg_roundtrip(src, 100);
    EXPECT_GT(fr::psnr(src, back), 38.0) << name;
  }
}

TEST(ImageIo, JpegKeepsDimensionsAtEveryQuality) {
  const auto src = fixtures::photo("coins");  // 384 x 303, odd height
  for (int q : {1, 10, 25, 50, 90, 100}) {
    const auto back = fixtures::jpeg_roundtrip(src, q);
    EXPECT_EQ(back.width(), src.width());
    EXPECT_EQ(back.height(), src.height());
  }
}

TEST(ImageIo, JpegToFileRoundTrip) {
  const auto dir = scratch_dir("jpegfile");
  const auto src = fixtures::photo("chelsea");
  const auto path = io::encode_jpeg(src, 10, dir / "c.jpg");
  EXPECT_EQ(path, dir / "c.jpg");
  const auto back = io::decode_to_luma(path);
  EXPECT_EQ(back.width(), src.width());
  EXPECT_EQ(back.height(), src.height());
  EXPECT_EQ(io::sniff_format(io::read_file(path)), io::ImageFormat::jpeg);
}

TEST(ImageIo, InvalidQuality) {
  const auto img = fixtures::constant_image(8, 8, 100);
  for (int q : {0, -5, 101}) {
    try {
      io::encode_jpeg(img, q);
      FAIL() << q;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_argument);
    }
  }
}

TEST(ImageIo, EncodeToUnwritablePathFails) {
  try {
    io::encode_jpeg(fixtures::constant_image(8, 8, 1), 50, "/nonexistent/dir/x.jpg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io_failure);
  }
}

TEST(ImageIo, DecodeIsDeterministic) {
  const auto path = fixtures::data_dir() / "rocket.png";
  EXPECT_EQ(io::decode_to_luma(path), io::decode_to_luma(path));
  const auto jpeg = io::encode_jpeg(fixtures::photo("rocket"), 40);
  EXPECT_EQ(io::decode_to_luma(std::span<const std::uint8_t>(jpeg)),
            io::decode_to_luma(std::span<const std::uint8_t>(jpeg)));
}

TEST(LumaImage, RejectsBadConstruction) {
  EXPECT_THROW(LumaImage(0, 3), Error);
  EXPECT_THROW(LumaImage(2, 2, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(LumaImage(1, 1, std::vector<double>{std::nan("")}), Error);
}

TEST(LumaImage, CropAndFlip) {
  const LumaImage img(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(img.crop(1, 0, 2, 2), LumaImage(2, 2, std::vector<double>{2, 3, 5, 6}));
  EXPECT_EQ(img.flipped_horizontal(), LumaImage(3, 2, std::vector<double>{3, 2, 1, 6, 5, 4}));
  EXPECT_THROW(img.crop(2, 0, 2, 1), Error);
}

}  // namespace
