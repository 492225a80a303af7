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

#include "twostepqa/image_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "twostepqa/error.hpp"

namespace twostepqa::io {

namespace {

constexpr double kWeightR = 0.299;
constexpr double kWeightG = 0.587;
constexpr double kWeightB = 0.114;

double rec601(double r, double g, double b) {
  return std::clamp(kWeightR * r + kWeightG * g + kWeightB * b, 0.0, 255.0);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// ---------------------------------------------------------------- JPEG

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Warnings (premature EOF, corrupt data) are escalated: a truncated stream
// must not decode to a gray-filled image.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

LumaImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.pub.emit_message = jpeg_emit_message;

  // Buffers live behind a pointer that is not modified after setjmp.
  struct Buffers {
    std::vector<double> data;
    std::vector<JSAMPLE> line;
  };
  const auto buf = std::make_unique<Buffers>();
  auto& data = buf->data;
  auto& line = buf->line;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(Errc::corrupt_bitstream,
                std::string("JPEG decode failed: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const bool gray = cinfo.jpeg_color_space == JCS_GRAYSCALE;
  cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const std::size_t w = cinfo.output_width;
  const std::size_t h = cinfo.output_height;
  const std::size_t comps = static_cast<std::size_t>(cinfo.output_components);
  if (w == 0 || h == 0) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(Errc::zero_dimension, "JPEG has zero dimension");
  }
  data.resize(w * h);
  line.resize(w * comps);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rows[1] = {line.data()};
    const std::size_t y = cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, rows, 1);
    double* out = data.data() + y * w;
    if (comps == 1) {
      for (std::size_t x = 0; x < w; ++x) out[x] = line[x];
    } else {
      for (std::size_t x = 0; x < w; ++x) {
        out[x] = rec601(line[3 * x], line[3 * x + 1], line[3 * x + 2]);
      }
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return LumaImage(w, h, std::move(data));
}

// ----------------------------------------------------------------- PNG

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
  std::string error;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t count) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + count > st->bytes.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, st->bytes.data() + st->offset, count);
  st->offset += count;
}

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngReadState*>(png_get_error_ptr(png));
  st->error = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

LumaImage decode_png(std::span<const std::uint8_t> bytes) {
  PngReadState state{bytes, 0, {}};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state,
                                           png_error_fn, png_warning_fn);
  if (!png) throw Error(Errc::io_failure, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(Errc::io_failure, "png_create_info_struct failed");
  }

  struct Buffers {
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
  };
  const auto buf = std::make_unique<Buffers>();
  auto& buffer = buf->pixels;
  auto& rows = buf->rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::corrupt_bitstream, "PNG decode failed: " + state.error);
  }
  png_set_read_fn(png, &state, png_read_from_span);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const std::size_t channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (w == 0 || h == 0) throw Error(Errc::zero_dimension, "PNG has zero dimension");
  std::vector<double> data(static_cast<std::size_t>(w) * h);
  for (std::size_t y = 0; y < h; ++y) {
    const std::uint8_t* src = buffer.data() + y * stride;
    double* out = data.data() + y * w;
    if (channels == 1) {
      for (std::size_t x = 0; x < w; ++x) out[x] = src[x];
    } else if (channels == 3) {
      for (std::size_t x = 0; x < w; ++x) {
        out[x] = rec601(src[3 * x], src[3 * x + 1], src[3 * x + 2]);
      }
    } else {
      throw Error(Errc::unsupported_format,
                  "PNG with " + std::to_string(channels) + " channels");
    }
  }
  return LumaImage(w, h, std::move(data));
}

// ----------------------------------------------------------------- PGM

class HeaderTokenizer {
 public:
  explicit HeaderTokenizer(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    long value = 0;
    bool any = false;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) break;
      ++pos_;
      any = true;
    }
    if (!any) throw Error(Errc::corrupt_bitstream, "malformed PGM header");
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

LumaImage decode_pgm(std::span<const std::uint8_t> bytes) {
  HeaderTokenizer tok(bytes);
  const long w = tok.next_int();
  const long h = tok.next_int();
  const long maxval = tok.next_int();
  if (w <= 0 || h <= 0) throw Error(Errc::zero_dimension, "PGM has zero dimension");
  if (maxval <= 0 || maxval > 255) {
    throw Error(Errc::unsupported_format,
                "PGM maxval " + std::to_string(maxval) + " (8-bit only)");
  }
  const std::size_t offset = tok.raster_offset();
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (offset + count > bytes.size()) {
    throw Error(Errc::corrupt_bitstream, "PGM raster truncated");
  }
  const double scale = 255.0 / static_cast<double>(maxval);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = bytes[offset + i];
    data[i] = maxval == 255 ? v : std::min(255.0, v * scale);
  }
  return LumaImage(static_cast<std::size_t>(w), static_cast<std::size_t>(h),
                   std::move(data));
}

// ----------------------------------------------------------------- BMP

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

LumaImage decode_bmp(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 54) throw Error(Errc::corrupt_bitstream, "BMP header truncated");
  const std::uint32_t pixel_offset = le32(bytes, 10);
  const std::uint32_t header_size = le32(bytes, 14);
  if (header_size < 40) {
    throw Error(Errc::unsupported_format, "BMP core headers are not supported");
  }
  const auto width = static_cast<std::int32_t>(le32(bytes, 18));
  const auto raw_height = static_cast<std::int32_t>(le32(bytes, 22));
  const std::uint16_t bpp = le16(bytes, 28);
  const std::uint32_t compression = le32(bytes, 30);
  std::uint32_t palette_size = le32(bytes, 46);
  if (width <= 0 || raw_height == 0) {
    throw Error(Errc::zero_dimension, "BMP has zero dimension");
  }
  // BI_RGB, or BI_BITFIELDS with the default 32-bit BGRA masks.
  if (compression != 0 && !(compression == 3 && bpp == 32)) {
    throw Error(Errc::unsupported_format, "compressed BMP is not supported");
  }
  if (bpp != 8 && bpp != 24 && bpp != 32) {
    throw Error(Errc::unsupported_format,
                "BMP bit depth " + std::to_string(bpp) + " is not supported");
  }
  const bool top_down = raw_height < 0;
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t h = static_cast<std::size_t>(top_down ? -static_cast<std::int64_t>(raw_height)
                                                          : raw_height);

  std::array<double, 256> palette_luma{};
  if (bpp == 8) {
    if (palette_size == 0) palette_size = 256;
    const std::size_t pal_at = 14 + header_size;
    if (palette_size > 256 || pal_at + 4 * palette_size > bytes.size()) {
      throw Error(Errc::corrupt_bitstream, "BMP palette truncated");
    }
    for (std::size_t i = 0; i < palette_size; ++i) {
      const auto* e = bytes.data() + pal_at + 4 * i;
      palette_luma[i] = e[0] == e[1] && e[1] == e[2] ? e[0] : rec601(e[2], e[1], e[0]);
    }
  }

  const std::size_t bytes_pp = bpp / 8;
  const std::size_t stride = (w * bytes_pp + 3) & ~std::size_t{3};
  if (pixel_offset + stride * h > bytes.size()) {
    throw Error(Errc::corrupt_bitstream, "BMP raster truncated");
  }
  std::vector<double> data(w * h);
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = top_down ? row : h - 1 - row;
    const std::uint8_t* src = bytes.data() + pixel_offset + row * stride;
    double* out = data.data() + y * w;
    for (std::size_t x = 0; x < w; ++x) {
      if (bpp == 8) {
        out[x] = palette_luma[src[x]];
      } else {
        const std::uint8_t* p = src + x * bytes_pp;
        out[x] = p[0] == p[1] && p[1] == p[2] ? p[0] : rec601(p[2], p[1], p[0]);
      }
    }
  }
  return LumaImage(w, h, std::move(data));
}

}  // namespace

ImageFormat sniff_format(std::span<const std::uint8_t> head) noexcept {
  if (head.size() >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) {
    return ImageFormat::jpeg;
  }
  static constexpr std::array<std::uint8_t, 8> kPngMagic{0x89, 'P', 'N', 'G',
                                                        0x0D, 0x0A, 0x1A, 0x0A};
  if (head.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), head.begin())) {
    return ImageFormat::png;
  }
  if (head.size() >= 3 && head[0] == 'P' && head[1] == '5' &&
      (head[2] == ' ' || head[2] == '\n' || head[2] == '\r' || head[2] == '\t' ||
       head[2] == '#')) {
    return ImageFormat::pgm;
  }
  if (head.size() >= 2 && head[0] == 'B' && head[1] == 'M') return ImageFormat::bmp;
  return ImageFormat::unknown;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(std::filesystem::exists(path) ? Errc::io_failure : Errc::missing_file,
                "cannot open " + path.string());
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

LumaImage decode_to_luma(std::span<const std::uint8_t> bytes) {
  switch (sniff_format(bytes)) {
    case ImageFormat::jpeg: return decode_jpeg(bytes);
    case ImageFormat::png: return decode_png(bytes);
    case ImageFormat::pgm: return decode_pgm(bytes);
    case ImageFormat::bmp: return decode_bmp(bytes);
    case ImageFormat::unknown: break;
  }
  throw Error(Errc::unsupported_format, "unrecognized image format");
}

LumaImage decode_to_luma(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_to_luma(std::span<const std::uint8_t>(bytes));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_jpeg(const LumaImage& img, int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(Errc::invalid_argument,
                "JPEG quality must be in [1, 100], got " + std::to_string(quality));
  }
  if (img.empty()) throw Error(Errc::zero_dimension, "cannot encode an empty image");

  jpeg_compress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;

  struct Buffers {
    unsigned char* out = nullptr;
    unsigned long size = 0;
    std::vector<JSAMPLE> line;
  };
  const auto buf = std::make_unique<Buffers>();
  buf->line.resize(img.width());
  auto& out_buffer = buf->out;
  auto& out_size = buf->size;
  auto& line = buf->line;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(out_buffer);
    throw Error(Errc::io_failure, std::string("JPEG encode failed: ") + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out_buffer, &out_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    const auto src = img.row(cinfo.next_scanline);
    std::transform(src.begin(), src.end(), line.begin(), to_byte);
    JSAMPROW rows[1] = {line.data()};
    jpeg_write_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  std::vector<std::uint8_t> result(out_buffer, out_buffer + out_size);
  std::free(out_buffer);
  return result;
}

namespace {

void write_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_failure, "write failed: " + path.string());
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};

void write_png_impl(std::size_t width, std::size_t height, int color_type,
                    std::span<const std::uint8_t> samples, std::size_t channels,
                    const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(Errc::io_failure, "cannot write " + path.string());
  PngReadState state;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state,
                                            png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(Errc::io_failure, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io_failure, "PNG encode failed: " + state.error);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(samples.data() + y * width * channels));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

std::filesystem::path encode_jpeg(const LumaImage& img, int quality,
                                  const std::filesystem::path& path) {
  write_bytes(encode_jpeg(img, quality), path);
  return path;
}

void write_png(const LumaImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> samples(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), samples.begin(), to_byte);
  write_png_impl(img.width(), img.height(), PNG_COLOR_TYPE_GRAY, samples, 1, path);
}

void write_png_rgb(std::size_t width, std::size_t height,
                   std::span<const std::uint8_t> rgb, const std::filesystem::path& path) {
  if (width == 0 || height == 0) throw Error(Errc::zero_dimension, "empty RGB image");
  if (rgb.size() != width * height * 3) {
    throw Error(Errc::invalid_argument, "RGB buffer size mismatch");
  }
  write_png_impl(width, height, PNG_COLOR_TYPE_RGB, rgb, 3, path);
}

void write_pgm(const LumaImage& img, const std::filesystem::path& path) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), std::back_inserter(bytes),
                 to_byte);
  write_bytes(bytes, path);
}

}  // namespace twostepqa::io
