/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "common/image.hpp"

#include <png.h>
#include <tiffio.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "common/error.hpp"

namespace cle {
namespace {

enum class FileKind { kPng, kTiff, kUnknown };

FileKind sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open image '" + path.string() + "'");
  std::array<unsigned char, 8> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = in.gcount();
  if (got >= 8 && png_sig_cmp(head.data(), 0, 8) == 0) return FileKind::kPng;
  if (got >= 4 && ((head[0] == 'I' && head[1] == 'I' && head[2] == 42 && head[3] == 0) ||
                   (head[0] == 'M' && head[1] == 'M' && head[2] == 0 && head[3] == 42))) {
    return FileKind::kTiff;
  }
  return FileKind::kUnknown;
}

GrayImage read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::kFormat, "cannot decode PNG '" + path.string() + "': " + msg);
  }
  if ((img.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_LINEAR | PNG_FORMAT_FLAG_ALPHA)) != 0) {
    png_image_free(&img);
    fail(ErrorCode::kFormat, "'" + path.string() + "' is not single-channel 8-bit");
  }
  img.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::kFormat, "cannot decode PNG '" + path.string() + "': " + msg);
  }
  return GrayImage(static_cast<int>(img.width), static_cast<int>(img.height), std::move(buf));
}

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};

void silence_tiff_handlers() {
  static const bool once = [] {
    TIFFSetErrorHandler(nullptr);
    TIFFSetWarningHandler(nullptr);
    return true;
  }();
  (void)once;
}

GrayImage read_tiff(const std::filesystem::path& path) {
  silence_tiff_handlers();
  std::unique_ptr<TIFF, TiffCloser> tif(TIFFOpen(path.c_str(), "r"));
  if (!tif) fail(ErrorCode::kFormat, "cannot decode TIFF '" + path.string() + "'");
  std::uint32_t w = 0, h = 0;
  std::uint16_t spp = 1, bps = 1;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bps);
  if (spp != 1 || bps != 8) {
    fail(ErrorCode::kFormat, "'" + path.string() + "' is not single-channel 8-bit");
  }
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h);
  for (std::uint32_t y = 0; y < h; ++y) {
    if (TIFFReadScanline(tif.get(), buf.data() + static_cast<std::size_t>(y) * w, y) < 0) {
      fail(ErrorCode::kFormat, "cannot decode TIFF '" + path.string() + "'");
    }
  }
  std::uint16_t photometric = PHOTOMETRIC_MINISBLACK;
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PHOTOMETRIC, &photometric);
  if (photometric == PHOTOMETRIC_MINISWHITE) {
    for (auto& v : buf) v = static_cast<std::uint8_t>(255 - v);
  }
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(buf));
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative image dimensions");
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 ||
      pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    fail(ErrorCode::kInvalidArgument, "pixel buffer does not match image dimensions");
  }
}

GrayImage read_image(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case FileKind::kPng: return read_png(path);
    case FileKind::kTiff: return read_tiff(path);
    case FileKind::kUnknown: break;
  }
  fail(ErrorCode::kFormat, "'" + path.string() + "' is neither PNG nor TIFF");
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels().data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::kIo, "cannot write PNG '" + path.string() + "': " + msg);
  }
}

void write_tiff(const std::filesystem::path& path, const GrayImage& image) {
  silence_tiff_handlers();
  std::unique_ptr<TIFF, TiffCloser> tif(TIFFOpen(path.c_str(), "w"));
  if (!tif) fail(ErrorCode::kIo, "cannot write TIFF '" + path.string() + "'");
  TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(image.width()));
  TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(image.height()));
  TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 1);
  TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 8);
  TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
  TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
  TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(image.height()));
  std::vector<std::uint8_t> line(static_cast<std::size_t>(image.width()));
  for (int y = 0; y < image.height(); ++y) {
    auto r = image.row(y);
    std::copy(r.begin(), r.end(), line.begin());
    if (TIFFWriteScanline(tif.get(), line.data(), static_cast<std::uint32_t>(y), 0) < 0) {
      fail(ErrorCode::kIo, "cannot write TIFF '" + path.string() + "'");
    }
  }
}

}  // namespace cle
