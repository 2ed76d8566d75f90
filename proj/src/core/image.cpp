// Copyright 2026 The arraykit Authors
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

#include "arraykit/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "arraykit/error.hpp"

namespace arraykit {

RgbImage::RgbImage(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h) {
  require(w > 0 && h > 0, ErrorCode::kInvalidArgument, "image dimensions must be positive");
  data.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
}

namespace {

RgbImage read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    fail(ErrorCode::kIoError, path + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.data.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    fail(ErrorCode::kIoError, path + ": " + msg);
  }
  return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

RgbImage read_ppm(const std::string& path, const std::string& bytes) {
  std::size_t pos = 2;
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ppm_token(bytes, pos));
    h = std::stoi(ppm_token(bytes, pos));
    maxval = std::stoi(ppm_token(bytes, pos));
  } catch (const std::exception&) {
    fail(ErrorCode::kIoError, path + ": malformed PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) fail(ErrorCode::kIoError, path + ": unsupported PPM");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < pos + need) fail(ErrorCode::kIoError, path + ": truncated PPM data");
  RgbImage out;
  out.width = w;
  out.height = h;
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return out;
}

void blend(RgbImage& img, int u, int v, double a, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (!img.contains(u, v) || a <= 0.0) return;
  std::uint8_t* p = img.at(u, v);
  const std::uint8_t c[3] = {r, g, b};
  for (int i = 0; i < 3; ++i)
    p[i] = static_cast<std::uint8_t>(std::lround((1.0 - a) * p[i] + a * c[i]));
}

}  // namespace

RgbImage read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0)
    return read_png(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return read_ppm(path, bytes);
  fail(ErrorCode::kIoError, path + ": not a PNG or binary PPM image");
}

void write_png(const std::string& path, const RgbImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.data.data(), 0, nullptr))
    fail(ErrorCode::kIoError, path + ": " + img.message);
}

void write_ppm(const std::string& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path);
}

void draw_box(RgbImage& image, double u, double v, int radius, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
  const int cu = static_cast<int>(std::lround(u));
  const int cv = static_cast<int>(std::lround(v));
  for (int d = -radius; d <= radius; ++d) {
    blend(image, cu + d, cv - radius, 1.0, r, g, b);
    blend(image, cu + d, cv + radius, 1.0, r, g, b);
    blend(image, cu - radius, cv + d, 1.0, r, g, b);
    blend(image, cu + radius, cv + d, 1.0, r, g, b);
  }
}

void draw_disk(RgbImage& image, double u, double v, double radius, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  const int u0 = static_cast<int>(std::floor(u - radius - 1));
  const int u1 = static_cast<int>(std::ceil(u + radius + 1));
  const int v0 = static_cast<int>(std::floor(v - radius - 1));
  const int v1 = static_cast<int>(std::ceil(v + radius + 1));
  const double r2 = radius * radius;
  for (int y = v0; y <= v1; ++y) {
    for (int x = u0; x <= u1; ++x) {
      int hits = 0;
      for (int sy = 0; sy < 4; ++sy)
        for (int sx = 0; sx < 4; ++sx) {
          const double dx = x + (sx + 0.5) / 4.0 - 0.5 - u;
          const double dy = y + (sy + 0.5) / 4.0 - 0.5 - v;
          hits += dx * dx + dy * dy <= r2;
        }
      blend(image, x, y, hits / 16.0, r, g, b);
    }
  }
}

}  // namespace arraykit
