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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace arraykit {

// 8-bit interleaved RGB raster, row-major from the top-left corner.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);

  std::uint8_t* at(int u, int v) { return &data[(static_cast<std::size_t>(v) * width + u) * 3]; }
  const std::uint8_t* at(int u, int v) const {
    return &data[(static_cast<std::size_t>(v) * width + u) * 3];
  }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
};

// PNG or binary PPM (P6), chosen by file signature.
RgbImage read_image(const std::string& path);
void write_png(const std::string& path, const RgbImage& image);
void write_ppm(const std::string& path, const RgbImage& image);

// Square outline of half-size `radius` centred on (u, v), clipped to the image.
void draw_box(RgbImage& image, double u, double v, int radius, std::uint8_t r, std::uint8_t g,
              std::uint8_t b);

// Filled disk with 4x4 supersampled edge coverage blended over the image.
void draw_disk(RgbImage& image, double u, double v, double radius, std::uint8_t r, std::uint8_t g,
               std::uint8_t b);

}  // namespace arraykit
