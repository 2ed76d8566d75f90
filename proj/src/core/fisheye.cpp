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

#include "arraykit/fisheye.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arraykit/error.hpp"
#include "arraykit/signal.hpp"

namespace arraykit {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct Hsv {
  double h, s, v;
};

Hsv to_hsv(const std::uint8_t* p) {
  const double r = p[0] / 255.0, g = p[1] / 255.0, b = p[2] / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double c = mx - mn;
  double h = 0.0;
  if (c > 0.0) {
    if (mx == r) {
      h = 60.0 * std::fmod((g - b) / c, 6.0);
    } else if (mx == g) {
      h = 60.0 * ((b - r) / c + 2.0);
    } else {
      h = 60.0 * ((r - g) / c + 4.0);
    }
    if (h < 0.0) h += 360.0;
  }
  return {h, mx > 0.0 ? c / mx : 0.0, mx};
}

double hue_distance(double a, double b) {
  const double d = std::abs(std::fmod(a - b, 360.0));
  return std::min(d, 360.0 - d);
}

double wrap_deg(double a) {
  double w = std::fmod(a, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w;
}

}  // namespace

LedColor parse_led_color(const std::string& name) {
  if (name == "red") return LedColor::kRed;
  if (name == "green") return LedColor::kGreen;
  fail(ErrorCode::kInvalidArgument, "unknown LED color '" + name + "'");
}

LedDetection detect_led(const RgbImage& frame, LedColor color, const DetectionConfig& cfg,
                        double frame_time) {
  require(frame.width > 0 && frame.height > 0, ErrorCode::kInvalidArgument, "empty frame");
  const double target = color == LedColor::kRed ? 0.0 : 120.0;
  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
  std::vector<double> score(n, 0.0);
  std::size_t best = 0;
  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      const Hsv c = to_hsv(frame.at(u, v));
      const std::size_t i = static_cast<std::size_t>(v) * frame.width + u;
      if (c.s >= cfg.min_saturation && hue_distance(c.h, target) <= cfg.hue_half_width_deg)
        score[i] = c.s * c.v;
      if (score[i] > score[best]) best = i;
    }
  }
  if (!(score[best] >= cfg.score_floor) || score[best] == 0.0)
    fail(ErrorCode::kNoDetection, "no LED-colored pixel above the score floor");

  // Score-weighted centroid of the 4-connected blob around the maximum.
  const double keep = cfg.blob_fraction * score[best];
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{best};
  seen[best] = 1;
  double sw = 0.0, su = 0.0, sv = 0.0;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int u = static_cast<int>(i % frame.width);
    const int v = static_cast<int>(i / frame.width);
    sw += score[i];
    su += score[i] * u;
    sv += score[i] * v;
    const int nu[4] = {u - 1, u + 1, u, u};
    const int nv[4] = {v, v, v - 1, v + 1};
    for (int k = 0; k < 4; ++k) {
      if (!frame.contains(nu[k], nv[k])) continue;
      const std::size_t j = static_cast<std::size_t>(nv[k]) * frame.width + nu[k];
      if (!seen[j] && score[j] >= keep) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return {su / sw, sv / sw, score[best], frame_time};
}

void CameraModel::validate() const {
  require(height_m > 0.0, ErrorCode::kConfigInvalid, "camera height must be positive");
  require(max_theta_deg > 0.0 && max_theta_deg <= 90.0, ErrorCode::kConfigInvalid,
          "max_theta_deg must lie in (0, 90]");
  if (table_radius_px.empty()) {
    require(pixels_per_radian > 0.0, ErrorCode::kConfigInvalid,
            "equidistant coefficient must be positive");
    return;
  }
  require(table_radius_px.size() == table_theta_deg.size() && table_radius_px.size() >= 2,
          ErrorCode::kConfigInvalid, "calibration table needs matching radius/theta columns");
  for (std::size_t i = 1; i < table_radius_px.size(); ++i)
    require(table_radius_px[i] > table_radius_px[i - 1] && table_theta_deg[i] > table_theta_deg[i - 1],
            ErrorCode::kConfigInvalid, "calibration table must be strictly increasing");
}

double CameraModel::theta_deg(double radius) const {
  if (table_radius_px.empty()) return radius / pixels_per_radian * kDeg;
  if (radius < table_radius_px.front() || radius > table_radius_px.back())
    fail(ErrorCode::kOutsideCalibratedField, "pixel radius outside the calibration table");
  const double q[1] = {radius};
  return pchip_interpolate(table_radius_px, table_theta_deg, q)[0];
}

double CameraModel::radius_px(double theta) const {
  if (table_radius_px.empty()) return theta / kDeg * pixels_per_radian;
  const double q[1] = {theta};
  return pchip_interpolate(table_theta_deg, table_radius_px, q)[0];
}

CameraAngles pixel_to_angles(const CameraModel& cam, double u, double v) {
  const double dx = u - cam.u0;
  const double dy = -(v - cam.v0);
  const double r = std::hypot(dx, dy);
  if (r < 0.5) fail(ErrorCode::kOutsideCalibratedField, "pixel at the optical centre has no azimuth");
  const double theta = cam.theta_deg(r);
  if (!(theta < cam.max_theta_deg))
    fail(ErrorCode::kOutsideCalibratedField, "pixel beyond the calibrated field of view");
  return {wrap_deg(std::atan2(dy, dx) * kDeg + cam.yaw_offset_deg), theta - 90.0};
}

std::pair<double, double> angles_to_pixel(const CameraModel& cam, double azimuth_deg,
                                          double camera_elevation_deg) {
  const double r = cam.radius_px(90.0 + camera_elevation_deg);
  const double phi = (azimuth_deg - cam.yaw_offset_deg) / kDeg;
  return {cam.u0 + r * std::cos(phi), cam.v0 - r * std::sin(phi)};
}

double source_center_from_led_height(double led_height_m, double led_offset_m) {
  return led_height_m - led_offset_m;
}

namespace {

void check_geometry(const CameraModel& cam, const LocationConfig& cfg) {
  cam.validate();
  const double h = cfg.source_center_height_m;
  if (!(h >= cfg.min_source_height_m - 1e-12 && h <= cfg.max_source_height_m + 1e-12))
    fail(ErrorCode::kGeometryError, "source centre height outside the allowed range");
  if (cfg.source_center_height_m + cfg.led_offset_m >= cam.height_m)
    fail(ErrorCode::kGeometryError, "LED is not below the camera");
  require(cfg.grid_s > 0.0, ErrorCode::kConfigInvalid, "grid spacing must be positive");
}

}  // namespace

LocationFrame locate_pixel(const CameraModel& cam, const LocationConfig& cfg, double u, double v) {
  check_geometry(cam, cfg);
  const CameraAngles a = pixel_to_angles(cam, u, v);
  const double led_h = cfg.source_center_height_m + cfg.led_offset_m;
  const double theta = (90.0 + a.camera_elevation_deg) / kDeg;
  const double horiz = (cam.height_m - led_h) * std::tan(theta);
  const double dz = cfg.source_center_height_m - cfg.array_height_m;
  LocationFrame f;
  f.azimuth_deg = a.azimuth_deg;
  f.elevation_deg = std::atan2(dz, horiz) * kDeg;
  f.distance_m = std::hypot(horiz, dz);
  f.valid = true;
  return f;
}

LocationTrack annotate_location(const std::vector<LedDetection>& detections,
                                const CameraModel& cam, const LocationConfig& cfg) {
  check_geometry(cam, cfg);
  std::vector<LedDetection> dets = detections;
  std::stable_sort(dets.begin(), dets.end(),
                   [](const LedDetection& a, const LedDetection& b) { return a.frame_time < b.frame_time; });
  const double duration = cfg.duration_s.value_or(dets.empty() ? 0.0 : dets.back().frame_time);
  const auto count = static_cast<std::size_t>(std::floor(duration / cfg.grid_s + 1e-9)) + 1;

  LocationTrack track(count);
  for (std::size_t i = 0; i < count; ++i) {
    LocationFrame& f = track[i];
    f.t_s = static_cast<double>(i) * cfg.grid_s;
    if (dets.empty()) continue;
    auto it = std::lower_bound(dets.begin(), dets.end(), f.t_s,
                               [](const LedDetection& d, double t) { return d.frame_time < t; });
    const LedDetection* nearest = nullptr;
    double gap = INFINITY;
    if (it != dets.end()) {
      nearest = &*it;
      gap = it->frame_time - f.t_s;
    }
    if (it != dets.begin() && f.t_s - std::prev(it)->frame_time <= gap) {
      nearest = &*std::prev(it);
      gap = f.t_s - nearest->frame_time;
    }
    if (!nearest || gap > cfg.max_assign_gap_s + 1e-9) continue;
    try {
      const LocationFrame loc = locate_pixel(cam, cfg, nearest->u, nearest->v);
      f.azimuth_deg = loc.azimuth_deg;
      f.elevation_deg = loc.elevation_deg;
      f.distance_m = loc.distance_m;
      f.valid = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOutsideCalibratedField) throw;
    }
  }
  return track;
}

}  // namespace arraykit
