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

#include <optional>
#include <string>
#include <vector>

#include "arraykit/image.hpp"

namespace arraykit {

enum class LedColor { kRed, kGreen };

LedColor parse_led_color(const std::string& name);

struct DetectionConfig {
  double hue_half_width_deg = 15.0;
  double min_saturation = 0.5;
  double score_floor = 0.2;
  // Pixels connected to the maximum with score >= blob_fraction * max form the
  // blob whose score-weighted centroid is reported.
  double blob_fraction = 0.5;
};

struct LedDetection {
  double u = 0.0;
  double v = 0.0;
  double score = 0.0;
  double frame_time = 0.0;
};

// Score map = saturation * value inside the hue/saturation mask of `color`.
// Throws NoDetection when the best score is below the floor.
LedDetection detect_led(const RgbImage& frame, LedColor color, const DetectionConfig& cfg = {},
                        double frame_time = 0.0);

// Fisheye camera looking straight down, mounted above the array centre.
// Radius r (pixels) maps to polar angle theta from the optical axis either by
// the equidistant model r = k * theta or by a calibration table.
struct CameraModel {
  double u0 = 0.0;
  double v0 = 0.0;
  double pixels_per_radian = 0.0;
  std::vector<double> table_radius_px;  // strictly increasing, optional
  std::vector<double> table_theta_deg;  // strictly increasing, same length
  double height_m = 0.0;
  double yaw_offset_deg = 0.0;
  double max_theta_deg = 90.0;

  void validate() const;
  double theta_deg(double radius_px) const;
  double radius_px(double theta_deg) const;
};

struct CameraAngles {
  double azimuth_deg = 0.0;           // [0, 360)
  double camera_elevation_deg = 0.0;  // relative to the camera horizon, negative below
};

// Azimuth is measured counter-clockwise from the +u image axis (v grows
// downwards), plus the yaw offset.
CameraAngles pixel_to_angles(const CameraModel& cam, double u, double v);

// Inverse of pixel_to_angles for a direction below the camera.
std::pair<double, double> angles_to_pixel(const CameraModel& cam, double azimuth_deg,
                                          double camera_elevation_deg);

struct LocationFrame {
  double t_s = 0.0;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 0.0;
  bool valid = false;
};

using LocationTrack = std::vector<LocationFrame>;

struct LocationConfig {
  double source_center_height_m = 1.40;
  double array_height_m = 1.40;
  double led_offset_m = 0.12;
  double min_source_height_m = 1.30;
  double max_source_height_m = 1.60;
  double grid_s = 0.1;
  double max_assign_gap_s = 0.05;
  std::optional<double> duration_s;  // defaults to the last detection time
};

// Loudspeaker centre height for a logged LED height.
double source_center_from_led_height(double led_height_m, double led_offset_m = 0.12);

// Geometry for one pixel; throws OutsideCalibratedField or GeometryError.
LocationFrame locate_pixel(const CameraModel& cam, const LocationConfig& cfg, double u, double v);

// Assigns each grid time the nearest detection within max_assign_gap_s.
// Frames with no detection or outside the calibrated field are invalid.
LocationTrack annotate_location(const std::vector<LedDetection>& detections,
                                const CameraModel& cam, const LocationConfig& cfg);

}  // namespace arraykit
