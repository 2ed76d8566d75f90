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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arraykit/simulator.hpp"

namespace arraykit {

double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void ShoeboxRoom::validate() const {
  for (double d : dimensions)
    require(d > 0.0, ErrorCode::kInvalidArgument, "room dimensions must be positive");
  require(t60_s >= 0.0, ErrorCode::kInvalidArgument, "t60 must be non-negative");
  require(speed_of_sound > 0.0, ErrorCode::kInvalidArgument, "speed of sound must be positive");
}

bool ShoeboxRoom::contains(const Point3& p) const {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] > 0.0 && p[i] < dimensions[i])) return false;
  return true;
}

double ShoeboxRoom::reflection_coefficient() const {
  if (t60_s == 0.0) return 0.0;
  const auto [lx, ly, lz] = dimensions;
  const double volume = lx * ly * lz;
  const double surface = 2.0 * (lx * ly + lx * lz + ly * lz);
  const double alpha = 24.0 * std::log(10.0) * volume / (speed_of_sound * surface * t60_s);
  return alpha >= 1.0 ? 0.0 : std::sqrt(1.0 - alpha);
}

ImpulseResponse simulate_shoebox_rir(const ShoeboxRoom& room, const Point3& source,
                                     const Point3& mic, const IsmOptions& options) {
  room.validate();
  require(options.rate_hz > 0.0, ErrorCode::kInvalidArgument, "rate must be positive");
  if (!room.contains(source)) fail(ErrorCode::kPositionOutsideRoom, "source outside the room");
  if (!room.contains(mic)) fail(ErrorCode::kPositionOutsideRoom, "microphone outside the room");
  if (options.include_direct && distance(source, mic) < kMinSourceDistance)
    fail(ErrorCode::kGeometryError, "source within 1 cm of the microphone");

  const double c = room.speed_of_sound;
  const double rate = options.rate_hz;
  const double direct_s = distance(source, mic) / c;
  const double length_s = options.length_s > 0.0 ? options.length_s : room.t60_s + direct_s + 0.002;
  const auto length = static_cast<std::size_t>(std::ceil(length_s * rate)) + 64;
  // Images beyond this distance land after the end of the response.
  const double d_max = (static_cast<double>(length) + 32.0) / rate * c;
  const double beta = room.reflection_coefficient();
  const int max_order = options.max_order;

  struct AxisImage {
    double offset;
    int reflections;
  };
  std::array<std::vector<AxisImage>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    const double len = room.dimensions[a];
    const int reach = static_cast<int>(std::ceil(d_max / (2.0 * len))) + 1;
    for (int nn = -reach; nn <= reach; ++nn) {
      for (int p = 0; p <= 1; ++p) {
        const int refl = std::abs(nn - p) + std::abs(nn);
        if (beta == 0.0 && refl > 0) continue;
        if (max_order >= 0 && refl > max_order) continue;
        const double off = (1 - 2 * p) * source[a] + 2.0 * nn * len - mic[a];
        if (std::abs(off) <= d_max) axes[a].push_back({off, refl});
      }
    }
  }

  std::vector<double> pow_beta(1, 1.0);
  std::vector<double> h(length, 0.0);
  const double d_max2 = d_max * d_max;
  for (const auto& ix : axes[0]) {
    for (const auto& iy : axes[1]) {
      const double dxy2 = ix.offset * ix.offset + iy.offset * iy.offset;
      if (dxy2 > d_max2) continue;
      for (const auto& iz : axes[2]) {
        const int order = ix.reflections + iy.reflections + iz.reflections;
        if (max_order >= 0 && order > max_order) continue;
        if (order == 0 && !options.include_direct) continue;
        const double d2 = dxy2 + iz.offset * iz.offset;
        if (d2 > d_max2) continue;
        while (pow_beta.size() <= static_cast<std::size_t>(order)) pow_beta.push_back(pow_beta.back() * beta);
        const double d = std::sqrt(d2);
        const double amp = pow_beta[static_cast<std::size_t>(order)] / (4.0 * std::numbers::pi * d);
        if (amp == 0.0) continue;
        add_fractional_impulse(h, d / c * rate, amp);
      }
    }
  }
  return ImpulseResponse(std::move(h), rate);
}

void Trajectory::validate() const {
  require(!times.empty() && times.size() == positions.size(), ErrorCode::kInvalidArgument,
          "trajectory needs matching, non-empty times and positions");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorCode::kInvalidArgument,
            "trajectory times must be strictly increasing");
}

Point3 Trajectory::position_at(double t) const {
  if (t <= times.front()) return positions.front();
  if (t >= times.back()) return positions.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double f = (t - times[k]) / (times[k + 1] - times[k]);
  Point3 p;
  for (int a = 0; a < 3; ++a) p[a] = positions[k][a] + (positions[k + 1][a] - positions[k][a]) * f;
  return p;
}

Trajectory Trajectory::stationary(const Point3& p) {
  Trajectory t;
  t.times = {0.0};
  t.positions = {p};
  return t;
}

}  // namespace arraykit
