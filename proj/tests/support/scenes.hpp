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

// Synthetic scenes shared by the annotator tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "arraykit/simulator.hpp"
#include "arraykit/test_signals.hpp"
#include "oracles.hpp"

namespace scenes {

using arraykit::Point3;
using arraykit::Trajectory;

inline const Point3 kArrayCentre{5.0, 4.0, 1.4};
inline const arraykit::ShoeboxRoom kAnechoic{{10.0, 8.0, 3.0}, 0.0, 343.0};

inline double horizontal_distance(const Point3& p) {
  return std::hypot(p[0] - kArrayCentre[0], p[1] - kArrayCentre[1]);
}

inline Point3 at_polar(double r, double az_deg, double z = 1.4) {
  const double a = az_deg * oracle::kPi / 180.0;
  return {kArrayCentre[0] + r * std::cos(a), kArrayCentre[1] + r * std::sin(a), z};
}

// Walks through waypoints at constant speed, pausing `dwell_s` at each.
inline Trajectory walk(const std::vector<Point3>& points, double speed, double duration,
                       double dwell_s = 0.0) {
  Trajectory t;
  double time = 0.0;
  t.times.push_back(time);
  t.positions.push_back(points[0]);
  for (std::size_t i = 1; i < points.size() && time < duration; ++i) {
    time += arraykit::distance(points[i - 1], points[i]) / speed;
    t.times.push_back(time);
    t.positions.push_back(points[i]);
    if (dwell_s > 0.0) {
      time += dwell_s;
      t.times.push_back(time);
      t.positions.push_back(points[i]);
    }
  }
  if (t.times.back() < duration) {
    t.times.push_back(duration + 1.0);
    t.positions.push_back(t.positions.back());
  }
  return t;
}

// Four trajectory families: axial, tangential, random walk and pacing.
// Speeds stay within [0.5, 1.5] m/s and the source stays 0.8 m to 3.6 m
// from the array axis inside the room.
inline Trajectory make_trajectory(int shape, std::mt19937_64& rng, double duration) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double speed = 0.5 + u(rng);
  const double az = 360.0 * u(rng);
  switch (shape % 4) {
    case 0: {  // axial: towards and away from the array along one bearing
      const double r0 = 0.8 + 0.4 * u(rng), r1 = 2.8 + 0.8 * u(rng);
      std::vector<Point3> p{at_polar(r1, az), at_polar(r0, az), at_polar(r1, az),
                            at_polar(r0, az), at_polar(r1, az)};
      return walk(p, speed, duration, 0.3);
    }
    case 1: {  // tangential: a chord past the array at a fixed offset
      const double offset = 1.0 + 1.2 * u(rng);
      const double half = 2.0;
      auto chord = [&](double s) {
        const double a = az * oracle::kPi / 180.0;
        return Point3{kArrayCentre[0] + offset * std::cos(a) - s * std::sin(a),
                      kArrayCentre[1] + offset * std::sin(a) + s * std::cos(a), 1.4};
      };
      std::vector<Point3> p{chord(-half), chord(half), chord(-half), chord(half), chord(-half)};
      return walk(p, speed, duration, 0.5);
    }
    case 2: {  // random waypoints
      std::vector<Point3> p;
      for (int i = 0; i < 12; ++i) p.push_back(at_polar(1.0 + 2.4 * u(rng), 360.0 * u(rng)));
      return walk(p, speed, duration, 0.2 * u(rng));
    }
    default: {  // pacing: short back-and-forth steps
      const Point3 c = at_polar(1.5 + 1.5 * u(rng), az);
      const double dir = 360.0 * u(rng) * oracle::kPi / 180.0;
      const double len = 0.6 + 0.6 * u(rng);
      const Point3 a{c[0] + len * std::cos(dir), c[1] + len * std::sin(dir), 1.4};
      const Point3 b{c[0] - len * std::cos(dir), c[1] - len * std::sin(dir), 1.4};
      std::vector<Point3> p{a, b, a, b, a, b, a, b, a, b, a};
      return walk(p, std::min(speed, 1.0), duration, 0.4);
    }
  }
}

inline const char* shape_name(int shape) {
  static const char* names[] = {"axial", "tangential", "random", "pacing"};
  return names[shape % 4];
}

// Adds white noise to every channel at the given SNR on channel 0.
inline arraykit::MultiChannelSignal add_white_noise(const arraykit::MultiChannelSignal& x,
                                                    double snr_db, std::uint64_t seed) {
  auto ch = x.channels();
  const double p = arraykit::mean_power(x.channel_view(0));
  const double sigma = std::sqrt(p / std::pow(10.0, snr_db / 10.0));
  for (std::size_t c = 0; c < ch.size(); ++c) {
    const auto n = oracle::gaussian(ch[c].size(), seed + c, sigma);
    for (std::size_t i = 0; i < ch[c].size(); ++i) ch[c][i] += n[i];
  }
  return {ch, x.rate()};
}

}  // namespace scenes
