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

#include <vector>

#include "arraykit/signal.hpp"

namespace arraykit {

constexpr double kSiSdrCapDb = 60.0;

// Scale-invariant SDR in dB, capped at kSiSdrCapDb.
double si_sdr(const MonoSignal& estimate, const MonoSignal& reference);
double si_sdr(std::span<const double> estimate, std::span<const double> reference);

struct FramewiseAzimuth {
  std::vector<double> times;
  std::vector<double> azimuth_deg;
  std::vector<bool> valid;
};

struct LocMetrics {
  double mae_deg = 0.0;
  double acc_pct = 0.0;
  std::size_t frames = 0;  // mutually valid frames
};

// min(|a - b|, 360 - |a - b|) after wrapping the difference into [0, 360).
double circular_error_deg(double a, double b);

// Frames invalid in either track are excluded from both MAE and ACC.
LocMetrics loc_metrics(const FramewiseAzimuth& estimate, const FramewiseAzimuth& truth,
                       double acc_threshold_deg = 5.0);

}  // namespace arraykit
