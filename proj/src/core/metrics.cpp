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

#include "arraykit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arraykit {

double si_sdr(const MonoSignal& estimate, const MonoSignal& reference) {
  require(estimate.rate() == reference.rate(), ErrorCode::kRateMismatch,
          "estimate and reference rates differ");
  return si_sdr(estimate.samples(), reference.samples());
}

double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size())
    fail(ErrorCode::kShapeMismatch, "estimate and reference lengths differ");
  const double ss = dot(reference, reference);
  if (!(ss > 0.0)) fail(ErrorCode::kDegenerateReference, "reference signal is all zeros");
  const double alpha = dot(estimate, reference) / ss;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    const double e = t - estimate[i];
    target += t * t;
    residual += e * e;
  }
  if (!(residual > 0.0)) return kSiSdrCapDb;
  if (!(target > 0.0)) return -kSiSdrCapDb;
  return std::min(kSiSdrCapDb, 10.0 * std::log10(target / residual));
}

double circular_error_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

LocMetrics loc_metrics(const FramewiseAzimuth& estimate, const FramewiseAzimuth& truth,
                       double acc_threshold_deg) {
  const std::size_t n = truth.azimuth_deg.size();
  if (estimate.azimuth_deg.size() != n || estimate.valid.size() != n || truth.valid.size() != n ||
      estimate.times.size() != truth.times.size())
    fail(ErrorCode::kShapeMismatch, "estimate and truth grids differ in length");
  for (std::size_t i = 0; i < estimate.times.size(); ++i)
    if (std::abs(estimate.times[i] - truth.times[i]) > 1e-9)
      fail(ErrorCode::kShapeMismatch, "estimate and truth grids are not aligned");

  std::vector<double> err(n);
  std::transform(estimate.azimuth_deg.begin(), estimate.azimuth_deg.end(), truth.azimuth_deg.begin(),
                 err.begin(), circular_error_deg);
  std::vector<char> use(n);
  for (std::size_t i = 0; i < n; ++i) use[i] = estimate.valid[i] && truth.valid[i];
  const auto frames = static_cast<std::size_t>(std::count(use.begin(), use.end(), 1));
  if (frames == 0) fail(ErrorCode::kNoValidFrames, "no frame is valid in both tracks");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!use[i]) continue;
    sum += err[i];
    hits += err[i] < acc_threshold_deg;
  }
  LocMetrics m;
  m.frames = frames;
  m.mae_deg = sum / static_cast<double>(frames);
  m.acc_pct = 100.0 * static_cast<double>(hits) / static_cast<double>(frames);
  return m;
}

}  // namespace arraykit
