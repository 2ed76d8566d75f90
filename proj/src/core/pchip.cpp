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

#include "arraykit/signal.hpp"

namespace arraykit {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// One-sided three-point slope with the shape-preserving adjustments.
double edge_slope(double h0, double h1, double d0, double d1) {
  double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (sign(s) != sign(d0)) {
    s = 0.0;
  } else if (sign(d0) != sign(d1) && std::abs(s) > 3.0 * std::abs(d0)) {
    s = 3.0 * d0;
  }
  return s;
}

}  // namespace

std::vector<double> pchip_interpolate(std::span<const double> knot_x,
                                      std::span<const double> knot_y,
                                      std::span<const double> query_x) {
  const std::size_t n = knot_x.size();
  require(knot_y.size() == n, ErrorCode::kInvalidArgument, "knot_x and knot_y differ in length");
  require(n >= 2, ErrorCode::kTooFewKnots, "pchip needs at least two knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(knot_x[i] > knot_x[i - 1]))
      fail(ErrorCode::kUnsortedKnots, "knot_x must be strictly increasing");

  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = knot_x[i + 1] - knot_x[i];
    delta[i] = (knot_y[i + 1] - knot_y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  std::vector<double> out(query_x.size());
  for (std::size_t q = 0; q < query_x.size(); ++q) {
    const double x = query_x[q];
    if (x <= knot_x[0]) {
      out[q] = knot_y[0];
      continue;
    }
    if (x >= knot_x[n - 1]) {
      out[q] = knot_y[n - 1];
      continue;
    }
    // knot_x[k] <= x < knot_x[k + 1]
    const auto it = std::upper_bound(knot_x.begin(), knot_x.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - knot_x.begin()) - 1;
    const double s = x - knot_x[k];
    if (s == 0.0) {
      out[q] = knot_y[k];
      continue;
    }
    const double c2 = (3.0 * delta[k] - 2.0 * d[k] - d[k + 1]) / h[k];
    const double c3 = (d[k] + d[k + 1] - 2.0 * delta[k]) / (h[k] * h[k]);
    out[q] = knot_y[k] + s * (d[k] + s * (c2 + s * c3));
  }
  return out;
}

}  // namespace arraykit
