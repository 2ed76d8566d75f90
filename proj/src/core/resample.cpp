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
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "arraykit/signal.hpp"

namespace arraykit {

namespace {

constexpr double kHalfTaps = 32.0;
constexpr double kKaiserBeta = 12.0;
constexpr int kTableResolution = 1024;  // entries per input sample

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Symmetric kernel c * sinc(c t) * kaiser(t / half_width), tabulated for t >= 0.
class SincTable {
 public:
  explicit SincTable(double cutoff) : cutoff_(cutoff), half_width_(kHalfTaps / cutoff) {
    const std::size_t n = static_cast<std::size_t>(std::ceil(half_width_ * kTableResolution)) + 2;
    table_.resize(n);
    const double norm = 1.0 / bessel_i0(kKaiserBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kTableResolution;
      const double u = t / half_width_;
      if (u >= 1.0) {
        table_[i] = 0.0;
        continue;
      }
      const double arg = std::numbers::pi * cutoff_ * t;
      const double sinc = t == 0.0 ? 1.0 : std::sin(arg) / arg;
      table_[i] = cutoff_ * sinc * bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) * norm;
    }
  }

  double half_width() const { return half_width_; }

  double operator()(double t) const {
    const double a = std::abs(t) * kTableResolution;
    const std::size_t i = static_cast<std::size_t>(a);
    if (i + 1 >= table_.size()) return 0.0;
    const double f = a - static_cast<double>(i);
    return table_[i] + f * (table_[i + 1] - table_[i]);
  }

 private:
  double cutoff_;
  double half_width_;
  std::vector<double> table_;
};

std::shared_ptr<const SincTable> table_for(double cutoff) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const SincTable>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(cutoff);
  if (it != cache.end()) return it->second;
  if (cache.size() > 32) cache.clear();
  auto t = std::make_shared<const SincTable>(cutoff);
  cache.emplace(cutoff, t);
  return t;
}

double interpolate(std::span<const double> x, const SincTable& k, double pos, bool exact_ok) {
  const long n = static_cast<long>(x.size());
  if (exact_ok) {
    const double r = std::floor(pos);
    if (r == pos) {
      const long i = static_cast<long>(r);
      return (i >= 0 && i < n) ? x[static_cast<std::size_t>(i)] : 0.0;
    }
  }
  const double hw = k.half_width();
  long lo = static_cast<long>(std::ceil(pos - hw));
  long hi = static_cast<long>(std::floor(pos + hw));
  lo = std::max(lo, 0L);
  hi = std::min(hi, n - 1);
  double acc = 0.0;
  for (long i = lo; i <= hi; ++i) acc += x[static_cast<std::size_t>(i)] * k(pos - static_cast<double>(i));
  return acc;
}

void check_cutoff(double cutoff) {
  require(cutoff > 0.0 && cutoff <= 1.0, ErrorCode::kInvalidArgument, "cutoff must be in (0, 1]");
}

}  // namespace

std::vector<double> sample_at(std::span<const double> x, std::span<const double> positions,
                              double cutoff) {
  check_cutoff(cutoff);
  const auto table = table_for(cutoff);
  const bool exact_ok = cutoff == 1.0;
  std::vector<double> y(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    y[i] = interpolate(x, *table, positions[i], exact_ok);
  return y;
}

std::vector<double> warp_linear(std::span<const double> x, double start, double step,
                                std::size_t count, double cutoff) {
  check_cutoff(cutoff);
  const auto table = table_for(cutoff);
  const bool exact_ok = cutoff == 1.0;
  std::vector<double> y(count);
  for (std::size_t i = 0; i < count; ++i)
    y[i] = interpolate(x, *table, start + static_cast<double>(i) * step, exact_ok);
  return y;
}

MonoSignal fractional_resample(const MonoSignal& x, double ratio) {
  if (!(ratio >= 0.5 && ratio <= 2.0))
    fail(ErrorCode::kRatioOutOfRange, "resample ratio must lie in [0.5, 2.0]");
  const auto count = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) / ratio));
  const double cutoff = std::min(1.0, 1.0 / ratio);
  return MonoSignal(warp_linear(x.samples(), 0.0, ratio, count, cutoff), x.rate());
}

MonoSignal resample_to_rate(const MonoSignal& x, double new_rate) {
  require(new_rate > 0.0, ErrorCode::kInvalidArgument, "target rate must be positive");
  if (new_rate == x.rate()) return x;
  const double step = x.rate() / new_rate;
  const auto count = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * new_rate / x.rate()));
  const double cutoff = std::min(1.0, new_rate / x.rate());
  return MonoSignal(warp_linear(x.samples(), 0.0, step, count, cutoff), new_rate);
}

MonoSignal fractional_delay(const MonoSignal& x, double delay) {
  return MonoSignal(warp_linear(x.samples(), -delay, 1.0, x.size(), 1.0), x.rate());
}

void add_fractional_impulse(std::vector<double>& h, double position, double amplitude) {
  const long n = static_cast<long>(h.size());
  const double r = std::floor(position);
  if (r == position) {
    const long i = static_cast<long>(r);
    if (i >= 0 && i < n) h[static_cast<std::size_t>(i)] += amplitude;
    return;
  }
  const auto table = table_for(1.0);
  const long lo = std::max(0L, static_cast<long>(std::ceil(position - table->half_width())));
  const long hi = std::min(n - 1, static_cast<long>(std::floor(position + table->half_width())));
  for (long i = lo; i <= hi; ++i)
    h[static_cast<std::size_t>(i)] += amplitude * (*table)(static_cast<double>(i) - position);
}

}  // namespace arraykit
