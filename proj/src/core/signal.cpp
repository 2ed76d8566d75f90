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

#include "arraykit/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace arraykit {

MonoSignal::MonoSignal(std::vector<double> samples, double rate)
    : samples_(std::move(samples)), rate_(rate) {
  if (!(rate_ > 0.0) || !std::isfinite(rate_))
    fail(ErrorCode::kInvalidArgument, "sample rate must be positive");
  for (double v : samples_)
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "non-finite sample");
}

MonoSignal MonoSignal::zeros(std::size_t length, double rate) {
  return MonoSignal(std::vector<double>(length, 0.0), rate);
}

MultiChannelSignal::MultiChannelSignal(std::vector<std::vector<double>> channels, double rate)
    : channels_(std::move(channels)), rate_(rate) {
  require(!channels_.empty(), ErrorCode::kInvalidArgument, "at least one channel required");
  require(rate_ > 0.0 && std::isfinite(rate_), ErrorCode::kInvalidArgument,
          "sample rate must be positive");
  for (const auto& ch : channels_) {
    require(ch.size() == channels_[0].size(), ErrorCode::kShapeMismatch,
            "channels must have equal length");
    for (double v : ch)
      if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "non-finite sample");
  }
}

MultiChannelSignal::MultiChannelSignal(const MonoSignal& mono)
    : channels_{mono.vec()}, rate_(mono.rate()) {}

MultiChannelSignal MultiChannelSignal::from_mono(std::vector<MonoSignal> channels) {
  require(!channels.empty(), ErrorCode::kInvalidArgument, "at least one channel required");
  const double rate = channels[0].rate();
  std::vector<std::vector<double>> data;
  data.reserve(channels.size());
  for (auto& ch : channels) {
    require(ch.rate() == rate, ErrorCode::kRateMismatch, "channels must share one rate");
    data.push_back(std::move(ch).release());
  }
  return MultiChannelSignal(std::move(data), rate);
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double mean_power(std::span<const double> x) {
  return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------

double parabolic_offset(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (denom == 0.0) return 0.0;
  const double off = 0.5 * (left - right) / denom;
  return std::clamp(off, -0.5, 0.5);
}

namespace {

bool near_silent(std::span<const double> x) {
  const double rms = std::sqrt(mean_power(x));
  return !(rms > 1e-12);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

CorrelationResult gcc(const MonoSignal& a, const MonoSignal& b, GccWeighting weighting,
                      long max_lag) {
  require(a.rate() == b.rate(), ErrorCode::kRateMismatch, "gcc inputs must share a rate");
  return gcc(a.samples(), b.samples(), weighting, max_lag);
}

CorrelationResult gcc(std::span<const double> a, std::span<const double> b,
                      GccWeighting weighting, long max_lag) {
  require(max_lag >= 0, ErrorCode::kInvalidArgument, "max_lag must be non-negative");
  require(static_cast<std::size_t>(max_lag) < std::min(a.size(), b.size()),
          ErrorCode::kInvalidArgument, "max_lag must be shorter than both inputs");
  if (near_silent(a) || near_silent(b))
    fail(ErrorCode::kDegenerateSignal, "gcc input has near-zero energy");

  const std::size_t n = detail::next_pow2(a.size() + b.size());
  detail::RealFft fft(n);
  std::vector<std::complex<double>> fa, fb;
  fft.forward(a, fa);
  fft.forward(b, fb);
  double peak_mag = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) {
    fa[k] = std::conj(fa[k]) * fb[k];
    peak_mag = std::max(peak_mag, std::abs(fa[k]));
  }
  if (weighting == GccWeighting::kPhat) {
    const double floor = 1e-8 * peak_mag;
    for (auto& g : fa) g /= (std::abs(g) + floor);
  }
  std::vector<double> r;
  fft.inverse(fa, r);

  CorrelationResult out;
  const std::size_t count = static_cast<std::size_t>(2 * max_lag + 1);
  out.lags.resize(count);
  out.values.resize(count);
  std::vector<double> signed_values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const long lag = static_cast<long>(i) - max_lag;
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag)
                                     : n - static_cast<std::size_t>(-lag);
    out.lags[i] = lag;
    signed_values[i] = r[idx];
    out.values[i] = std::abs(r[idx]);
  }
  const auto it = std::max_element(out.values.begin(), out.values.end());
  const std::size_t pi = static_cast<std::size_t>(it - out.values.begin());
  out.peak_lag = out.lags[pi];
  out.peak_value = *it;
  const double med = median_of(out.values);
  out.peak_sharpness = med > 0.0 ? out.peak_value / med : INFINITY;
  out.refined_lag = static_cast<double>(out.peak_lag);
  if (pi > 0 && pi + 1 < count) {
    out.refined_lag += parabolic_offset(out.values[pi - 1], out.values[pi], out.values[pi + 1]);
  }
  return out;
}

// ---------------------------------------------------------------------------

MonoSignal convolve(const MonoSignal& x, const ImpulseResponse& h) {
  require(x.rate() == h.rate(), ErrorCode::kRateMismatch, "convolve inputs must share a rate");
  return MonoSignal(convolve(x.samples(), h.samples()), x.rate());
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  std::vector<double> y(out_len, 0.0);
  const std::size_t short_len = std::min(x.size(), h.size());
  if (short_len <= 32 || x.size() * h.size() <= (1u << 16)) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += xi * h[j];
    }
    return y;
  }
  const std::size_t n = detail::next_pow2(out_len);
  detail::RealFft fft(n);
  std::vector<std::complex<double>> fx, fh;
  fft.forward(x, fx);
  fft.forward(h, fh);
  for (std::size_t k = 0; k < fx.size(); ++k) fx[k] *= fh[k];
  std::vector<double> full;
  fft.inverse(fx, full);
  std::copy_n(full.begin(), out_len, y.begin());
  return y;
}

// ---------------------------------------------------------------------------

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(length));
  return w;
}

Spectrogram stft(const MonoSignal& x, std::size_t window_length, std::size_t hop) {
  if (hop == 0 || hop > window_length || window_length > x.size())
    fail(ErrorCode::kBadFraming, "stft requires 0 < hop <= window <= signal length");
  Spectrogram s;
  s.window_length = window_length;
  s.hop = hop;
  s.frames = 1 + (x.size() - window_length) / hop;
  s.bins = window_length / 2 + 1;
  s.data.resize(s.frames * s.bins);
  const auto w = hann_window(window_length);
  detail::RealFft fft(window_length);
  std::vector<double> frame(window_length);
  std::vector<std::complex<double>> spec;
  const auto xs = x.samples();
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t i = 0; i < window_length; ++i) frame[i] = xs[f * hop + i] * w[i];
    fft.forward(frame, spec);
    std::copy(spec.begin(), spec.end(), s.data.begin() + static_cast<std::ptrdiff_t>(f * s.bins));
  }
  return s;
}

// ---------------------------------------------------------------------------

TrapeziumLayout::TrapeziumLayout(std::vector<double> interior_boundaries, double ramp)
    : boundaries_(std::move(interior_boundaries)), ramp_(ramp) {
  require(ramp_ >= 0.0, ErrorCode::kInvalidArgument, "ramp must be non-negative");
  for (std::size_t i = 1; i < boundaries_.size(); ++i)
    require(boundaries_[i] - boundaries_[i - 1] >= ramp_, ErrorCode::kInvalidArgument,
            "boundaries closer than the ramp width");
}

double TrapeziumLayout::rise(double x) const {
  if (ramp_ == 0.0) return x >= 0.0 ? 1.0 : 0.0;
  return std::clamp(x / ramp_ + 0.5, 0.0, 1.0);
}

double TrapeziumLayout::weight(std::size_t region, double position) const {
  const double up = region == 0 ? 1.0 : rise(position - boundaries_[region - 1]);
  const double down =
      region == boundaries_.size() ? 0.0 : rise(position - boundaries_[region]);
  return up - down;
}

std::pair<std::size_t, std::size_t> TrapeziumLayout::support(std::size_t region,
                                                             std::size_t length) const {
  const double half = 0.5 * ramp_;
  double lo = region == 0 ? 0.0 : boundaries_[region - 1] - half;
  double hi = region == boundaries_.size() ? static_cast<double>(length)
                                           : boundaries_[region] + half + 1.0;
  lo = std::clamp(std::floor(lo), 0.0, static_cast<double>(length));
  hi = std::clamp(std::ceil(hi), 0.0, static_cast<double>(length));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
}

}  // namespace arraykit
