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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "arraykit/error.hpp"

namespace arraykit {

// Single-channel sampled signal. Samples must be finite and the rate positive.
class MonoSignal {
 public:
  MonoSignal() = default;
  MonoSignal(std::vector<double> samples, double rate);

  static MonoSignal zeros(std::size_t length, double rate);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& vec() const { return samples_; }
  std::vector<double> release() && { return std::move(samples_); }
  double rate() const { return rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration() const { return static_cast<double>(samples_.size()) / rate_; }
  double operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<double> samples_;
  double rate_ = 1.0;
};

using ImpulseResponse = MonoSignal;

// Equal-length, equal-rate channels.
class MultiChannelSignal {
 public:
  MultiChannelSignal() = default;
  MultiChannelSignal(std::vector<std::vector<double>> channels, double rate);
  explicit MultiChannelSignal(const MonoSignal& mono);

  static MultiChannelSignal from_mono(std::vector<MonoSignal> channels);

  std::size_t num_channels() const { return channels_.size(); }
  std::size_t length() const { return channels_.empty() ? 0 : channels_[0].size(); }
  double rate() const { return rate_; }
  double duration() const { return static_cast<double>(length()) / rate_; }
  std::span<const double> channel_view(std::size_t ch) const { return channels_.at(ch); }
  MonoSignal channel(std::size_t ch) const { return MonoSignal(channels_.at(ch), rate_); }
  const std::vector<std::vector<double>>& channels() const { return channels_; }

 private:
  std::vector<std::vector<double>> channels_;
  double rate_ = 1.0;
};

double energy(std::span<const double> x);
double mean_power(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Correlation

enum class GccWeighting { kPhat, kNone };

struct CorrelationResult {
  std::vector<long> lags;
  std::vector<double> values;  // |r(lag)|
  long peak_lag = 0;
  double peak_value = 0.0;
  double peak_sharpness = 0.0;  // peak_value / median(values)
  double refined_lag = 0.0;     // parabolic interpolation around peak_lag
};

// Generalized cross-correlation of `b` against `a`. A positive lag means `b`
// is a delayed copy of `a`. Throws DegenerateSignal for (near-)silent input.
CorrelationResult gcc(const MonoSignal& a, const MonoSignal& b,
                      GccWeighting weighting, long max_lag);
CorrelationResult gcc(std::span<const double> a, std::span<const double> b,
                      GccWeighting weighting, long max_lag);

// Vertex offset in (-0.5, 0.5] of the parabola through three equally spaced
// samples centred on a local maximum.
double parabolic_offset(double left, double centre, double right);

// ---------------------------------------------------------------------------
// Resampling (Kaiser-windowed sinc, 64 taps at unit cutoff, beta = 12)

// Evaluates the band-limited continuation of x at arbitrary positions (in
// input samples). `cutoff` is relative to the input Nyquist rate, in (0, 1].
// Positions landing exactly on an integer with cutoff 1 return that sample.
std::vector<double> sample_at(std::span<const double> x, std::span<const double> positions,
                              double cutoff = 1.0);

// y[i] = x(start + i * step), band-limited with the given cutoff.
std::vector<double> warp_linear(std::span<const double> x, double start, double step,
                                std::size_t count, double cutoff);

// Time-stretch convention: output sample n is input position n * ratio, so a
// tone at f becomes f * ratio and ratio > 1 shortens the signal.
MonoSignal fractional_resample(const MonoSignal& x, double ratio);

// Sample-rate conversion to an arbitrary target rate.
MonoSignal resample_to_rate(const MonoSignal& x, double new_rate);

// Shifts by `delay` samples (fractional allowed), keeping the length.
MonoSignal fractional_delay(const MonoSignal& x, double delay);

// Adds amplitude * kernel(n - position) to h, the impulse that sample_at
// applies for the same fractional shift. Taps beyond h's end are dropped.
void add_fractional_impulse(std::vector<double>& h, double position, double amplitude);

// ---------------------------------------------------------------------------
// Convolution

// Full linear convolution, length len(x) + len(h) - 1.
MonoSignal convolve(const MonoSignal& x, const ImpulseResponse& h);
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

// ---------------------------------------------------------------------------
// Interpolation

// Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Carlson
// slopes). Queries outside the knot range take the nearest edge value.
std::vector<double> pchip_interpolate(std::span<const double> knot_x,
                                      std::span<const double> knot_y,
                                      std::span<const double> query_x);

// ---------------------------------------------------------------------------
// Framing

// Periodic Hann window.
std::vector<double> hann_window(std::size_t length);

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window_length = 0;
  std::size_t hop = 0;
  std::vector<std::complex<double>> data;  // frame-major

  std::complex<double> at(std::size_t frame, std::size_t bin) const {
    return data[frame * bins + bin];
  }
};

// Hann-windowed STFT without padding; frames = 1 + (len - window) / hop.
Spectrogram stft(const MonoSignal& x, std::size_t window_length, std::size_t hop);

// Piecewise crossfade weights for overlap-add. Region k spans
// [boundaries[k-1], boundaries[k]) with linear (trapezium) ramps of width
// `ramp` centred on each interior boundary; the first and last regions extend
// to infinity. Weights of all regions sum to one at every position.
class TrapeziumLayout {
 public:
  TrapeziumLayout(std::vector<double> interior_boundaries, double ramp);

  std::size_t num_regions() const { return boundaries_.size() + 1; }
  double weight(std::size_t region, double position) const;
  // Half-open support [first, last) of a region clipped to [0, length).
  std::pair<std::size_t, std::size_t> support(std::size_t region, std::size_t length) const;
  double ramp() const { return ramp_; }

 private:
  double rise(double x) const;
  std::vector<double> boundaries_;
  double ramp_;
};

}  // namespace arraykit
