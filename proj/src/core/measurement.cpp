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

#include "arraykit/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace arraykit {

void SweepSpec::validate() const {
  if (!(f1_hz > 0.0 && f1_hz < f2_hz && f2_hz <= rate_hz / 2.0))
    fail(ErrorCode::kBadSpec, "sweep needs 0 < f1 < f2 <= rate/2");
  if (!(duration_s > 0.0)) fail(ErrorCode::kBadSpec, "sweep duration must be positive");
  if (repetitions < 1) fail(ErrorCode::kBadSpec, "sweep needs at least one repetition");
  if (gap_s < 0.0 || fade_in_s < 0.0 || fade_out_s < 0.0 || fade_in_s + fade_out_s > duration_s)
    fail(ErrorCode::kBadSpec, "invalid sweep gap or fades");
  if (band_taper_octaves < 0.0 || 2.0 * band_taper_octaves > std::log2(f2_hz / f1_hz))
    fail(ErrorCode::kBadSpec, "band taper wider than the sweep band");
}

std::size_t SweepSpec::sweep_length() const {
  return static_cast<std::size_t>(std::llround(duration_s * rate_hz));
}

std::size_t SweepSpec::period_length() const {
  return sweep_length() + static_cast<std::size_t>(std::llround(gap_s * rate_hz));
}

namespace {

double raised_cosine(double x) {  // 0 -> 0, 1 -> 1
  x = std::clamp(x, 0.0, 1.0);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * x);
}

std::vector<double> single_sweep(const SweepSpec& spec) {
  const std::size_t n = spec.sweep_length();
  const double t_total = spec.duration_s;
  const double log_ratio = std::log(spec.f2_hz / spec.f1_hz);
  const double k = 2.0 * std::numbers::pi * spec.f1_hz * t_total / log_ratio;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.rate_hz;
    x[i] = std::sin(k * (std::exp(t * log_ratio / t_total) - 1.0));
  }
  const std::size_t fin = static_cast<std::size_t>(std::llround(spec.fade_in_s * spec.rate_hz));
  const std::size_t fout = static_cast<std::size_t>(std::llround(spec.fade_out_s * spec.rate_hz));
  for (std::size_t i = 0; i < fin; ++i)
    x[i] *= raised_cosine(static_cast<double>(i) / static_cast<double>(fin));
  for (std::size_t i = 0; i < fout; ++i)
    x[n - 1 - i] *= raised_cosine(static_cast<double>(i) / static_cast<double>(fout));
  return x;
}

// Log-frequency band window with raised-cosine edges inside [f1, f2].
double band_weight(double f, const SweepSpec& spec) {
  if (f <= spec.f1_hz || f >= spec.f2_hz) return 0.0;
  if (spec.band_taper_octaves == 0.0) return 1.0;
  const double up = std::log2(f / spec.f1_hz) / spec.band_taper_octaves;
  const double down = std::log2(spec.f2_hz / f) / spec.band_taper_octaves;
  return raised_cosine(up) * raised_cosine(down);
}

ImpulseResponse aligned_window(const std::vector<double>& y, std::size_t search_begin,
                               std::size_t search_end, const RirOptions& options, double rate) {
  search_end = std::min(search_end, y.size());
  if (search_begin >= search_end) fail(ErrorCode::kDegenerateSignal, "empty deconvolution window");
  std::size_t peak = search_begin;
  for (std::size_t i = search_begin; i < search_end; ++i)
    if (std::abs(y[i]) > std::abs(y[peak])) peak = i;
  const auto pre = static_cast<long>(std::llround(options.pre_ms * 1e-3 * rate));
  const auto len = static_cast<std::size_t>(std::llround(options.length_s * rate));
  std::vector<double> out(len, 0.0);
  for (std::size_t n = 0; n < len; ++n) {
    const long src = static_cast<long>(peak) - pre + static_cast<long>(n);
    if (src >= 0 && static_cast<std::size_t>(src) < y.size()) out[n] = y[static_cast<std::size_t>(src)];
  }
  return ImpulseResponse(std::move(out), rate);
}

std::vector<double> deconvolve(const MonoSignal& recorded, const MonoSignal& inverse_filter) {
  require(recorded.rate() == inverse_filter.rate(), ErrorCode::kRateMismatch,
          "recording and inverse filter rates differ");
  if (!(energy(recorded.samples()) > 0.0))
    fail(ErrorCode::kDegenerateSignal, "recording has zero energy");
  return convolve(recorded.samples(), inverse_filter.samples());
}

}  // namespace

SweepPair generate_ess(const SweepSpec& spec) {
  spec.validate();
  const std::vector<double> sweep = single_sweep(spec);
  const std::size_t n = sweep.size();
  const std::size_t m = detail::next_pow2(2 * n);

  detail::RealFft fft(m);
  std::vector<std::complex<double>> s;
  fft.forward(sweep, s);
  double max_pow = 0.0;
  for (const auto& v : s) max_pow = std::max(max_pow, std::norm(v));
  const double reg = 1e-12 * max_pow;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = static_cast<double>(k) * spec.rate_hz / static_cast<double>(m);
    s[k] = std::conj(s[k]) * band_weight(f, spec) / (std::norm(s[k]) + reg);
  }
  std::vector<double> circ;
  fft.inverse(s, circ);

  // Rotate so the zero-lag tap sits at index n of a (2n + 1)-tap filter.
  std::vector<double> inv(2 * n + 1);
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = circ[(i + m - n) % m];
  double peak = 0.0;
  for (std::size_t j = 0; j < n; ++j) peak += sweep[j] * inv[n - j];
  for (double& v : inv) v /= peak;

  SweepPair out;
  out.period = spec.period_length();
  std::vector<double> train(out.period * static_cast<std::size_t>(spec.repetitions), 0.0);
  for (int r = 0; r < spec.repetitions; ++r)
    std::copy(sweep.begin(), sweep.end(), train.begin() + static_cast<std::ptrdiff_t>(r * out.period));
  out.sweep = MonoSignal(std::move(train), spec.rate_hz);
  out.inverse_filter = MonoSignal(std::move(inv), spec.rate_hz);
  return out;
}

std::size_t inverse_reference_lag(const MonoSignal& inverse_filter) {
  return (inverse_filter.size() - 1) / 2;
}

ImpulseResponse estimate_rir(const MonoSignal& recorded, const MonoSignal& inverse_filter,
                             const RirOptions& options) {
  const auto y = deconvolve(recorded, inverse_filter);
  return aligned_window(y, inverse_reference_lag(inverse_filter), y.size(), options,
                        recorded.rate());
}

std::vector<ImpulseResponse> estimate_rir_trials(const MonoSignal& recorded,
                                                 const MonoSignal& inverse_filter,
                                                 std::size_t period, int repetitions,
                                                 const RirOptions& options) {
  require(repetitions >= 1 && period > 0, ErrorCode::kInvalidArgument, "invalid trial layout");
  const auto y = deconvolve(recorded, inverse_filter);
  const std::size_t ref = inverse_reference_lag(inverse_filter);
  std::vector<ImpulseResponse> out;
  for (int r = 0; r < repetitions; ++r) {
    const std::size_t begin = ref + static_cast<std::size_t>(r) * period;
    out.push_back(aligned_window(y, begin, begin + period, options, recorded.rate()));
  }
  return out;
}

DecayCurve schroeder_edc(const ImpulseResponse& rir, double floor_db) {
  const auto h = rir.samples();
  std::vector<double> e(h.size() + 1, 0.0);
  for (std::size_t i = h.size(); i-- > 0;) e[i] = e[i + 1] + h[i] * h[i];
  if (h.empty() || !(e[0] > 0.0)) fail(ErrorCode::kDegenerateSignal, "impulse response has zero energy");
  DecayCurve c;
  c.time_s.resize(h.size());
  c.level_db.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    c.time_s[i] = static_cast<double>(i) / rir.rate();
    const double level = e[i] > 0.0 ? 10.0 * std::log10(e[i] / e[0]) : floor_db;
    c.level_db[i] = std::max(level, floor_db);
  }
  c.level_db[0] = 0.0;
  return c;
}

T60Estimate estimate_t60(const DecayCurve& edc, const FitRange& range) {
  require(range.hi_db > range.lo_db, ErrorCode::kInvalidArgument, "fit range must be (hi, lo) with hi > lo");
  const auto& lv = edc.level_db;
  std::size_t begin = lv.size(), end = lv.size();
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (begin == lv.size() && lv[i] <= range.hi_db) begin = i;
    if (lv[i] <= range.lo_db) {
      end = i + 1;
      break;
    }
  }
  if (end == lv.size() && (lv.empty() || lv.back() > range.lo_db))
    fail(ErrorCode::kInsufficientDecay, "decay curve never reaches the lower fit bound");
  if (begin >= end || end - begin < 2)
    fail(ErrorCode::kInsufficientDecay, "too few points in the fit range");

  const double n = static_cast<double>(end - begin);
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mt += edc.time_s[i];
    ml += lv[i];
  }
  mt /= n;
  ml /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dt = edc.time_s[i] - mt;
    sxy += dt * (lv[i] - ml);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) fail(ErrorCode::kInsufficientDecay, "fitted decay slope is not negative");

  T60Estimate out;
  out.slope_db_per_s = slope;
  out.intercept_db = ml - slope * mt;
  out.t20_s = -20.0 / slope;
  out.t60_s = 3.0 * out.t20_s;
  out.fit_range = range;
  out.fit_begin = begin;
  out.fit_end = end;
  return out;
}

TrialSummary aggregate_trials(const std::vector<double>& values) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "no trials to aggregate");
  TrialSummary s;
  s.count = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.count);
  if (s.count > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(s.count - 1));
  }
  return s;
}

DeviceIR extract_device_ir(const ImpulseResponse& rir, const DeviceIrOptions& options) {
  const auto h = rir.samples();
  require(!h.empty(), ErrorCode::kDegenerateSignal, "empty impulse response");
  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(options.window_ms * 1e-3 * rir.rate())));
  std::size_t peak = 0;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (std::abs(h[i]) > std::abs(h[peak])) peak = i;
  const double peak_mag = std::abs(h[peak]);
  if (!(peak_mag > 0.0)) fail(ErrorCode::kDegenerateSignal, "impulse response has zero energy");

  const double half = 0.5 * static_cast<double>(window);
  const double reach = options.gap_factor * static_cast<double>(window);
  const double limit = options.reflection_threshold * peak_mag;
  const long lo = std::max(0L, static_cast<long>(peak) - static_cast<long>(reach));
  const long hi = std::min(static_cast<long>(h.size()) - 1, static_cast<long>(peak) + static_cast<long>(reach));
  for (long q = lo; q <= hi; ++q) {
    const double dist = std::abs(static_cast<double>(q) - static_cast<double>(peak));
    if (dist > half && std::abs(h[static_cast<std::size_t>(q)]) >= limit)
      fail(ErrorCode::kNoDistinctPath, "no isolated dominant path in the impulse response");
  }

  const std::size_t len = std::min(window, h.size());
  long start = static_cast<long>(peak) - static_cast<long>(window / 2);
  start = std::clamp(start, 0L, static_cast<long>(h.size() - len));
  std::vector<double> taps(h.begin() + start, h.begin() + start + static_cast<long>(len));
  const auto fade = std::min<std::size_t>(
      len / 2, static_cast<std::size_t>(std::llround(options.fade_ms * 1e-3 * rir.rate())));
  for (std::size_t i = 0; i < fade; ++i) {
    const double w = raised_cosine((static_cast<double>(i) + 0.5) / static_cast<double>(fade));
    taps[i] *= w;
    taps[len - 1 - i] *= w;
  }
  DeviceIR out;
  out.taps = ImpulseResponse(std::move(taps), rir.rate());
  out.window_start = static_cast<std::size_t>(start);
  out.window_length = len;
  out.peak_index = peak;
  return out;
}

}  // namespace arraykit
