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

#include "arraykit/annotator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>

namespace arraykit {

namespace {

std::vector<double> to_rate(std::span<const double> x, double from, double to) {
  return resample_to_rate(MonoSignal(std::vector<double>(x.begin(), x.end()), from), to).release();
}

// (source * h_dev) truncated or zero-padded to `length` samples.
std::vector<double> reference_signal(const MonoSignal& source, const ImpulseResponse& h_dev,
                                     std::size_t length) {
  require(source.rate() == h_dev.rate(), ErrorCode::kRateMismatch,
          "source and device IR rates differ");
  auto r = convolve(source.samples(), h_dev.samples());
  r.resize(length, 0.0);
  return r;
}

// Signed correlation sum_n e[n] r[n - lag] over n in [begin, end), scanned on
// lags centre +- radius. Returns the parabolic-refined lag of the maximum.
double refine_lag(const std::vector<double>& e, const std::vector<double>& r, std::size_t begin,
                  std::size_t end, long centre, long radius) {
  end = std::min(end, e.size());
  const long rn = static_cast<long>(r.size());
  std::vector<double> corr(static_cast<std::size_t>(2 * radius + 1), 0.0);
  for (long k = -radius; k <= radius; ++k) {
    const long lag = centre + k;
    double acc = 0.0;
    for (std::size_t n = begin; n < end; ++n) {
      const long j = static_cast<long>(n) - lag;
      if (j >= 0 && j < rn) acc += e[n] * r[static_cast<std::size_t>(j)];
    }
    corr[static_cast<std::size_t>(k + radius)] = acc;
  }
  const auto it = std::max_element(corr.begin(), corr.end());
  const std::size_t i = static_cast<std::size_t>(it - corr.begin());
  double lag = static_cast<double>(centre - radius + static_cast<long>(i));
  if (i > 0 && i + 1 < corr.size()) lag += parabolic_offset(corr[i - 1], corr[i], corr[i + 1]);
  return lag;
}

// Segment-centre delays extended to the signal edges by linear extrapolation
// of the outer pairs and interpolated by PCHIP at the given positions.
std::vector<double> dense_tau(const std::vector<double>& knots, const std::vector<double>& tau,
                              std::size_t length, std::span<const double> positions) {
  std::vector<double> kx = knots, ky = tau;
  const std::size_t k = knots.size();
  if (k == 1) return std::vector<double>(positions.size(), tau[0]);
  const double end = static_cast<double>(length > 0 ? length - 1 : 0);
  if (knots.front() > 0.0) {
    const double s = (tau[1] - tau[0]) / (knots[1] - knots[0]);
    kx.insert(kx.begin(), 0.0);
    ky.insert(ky.begin(), tau[0] - s * knots[0]);
  }
  if (knots.back() < end) {
    const double s = (tau[k - 1] - tau[k - 2]) / (knots[k - 1] - knots[k - 2]);
    kx.push_back(end);
    ky.push_back(tau[k - 1] + s * (end - knots[k - 1]));
  }
  return pchip_interpolate(kx, ky, positions);
}

// Piecewise-linear delay on knots spaced `step` output samples apart,
// starting at sample 0 and reaching past the last sample.
struct KnotCurve {
  double step = 1.0;
  std::vector<double> values;

  // Knot index and weight of the right-hand knot at position p.
  std::pair<std::size_t, double> locate(double p) const {
    const double x = std::clamp(p / step, 0.0, static_cast<double>(values.size() - 1));
    const auto j = std::min(static_cast<std::size_t>(x), values.size() - 2);
    return {j, x - static_cast<double>(j)};
  }
  double at(double p) const {
    const auto [j, f] = locate(p);
    return (1.0 - f) * values[j] + f * values[j + 1];
  }
  std::vector<double> per_sample(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(static_cast<double>(i));
    return out;
  }
};

// x(n - tau(n)) band-limited, the same variable-delay rendering the simulator
// uses for its direct path.
std::vector<double> variable_delay(std::span<const double> x, const std::vector<double>& tau,
                                   double offset = 0.0) {
  std::vector<double> pos(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) pos[i] = static_cast<double>(i) - tau[i] - offset;
  return sample_at(x, pos, 1.0);
}

double projection_gain(std::span<const double> e, std::span<const double> u) {
  const std::size_t n = std::min(e.size(), u.size());
  const double uu = dot(u.first(n), u.first(n));
  if (!(uu > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return dot(e.first(n), u.first(n)) / uu;
}

void check_rates(const MultiChannelSignal& recording, const MonoSignal& source,
                 const DeviceIR& device_ir) {
  require(recording.num_channels() > 0 && recording.length() > 0, ErrorCode::kInvalidArgument,
          "empty recording");
  require(recording.rate() == source.rate() && source.rate() == device_ir.taps.rate(),
          ErrorCode::kRateMismatch, "recording, source and device IR must share a rate");
}

std::vector<double> knots_in_samples(const std::vector<double>& times, double rate) {
  std::vector<double> k(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) k[i] = times[i] * rate;
  return k;
}

long coarse_max_lag(const AnnotatorConfig& cfg) {
  return static_cast<long>(
      std::ceil((cfg.max_distance_m / cfg.speed_of_sound + cfg.device_latency_s) * cfg.gcc_rate_hz));
}

std::size_t count_invalid(const std::vector<bool>& v) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), false));
}

// Banded least squares: solves (normal + smooth * D2'D2 + ridge * I) x = rhs
// where `normal` is tridiagonal (diag, off).
Eigen::VectorXd solve_tridiagonal_smooth(const std::vector<double>& diag,
                                         const std::vector<double>& off,
                                         const Eigen::VectorXd& rhs, double smooth,
                                         double ridge) {
  const std::size_t nk = diag.size();
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t j = 0; j < nk; ++j) {
    const long jj = static_cast<long>(j);
    t.emplace_back(jj, jj, diag[j] + ridge);
    if (j + 1 < nk) {
      t.emplace_back(jj, jj + 1, off[j]);
      t.emplace_back(jj + 1, jj, off[j]);
    }
    if (j + 2 < nk) {
      const double d2[3] = {1.0, -2.0, 1.0};
      for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v) t.emplace_back(jj + u, jj + v, smooth * d2[u] * d2[v]);
    }
  }
  Eigen::SparseMatrix<double> a(static_cast<long>(nk), static_cast<long>(nk));
  a.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) return Eigen::VectorXd::Zero(static_cast<long>(nk));
  return solver.solve(rhs);
}

// Residual lag of e against the aligned model u in a window around each
// knot, by normalized cross-correlation over +-radius lags. NaN where the
// correlation is weak or peaks at the search edge.
std::vector<double> residual_lags(const std::vector<double>& e, const std::vector<double>& u,
                                  const std::vector<double>& centres, std::size_t window,
                                  long radius, double min_ncc) {
  std::vector<double> out(centres.size(), std::numeric_limits<double>::quiet_NaN());
  const long n = static_cast<long>(std::min(e.size(), u.size()));
  for (std::size_t j = 0; j < centres.size(); ++j) {
    const long a = std::max(0L, std::lround(centres[j]) - static_cast<long>(window / 2));
    const long b = std::min(n, a + static_cast<long>(window));
    if (b - a < static_cast<long>(window / 2)) continue;
    double ee = 0.0;
    for (long i = a; i < b; ++i) ee += e[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(i)];
    std::vector<double> c(static_cast<std::size_t>(2 * radius + 1), 0.0);
    for (long k = -radius; k <= radius; ++k) {
      double eu = 0.0, uu = 0.0;
      for (long i = a; i < b; ++i) {
        const long q = i - k;
        if (q < 0 || q >= n) continue;
        const double v = u[static_cast<std::size_t>(q)];
        eu += e[static_cast<std::size_t>(i)] * v;
        uu += v * v;
      }
      c[static_cast<std::size_t>(k + radius)] = uu > 0.0 && ee > 0.0 ? eu / std::sqrt(ee * uu) : 0.0;
    }
    const auto it = std::max_element(c.begin(), c.end());
    const auto i = static_cast<std::size_t>(it - c.begin());
    if (*it < min_ncc || i == 0 || i + 1 == c.size()) continue;
    out[j] = static_cast<double>(static_cast<long>(i) - radius) + parabolic_offset(c[i - 1], c[i], c[i + 1]);
  }
  return out;
}

}  // namespace

EnhanceHook reference_channel_hook(std::size_t channel, double rate) {
  return [channel, rate](const MultiChannelSignal& rec) {
    require(channel < rec.num_channels(), ErrorCode::kInvalidArgument,
            "reference channel out of range");
    return resample_to_rate(rec.channel(channel), rate);
  };
}

EnhanceHook oracle_hook(MonoSignal direct_path, double rate) {
  return [dp = std::move(direct_path), rate](const MultiChannelSignal&) {
    return resample_to_rate(dp, rate);
  };
}

MonoSignal pre_enhance(const MultiChannelSignal& recording, const EnhanceHook& hook,
                       double expected_rate) {
  MonoSignal out;
  try {
    out = hook ? hook(recording) : reference_channel_hook(0, expected_rate)(recording);
  } catch (const std::exception& e) {
    fail(ErrorCode::kHookFailure, std::string("enhancement hook failed: ") + e.what());
  }
  if (out.rate() != expected_rate)
    fail(ErrorCode::kHookFailure, "enhancement hook returned rate " + std::to_string(out.rate()) +
                                      ", expected " + std::to_string(expected_rate));
  if (out.empty()) fail(ErrorCode::kHookFailure, "enhancement hook returned an empty signal");
  return out;
}

AnnotationResult annotate_static(const MultiChannelSignal& recording, const MonoSignal& source,
                                 const DeviceIR& device_ir, const AnnotatorConfig& cfg,
                                 const EnhanceHook& hook) {
  check_rates(recording, source, device_ir);
  const double rate = recording.rate();
  const std::size_t n = recording.length();
  const MonoSignal e8 = pre_enhance(recording, hook, cfg.gcc_rate_hz);
  const auto r48 = reference_signal(source, device_ir.taps, n);
  auto r8 = to_rate(r48, rate, cfg.gcc_rate_hz);

  const std::size_t common = std::min(e8.size(), r8.size());
  const long max_lag = std::min(coarse_max_lag(cfg), static_cast<long>(common) - 1);
  CorrelationResult coarse;
  try {
    coarse = gcc(std::span<const double>(r8).first(common), e8.samples().first(common),
                 GccWeighting::kPhat, max_lag);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateSignal) throw;
    fail(ErrorCode::kNoSharpPeak, std::string("no correlation peak: ") + e.what());
  }
  if (coarse.peak_sharpness < cfg.sharpness_threshold)
    fail(ErrorCode::kNoSharpPeak, "correlation peak sharpness " +
                                      std::to_string(coarse.peak_sharpness) + " below threshold");

  const double ratio = rate / cfg.gcc_rate_hz;
  const auto e48 = to_rate(e8.samples(), cfg.gcc_rate_hz, rate);
  const auto r48lp = to_rate(r8, cfg.gcc_rate_hz, rate);
  const double tau = refine_lag(e48, r48lp, 0, e48.size(),
                                std::lround(static_cast<double>(coarse.peak_lag) * ratio),
                                cfg.refine_radius);

  const auto unit = warp_linear(r48, -tau, 1.0, n, 1.0);
  const auto u8 = to_rate(unit, rate, cfg.gcc_rate_hz);
  const double gain = projection_gain(e8.samples(), u8);
  if (!(gain > 0.0)) fail(ErrorCode::kNoSharpPeak, "estimated gain is not positive");

  AnnotationResult res;
  res.model = {tau, gain};
  res.track.rate_hz = rate;
  res.track.segment_length_s = static_cast<double>(n) / rate;
  res.track.segment_times = {0.5 * static_cast<double>(n) / rate};
  res.track.tau_track = {tau};
  res.track.segment_gain = {gain};
  res.track.valid = {true};
  res.track.gain_track.assign(n, gain);
  res.track.delay_track.assign(n, tau);
  res.diagnostics.peak_sharpness = {coarse.peak_sharpness};
  std::vector<double> dp(n);
  for (std::size_t i = 0; i < n; ++i) dp[i] = gain * unit[i];
  res.direct_path = MonoSignal(std::move(dp), rate);
  return res;
}

SegmentDelays segment_delay_track(const MonoSignal& enhanced, const MonoSignal& reference,
                                  const AnnotatorConfig& cfg, double output_rate) {
  require(enhanced.rate() == reference.rate(), ErrorCode::kRateMismatch,
          "enhanced and reference rates differ");
  const double rate = enhanced.rate();
  const auto seg = static_cast<std::size_t>(std::llround(cfg.segment_s * rate));
  const auto hop = static_cast<std::size_t>(std::llround(cfg.hop_s * rate));
  require(seg > 1 && hop > 0, ErrorCode::kInvalidArgument, "invalid segmentation");
  const std::size_t n = std::min(enhanced.size(), reference.size());

  SegmentDelays out;
  if (n < seg) return out;
  const std::size_t count = 1 + (n - seg) / hop;
  const double ratio = output_rate / rate;
  const auto e_hi = to_rate(enhanced.samples(), rate, output_rate);
  const auto r_hi = to_rate(reference.samples(), rate, output_rate);
  const long max_lag = std::min(coarse_max_lag(cfg), static_cast<long>(seg) - 1);

  // Delay slopes (samples per sample) searched per segment: a coarse grid
  // whose drift across half a segment differs by one GCC lag, then a finer
  // grid around the best coarse slope.
  const double max_slope = cfg.doppler_search_mps / cfg.speed_of_sound;
  const double coarse_step = 2.0 / static_cast<double>(seg);
  const long coarse_n = static_cast<long>(std::ceil(max_slope / coarse_step));

  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = k * hop;
    const double centre = static_cast<double>(s) + 0.5 * static_cast<double>(seg);
    out.times.push_back(centre / rate);
    const auto e_seg = enhanced.samples().subspan(s, seg);

    // Reference around the centre, time-scaled so that a delay drifting with
    // `slope` appears as a constant lag.
    // Candidates are ranked by main-lobe energy, which unlike the peak height
    // does not depend on where the fractional lag falls between samples. They
    // are visited nearest first and must win by a margin, so noise cannot pull
    // the slope away from the simplest adequate one.
    constexpr double kSlopeMargin = 1.02;
    double best_score = -1.0;
    auto try_slope = [&](double slope, CorrelationResult& best, double& best_slope) {
      if (std::abs(slope) > max_slope + 1e-12) return;
      const auto ref = warp_linear(reference.samples(), centre - (1.0 - slope) * (centre - s),
                                   1.0 - slope, seg, 1.0);
      try {
        const auto c = gcc(ref, e_seg, GccWeighting::kPhat, max_lag);
        const auto p = static_cast<std::size_t>(c.peak_lag - c.lags.front());
        double score = c.values[p] * c.values[p];
        if (p > 0) score += c.values[p - 1] * c.values[p - 1];
        if (p + 1 < c.values.size()) score += c.values[p + 1] * c.values[p + 1];
        if (score > best_score * kSlopeMargin) {
          best_score = score;
          best = c;
          best_slope = slope;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSignal) throw;
      }
    };
    CorrelationResult best;
    best.peak_value = -1.0;
    double slope = 0.0;
    try_slope(0.0, best, slope);
    for (long i = 1; i <= coarse_n; ++i)
      for (double sign : {1.0, -1.0}) try_slope(sign * static_cast<double>(i) * coarse_step, best, slope);
    const double centre_slope = slope;
    for (int i = 1; i <= 3; ++i)
      for (double sign : {1.0, -1.0}) try_slope(centre_slope + sign * 0.25 * i * coarse_step, best, slope);

    const double sharp = best.peak_value > 0.0 ? best.peak_sharpness : 0.0;
    const bool ok = sharp >= cfg.sharpness_threshold;
    double tau = static_cast<double>(best.peak_lag) * ratio;
    if (ok) {
      const double c_hi = centre * ratio;
      const auto b = static_cast<std::size_t>(std::llround(static_cast<double>(s) * ratio));
      const auto e = std::min(e_hi.size(),
                              static_cast<std::size_t>(std::llround(static_cast<double>(s + seg) * ratio)));
      const long reach = std::lround(tau) + cfg.refine_radius + 1;
      const auto lo = static_cast<std::size_t>(std::max(0L, static_cast<long>(b) - std::max(reach, 0L)));
      std::vector<double> ref_hi(e, 0.0);
      const auto w = warp_linear(r_hi, c_hi - (1.0 - slope) * (c_hi - static_cast<double>(lo)),
                                 1.0 - slope, e - lo, 1.0);
      std::copy(w.begin(), w.end(), ref_hi.begin() + static_cast<long>(lo));
      const long guess = std::lround(tau);
      tau = refine_lag(e_hi, ref_hi, b, e, guess, cfg.refine_radius);

      // The full-segment lag belongs to the energy centroid. Lags of the two
      // halves, placed at their own centroids, carry it to the centre.
      const std::size_t mid = (b + e) / 2;
      auto centroid = [&](std::size_t from, std::size_t to, double& energy) {
        double w = 0.0, m = 0.0;
        for (std::size_t i = from; i < to; ++i) {
          w += e_hi[i] * e_hi[i];
          m += e_hi[i] * e_hi[i] * static_cast<double>(i);
        }
        energy = w;
        return w > 0.0 ? m / w : 0.5 * static_cast<double>(from + to);
      };
      double w1 = 0.0, w2 = 0.0;
      const double t1 = centroid(b, mid, w1), t2 = centroid(mid, e, w2);
      const double total = w1 + w2;
      if (total > 0.0 && std::min(w1, w2) >= 0.1 * total && t2 - t1 >= 0.25 * static_cast<double>(e - b)) {
        const double l1 = refine_lag(e_hi, ref_hi, b, mid, guess, cfg.refine_radius);
        const double l2 = refine_lag(e_hi, ref_hi, mid, e, guess, cfg.refine_radius);
        const double lc = l1 + (l2 - l1) * (c_hi - t1) / (t2 - t1);
        const double bound = 0.5 * coarse_step * static_cast<double>(e - b);
        tau = std::clamp(lc, tau - bound, tau + bound);
      }
    }
    // A lag measured on the time-scaled reference maps back through the scale.
    out.tau.push_back(tau * (1.0 - slope));
    out.slope.push_back(slope);
    out.sharpness.push_back(sharp);
    out.valid.push_back(ok);
  }
  return out;
}

CleansedTrack cleanse_track(const std::vector<double>& times, const std::vector<double>& values,
                            const std::vector<bool>& valid, double max_deviation,
                            int median_window) {
  require(times.size() == values.size() && values.size() == valid.size(),
          ErrorCode::kInvalidArgument, "track arrays differ in length");
  const std::size_t n = values.size();
  CleansedTrack out;
  out.values = values;
  out.valid = valid;
  const long half = std::max(0, median_window / 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    std::vector<double> window;
    const long lo = std::max(0L, static_cast<long>(i) - half);
    const long hi = std::min(static_cast<long>(n) - 1, static_cast<long>(i) + half);
    for (long j = lo; j <= hi; ++j)
      if (valid[static_cast<std::size_t>(j)]) window.push_back(values[static_cast<std::size_t>(j)]);
    std::sort(window.begin(), window.end());
    const std::size_t m = window.size();
    const double med = m % 2 ? window[m / 2] : 0.5 * (window[m / 2 - 1] + window[m / 2]);
    if (std::abs(values[i] - med) > max_deviation) {
      out.valid[i] = false;
      ++out.outliers;
    }
  }

  std::vector<double> kx, ky, qx;
  std::vector<std::size_t> qi;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.valid[i]) {
      kx.push_back(times[i]);
      ky.push_back(values[i]);
    } else {
      qx.push_back(times[i]);
      qi.push_back(i);
    }
  }
  if (kx.size() < 2)
    fail(ErrorCode::kTooFewValidSegments,
         "only " + std::to_string(kx.size()) + " valid segment(s) after cleansing");
  const auto filled = pchip_interpolate(kx, ky, qx);
  for (std::size_t j = 0; j < qi.size(); ++j) out.values[qi[j]] = filled[j];
  return out;
}

AnnotationResult annotate_moving(const MultiChannelSignal& recording, const MonoSignal& source,
                                 const DeviceIR& device_ir, const AnnotatorConfig& cfg,
                                 const EnhanceHook& hook) {
  check_rates(recording, source, device_ir);
  require(cfg.track_step_s > 0.0, ErrorCode::kInvalidArgument, "track_step_s must be positive");
  const double rate = recording.rate();
  const std::size_t n = recording.length();
  const MonoSignal e8 = pre_enhance(recording, hook, cfg.gcc_rate_hz);
  const auto r48 = reference_signal(source, device_ir.taps, n);
  const MonoSignal r8(to_rate(r48, rate, cfg.gcc_rate_hz), cfg.gcc_rate_hz);

  SegmentDelays sd = segment_delay_track(e8, r8, cfg, rate);
  if (sd.tau.size() < 2)
    fail(ErrorCode::kTooFewValidSegments, "recording shorter than two segments");
  const double failed = static_cast<double>(count_invalid(sd.valid)) / static_cast<double>(sd.valid.size());
  if (failed > cfg.max_invalid_fraction)
    fail(ErrorCode::kNoSharpPeak, std::to_string(count_invalid(sd.valid)) + " of " +
                                      std::to_string(sd.valid.size()) +
                                      " segments lack a sharp correlation peak");

  const double max_dev = cfg.max_speed_mps * cfg.hop_s / cfg.speed_of_sound * rate;
  const CleansedTrack seg_tau = cleanse_track(sd.times, sd.tau, sd.valid, max_dev, cfg.median_window);
  const auto knots = knots_in_samples(sd.times, rate);
  const auto seg = static_cast<std::size_t>(std::llround(cfg.segment_s * cfg.gcc_rate_hz));
  const auto hop = static_cast<std::size_t>(std::llround(cfg.hop_s * cfg.gcc_rate_hz));

  // Fine piecewise-linear delay and gain curves on a common knot grid,
  // seeded from the segment track.
  KnotCurve track;
  track.step = cfg.track_step_s * rate;
  std::vector<double> kpos;
  for (double p = 0.0;; p += track.step) {
    kpos.push_back(p);
    if (p >= static_cast<double>(n - 1)) break;
  }
  if (kpos.size() < 2) kpos.push_back(track.step);
  track.values = dense_tau(knots, seg_tau.values, n, kpos);
  const std::size_t nk = kpos.size();
  const double ratio = rate / cfg.gcc_rate_hz;

  // Samples nearest an invalid segment carry no weight.
  auto usable = [&](double p) {
    const double kf = (p - knots.front()) / (cfg.hop_s * rate);
    const long near = std::clamp(std::lround(kf), 0L, static_cast<long>(knots.size()) - 1);
    return static_cast<bool>(seg_tau.valid[static_cast<std::size_t>(near)]);
  };

  std::vector<double> tau_n = track.per_sample(n);
  std::vector<double> unit = variable_delay(r48, tau_n);

  // Residual-lag scan around each knot, coarse then narrow.
  const long reach = std::max(2L, static_cast<long>(std::ceil(cfg.doppler_search_mps * cfg.hop_s /
                                                               cfg.speed_of_sound * cfg.gcc_rate_hz)));
  const auto window = static_cast<std::size_t>(std::llround(4.0 * cfg.track_step_s * cfg.gcc_rate_hz));
  std::vector<double> knot_times(nk);
  for (std::size_t j = 0; j < nk; ++j) knot_times[j] = kpos[j] / rate;
  for (long radius : {reach, std::max(2L, reach / 4)}) {
    const auto u8 = to_rate(unit, rate, cfg.gcc_rate_hz);
    std::vector<double> centres(nk);
    for (std::size_t j = 0; j < nk; ++j) centres[j] = kpos[j] / ratio;
    auto lags = residual_lags(e8.vec(), u8, centres, window, radius, 0.5);
    std::vector<bool> ok(nk);
    for (std::size_t j = 0; j < nk; ++j) {
      ok[j] = std::isfinite(lags[j]) && usable(kpos[j]);
      if (!ok[j]) lags[j] = 0.0;
    }
    if (std::count(ok.begin(), ok.end(), true) < 2) break;
    const double dev = cfg.max_speed_mps * cfg.track_step_s / cfg.speed_of_sound * cfg.gcc_rate_hz;
    const auto filled = cleanse_track(knot_times, lags, ok, std::max(dev, 1.0), cfg.median_window);
    for (std::size_t j = 0; j < nk; ++j) track.values[j] += filled.values[j] * ratio;
    tau_n = track.per_sample(n);
    unit = variable_delay(r48, tau_n);
  }

  // Gain curve by regularized least squares of e8 on the aligned model.
  KnotCurve gain_curve;
  gain_curve.step = track.step;
  auto solve_gain = [&] {
    const auto u8 = to_rate(unit, rate, cfg.gcc_rate_hz);
    const std::size_t m = std::min(e8.size(), u8.size());
    std::vector<double> diag(nk, 0.0), off(nk, 0.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(nk));
    for (std::size_t i = 0; i < m; ++i) {
      const double p = static_cast<double>(i) * ratio;
      if (!usable(p)) continue;
      const auto [j, f] = track.locate(p);
      const double a0 = u8[i] * (1.0 - f), a1 = u8[i] * f;
      diag[j] += a0 * a0;
      diag[j + 1] += a1 * a1;
      off[j] += a0 * a1;
      rhs(static_cast<long>(j)) += a0 * e8[i];
      rhs(static_cast<long>(j + 1)) += a1 * e8[i];
    }
    double mean_diag = 0.0;
    for (double d : diag) mean_diag += d;
    mean_diag = std::max(mean_diag / static_cast<double>(nk), 1e-300);
    const auto a = solve_tridiagonal_smooth(diag, off, rhs, cfg.gain_smoothing * mean_diag,
                                            1e-9 * mean_diag);
    gain_curve.values.resize(nk);
    for (std::size_t j = 0; j < nk; ++j)
      gain_curve.values[j] = std::clamp(a(static_cast<long>(j)), cfg.min_gain, cfg.max_gain);
  };
  solve_gain();

  // Gauss-Newton on the knot delays, widening the analysis band each pass.
  // Each update is damped towards smoothness; the gain curve is re-solved
  // after every pass.
  for (int pass = 0; pass < cfg.refine_passes; ++pass) {
    const double prate = std::min(cfg.gcc_rate_hz, 1000.0 * std::pow(2.0, pass));
    const double scale = prate / rate;
    const auto ep = to_rate(e8.samples(), cfg.gcc_rate_hz, prate);
    const auto up = to_rate(unit, rate, prate);
    const auto hi = to_rate(variable_delay(r48, tau_n, 0.5), rate, prate);
    const auto lo = to_rate(variable_delay(r48, tau_n, -0.5), rate, prate);
    const std::size_t m = std::min({ep.size(), up.size(), hi.size(), lo.size()});

    std::vector<double> diag(nk, 0.0), off(nk, 0.0);
    Eigen::VectorXd atr = Eigen::VectorXd::Zero(static_cast<long>(nk));
    for (std::size_t i = 0; i < m; ++i) {
      const double p = static_cast<double>(i) / scale;
      if (!usable(p)) continue;
      const double g = gain_curve.at(p);
      const double q = g * (hi[i] - lo[i]);  // d model / d tau
      const double r = ep[i] - g * up[i];
      const auto [j, f] = track.locate(p);
      const double a0 = q * (1.0 - f), a1 = q * f;
      diag[j] += a0 * a0;
      diag[j + 1] += a1 * a1;
      off[j] += a0 * a1;
      atr(static_cast<long>(j)) += a0 * r;
      atr(static_cast<long>(j + 1)) += a1 * r;
    }
    double mean_diag = 0.0;
    for (double d : diag) mean_diag += d;
    mean_diag = std::max(mean_diag / static_cast<double>(nk), 1e-300);
    const auto delta = solve_tridiagonal_smooth(diag, off, atr, cfg.track_damping * mean_diag,
                                                1e-6 * mean_diag);
    const double limit = 0.25 * rate / prate;
    for (std::size_t j = 0; j < nk; ++j)
      if (std::isfinite(delta(static_cast<long>(j))))
        track.values[j] += std::clamp(delta(static_cast<long>(j)), -limit, limit);
    tau_n = track.per_sample(n);
    unit = variable_delay(r48, tau_n);
    solve_gain();
  }

  // Per-segment projection gains, reported and cleansed per segment.
  std::vector<double> gains(knots.size(), 0.0);
  std::vector<bool> gain_ok(knots.size(), false);
  std::size_t gain_cleansed = 0;
  {
    const auto u8 = to_rate(unit, rate, cfg.gcc_rate_hz);
    for (std::size_t k = 0; k < gains.size(); ++k) {
      const std::size_t s = k * hop;
      if (s >= e8.size() || s >= u8.size()) continue;
      const std::size_t len = std::min({seg, e8.size() - s, u8.size() - s});
      gains[k] = projection_gain(e8.samples().subspan(s, len),
                                 std::span<const double>(u8).subspan(s, len));
      const bool in_range = gains[k] >= cfg.min_gain && gains[k] <= cfg.max_gain;
      if (seg_tau.valid[k] && !in_range) ++gain_cleansed;
      gain_ok[k] = seg_tau.valid[k] && in_range;
    }
  }
  const CleansedTrack gain = cleanse_track(sd.times, gains, gain_ok,
                                           std::numeric_limits<double>::infinity(), cfg.median_window);

  AnnotationResult res;
  DelayGainTrack& tr = res.track;
  tr.rate_hz = rate;
  tr.segment_length_s = cfg.segment_s;
  tr.segment_times = sd.times;
  tr.tau_track.resize(knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) tr.tau_track[k] = track.at(knots[k]);
  tr.segment_gain = gain.values;
  tr.valid = seg_tau.valid;
  tr.gain_track = gain_curve.per_sample(n);
  tr.delay_track = std::move(tau_n);

  std::vector<double> dp(n);
  for (std::size_t i = 0; i < n; ++i) dp[i] = tr.gain_track[i] * unit[i];
  res.direct_path = MonoSignal(std::move(dp), rate);
  res.diagnostics.peak_sharpness = sd.sharpness;
  res.diagnostics.cleansed_count = seg_tau.outliers;
  res.diagnostics.interpolated_count = count_invalid(seg_tau.valid);
  res.diagnostics.gain_cleansed_count = gain_cleansed;
  return res;
}

MonoSignal render_direct_path(const MonoSignal& source, const DeviceIR& device_ir,
                              const DelayGainTrack& track) {
  const std::size_t k = track.tau_track.size();
  const std::size_t n = track.gain_track.size();
  if (k == 0 || n == 0 || track.segment_times.size() != k)
    fail(ErrorCode::kTrackCoverageGap, "track has no segments or samples");
  require(source.rate() == track.rate_hz, ErrorCode::kRateMismatch,
          "source rate differs from the track rate");
  require(track.delay_track.empty() || track.delay_track.size() == n, ErrorCode::kInvalidArgument,
          "delay_track and gain_track differ in length");
  const double duration = static_cast<double>(n) / track.rate_hz;
  const double half = 0.5 * track.segment_length_s;
  const double slack = k > 1 ? track.segment_times[1] - track.segment_times[0] : 0.0;
  for (std::size_t i = 1; i < k; ++i)
    if (track.segment_times[i] - track.segment_times[i - 1] > track.segment_length_s + 1e-9)
      fail(ErrorCode::kTrackCoverageGap, "segments leave an uncovered gap");
  if (track.segment_times.front() - half > slack + 1e-9 ||
      track.segment_times.back() + half < duration - slack - 1e-9)
    fail(ErrorCode::kTrackCoverageGap, "track does not cover the signal duration");

  const auto r48 = reference_signal(source, device_ir.taps, n);
  std::vector<double> tau = track.delay_track;
  if (tau.empty()) {
    std::vector<double> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = static_cast<double>(i);
    tau = dense_tau(knots_in_samples(track.segment_times, track.rate_hz), track.tau_track, n,
                    positions);
  }
  const auto unit = variable_delay(r48, tau);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = track.gain_track[i] * unit[i];
  return MonoSignal(std::move(y), track.rate_hz);
}

}  // namespace arraykit
