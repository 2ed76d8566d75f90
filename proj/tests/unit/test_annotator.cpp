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

#include <doctest.h>

#include <cmath>

#include "arraykit/annotator.hpp"
#include "arraykit/metrics.hpp"
#include "expect.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace arraykit;

namespace {

constexpr double kRate = 48000.0;

DeviceIR unit_device() {
  DeviceIR d;
  d.taps = MonoSignal({1.0}, kRate);
  d.window_length = 1;
  return d;
}

// A short loudspeaker-like response: a few decaying taps.
DeviceIR small_device() {
  DeviceIR d;
  d.taps = MonoSignal({0.2, 1.0, -0.35, 0.12, -0.05}, kRate);
  d.window_length = 5;
  d.peak_index = 1;
  return d;
}

// x = gain * (s * h_dev)(n - tau) on one channel.
MultiChannelSignal static_recording(const MonoSignal& s, const DeviceIR& dev, double gain, double tau) {
  auto r = convolve(s.vec(), dev.taps.vec());
  r.resize(s.size());
  auto x = fractional_delay(MonoSignal(r, kRate), tau).release();
  for (double& v : x) v *= gain;
  return MultiChannelSignal({x}, kRate);
}

// Enhanced signal following a delay track tau(n) at 48 kHz, at the GCC rate.
MonoSignal delayed_by_track(const MonoSignal& s, const std::vector<double>& tau) {
  std::vector<double> pos(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) pos[i] = static_cast<double>(i) - tau[i];
  return resample_to_rate(MonoSignal(sample_at(s.vec(), pos), kRate), 8000.0);
}

double segment_mae(const DelayGainTrack& tr, const std::vector<double>& truth) {
  double e = 0.0;
  for (std::size_t k = 0; k < tr.segment_times.size(); ++k) {
    const auto i = std::min(truth.size() - 1, static_cast<std::size_t>(std::lround(tr.segment_times[k] * kRate)));
    e += std::abs(tr.tau_track[k] - truth[i]);
  }
  return e / static_cast<double>(tr.segment_times.size());
}

}  // namespace

TEST_CASE("default hook returns the reference channel at 8 kHz") {
  const auto base = oracle::gaussian(6000, 1);  // content below 3 kHz once upsampled
  const auto x48 = resample_to_rate(MonoSignal(base, 6000), kRate);
  const auto expected = resample_to_rate(MonoSignal(base, 6000), 8000);
  const auto out = pre_enhance(MultiChannelSignal(x48), {}, 8000.0);
  CHECK(out.rate() == 8000.0);
  REQUIRE(out.size() == expected.size());
  std::vector<double> a(out.vec().begin() + 100, out.vec().end() - 100);
  std::vector<double> b(expected.vec().begin() + 100, expected.vec().end() - 100);
  CHECK(oracle::residual_db(a, b) < -40.0);
}

TEST_CASE("hook contract violations become HookFailure") {
  const MultiChannelSignal rec({oracle::gaussian(4800, 2)}, kRate);
  EnhanceHook wrong_rate = [](const MultiChannelSignal& r) { return r.channel(0); };
  AK_CHECK_CODE(pre_enhance(rec, wrong_rate, 8000.0), ErrorCode::kHookFailure);
  EnhanceHook throws = [](const MultiChannelSignal&) -> MonoSignal { throw std::runtime_error("boom"); };
  AK_CHECK_CODE(pre_enhance(rec, throws, 8000.0), ErrorCode::kHookFailure);
  EnhanceHook empty = [](const MultiChannelSignal&) { return MonoSignal({}, 8000.0); };
  AK_CHECK_CODE(pre_enhance(rec, empty, 8000.0), ErrorCode::kHookFailure);
}

TEST_CASE("static annotation recovers A = 0.5 and tau = 480 at 20 dB SNR") {
  const auto s = synthesize_speech_like(4.0, kRate, 3);
  const auto dev = small_device();
  const auto clean = static_recording(s, dev, 0.5, 480.0);
  const auto rec = scenes::add_white_noise(clean, 20.0, 4);
  const auto res = annotate_static(rec, s, dev);
  CHECK(std::abs(res.model.tau - 480.0) <= 1.0);
  CHECK(res.model.gain == doctest::Approx(0.5).epsilon(0.02));
  CHECK(res.direct_path.size() == rec.length());
  CHECK(res.track.valid.size() == 1);
}

TEST_CASE("static annotation of an identical recording is the identity") {
  const auto s = synthesize_speech_like(3.0, kRate, 5);
  const auto res = annotate_static(MultiChannelSignal(s), s, unit_device());
  CHECK(std::abs(res.model.tau) < 1e-6);
  CHECK(res.model.gain == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(oracle::residual_db(res.direct_path.vec(), s.vec()) < -60.0);
}

TEST_CASE("static annotation discards silence") {
  const auto s = synthesize_speech_like(2.0, kRate, 6);
  AK_CHECK_CODE(annotate_static(MultiChannelSignal(s), MonoSignal::zeros(s.size(), kRate), unit_device()),
                ErrorCode::kNoSharpPeak);
}

TEST_CASE("static annotation with an oracle hook in a reverberant room") {
  const auto s = synthesize_speech_like(3.0, kRate, 7);
  const ShoeboxRoom room{{6.0, 5.0, 3.0}, 0.6, 343.0};
  const Point3 src{2.0, 3.0, 1.5}, mic{4.2, 2.1, 1.3};
  const auto sim = simulate_moving_source(s, Trajectory::stationary(src), room, {mic});
  const double tau = sim.truth.tau[0][0];
  const auto res = annotate_static(sim.signal, s, unit_device(), {},
                                   oracle_hook(sim.truth.direct_path.channel(0)));
  CHECK(std::abs(res.model.tau - tau) <= 1.0);
  CHECK(res.model.gain == doctest::Approx(sim.truth.gain[0][0]).epsilon(0.02));
}

TEST_CASE("segment delays of a constant shift") {
  const auto s = synthesize_speech_like(6.0, kRate, 8);
  const std::vector<double> tau(s.size(), 100.0);
  const auto e = delayed_by_track(s, tau);
  const auto r = resample_to_rate(s, 8000.0);
  const auto sd = segment_delay_track(e, r, {}, kRate);
  CHECK(sd.tau.size() == 11);
  for (std::size_t k = 0; k < sd.tau.size(); ++k) {
    CHECK(sd.valid[k]);
    CHECK(std::abs(sd.tau[k] - 100.0) <= 1.0);
    CHECK(sd.times[k] == doctest::Approx(0.5 + 0.5 * k));
  }
}

TEST_CASE("segment delays follow a 100 to 150 ramp over 10 s") {
  const auto s = synthesize_speech_like(10.0, kRate, 9);
  std::vector<double> tau(s.size());
  for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = 100.0 + 50.0 * static_cast<double>(i) / static_cast<double>(tau.size());
  const auto sd = segment_delay_track(delayed_by_track(s, tau), resample_to_rate(s, 8000.0), {}, kRate);
  for (std::size_t k = 0; k < sd.tau.size(); ++k) {
    const double truth = 100.0 + 5.0 * sd.times[k];
    CHECK(sd.valid[k]);
    CHECK(std::abs(sd.tau[k] - truth) <= 2.0);
  }
}

TEST_CASE("a silent segment is flagged invalid") {
  const auto s = synthesize_speech_like(5.0, kRate, 10);
  auto e = delayed_by_track(s, std::vector<double>(s.size(), 60.0)).release();
  for (std::size_t i = 8000; i < 16000; ++i) e[i] = 0.0;  // the whole of segment 2
  const auto sd = segment_delay_track(MonoSignal(e, 8000.0), resample_to_rate(s, 8000.0), {}, kRate);
  CHECK_FALSE(sd.valid[2]);
  CHECK(sd.valid[0]);
  CHECK(sd.valid[4]);
}

TEST_CASE("cleansing removes a spike and keeps smooth tracks") {
  std::vector<double> t, v;
  for (int k = 0; k < 15; ++k) {
    t.push_back(0.5 + 0.5 * k);
    v.push_back(200.0);
  }
  v[7] += 500.0;
  const std::vector<bool> all(15, true);
  const auto c = cleanse_track(t, v, all, 35.0);
  CHECK(c.outliers == 1);
  CHECK_FALSE(c.valid[7]);
  CHECK(c.values[7] == doctest::Approx(200.0));

  std::vector<double> smooth;
  for (int k = 0; k < 15; ++k) smooth.push_back(100.0 + 3.0 * k + std::sin(k));
  const auto same = cleanse_track(t, smooth, all, 35.0);
  CHECK(same.values == smooth);
  CHECK(same.outliers == 0);

  std::vector<bool> one(15, false);
  one[3] = true;
  AK_CHECK_CODE(cleanse_track(t, smooth, one, 35.0), ErrorCode::kTooFewValidSegments);
}

TEST_CASE("moving annotation along a piecewise-linear delay track") {
  const auto s = synthesize_speech_like(10.0, kRate, 11);
  std::mt19937_64 rng(12);
  const auto traj = scenes::make_trajectory(0, rng, 10.0);
  const auto sim = simulate_moving_source(s, traj, scenes::kAnechoic, {scenes::kArrayCentre});
  const auto rec = scenes::add_white_noise(sim.signal, 20.0, 13);
  const auto res = annotate_moving(rec, s, unit_device());
  CHECK(segment_mae(res.track, sim.truth.tau[0]) <= 2.0);
  CHECK(si_sdr(res.direct_path, sim.truth.direct_path.channel(0)) >= 15.0);
  CHECK(res.direct_path.size() == rec.length());
  CHECK(res.track.valid.size() == res.track.segment_times.size());
  for (std::size_t k = 1; k < res.track.segment_times.size(); ++k)
    CHECK(res.track.segment_times[k] - res.track.segment_times[k - 1] == doctest::Approx(0.5));
  for (double g : res.track.gain_track) CHECK(g > 0.0);
}

TEST_CASE("a static scene through the moving annotator agrees with the static one") {
  const auto s = synthesize_speech_like(6.0, kRate, 14);
  const auto dev = small_device();
  const auto rec = scenes::add_white_noise(static_recording(s, dev, 0.3, 333.3), 30.0, 15);
  const auto mov = annotate_moving(rec, s, dev);
  const auto sta = annotate_static(rec, s, dev);
  const auto [lo, hi] = std::minmax_element(mov.track.tau_track.begin(), mov.track.tau_track.end());
  CHECK(*hi - *lo <= 1.0);
  for (double t : mov.track.tau_track) CHECK(std::abs(t - 333.3) <= 1.0);
  CHECK(oracle::residual_db(mov.direct_path.vec(), sta.direct_path.vec()) < -30.0);
}

TEST_CASE("corrupted segments are interpolated and counted") {
  const auto s = synthesize_speech_like(10.0, kRate, 16);
  std::mt19937_64 rng(17);
  const auto traj = scenes::make_trajectory(1, rng, 10.0);
  const auto sim = simulate_moving_source(s, traj, scenes::kAnechoic, {scenes::kArrayCentre});
  auto e8 = resample_to_rate(sim.truth.direct_path.channel(0), 8000.0).release();
  // Six of the 19 segments silenced completely; their neighbours keep half.
  const std::vector<std::size_t> corrupted{2, 5, 8, 11, 14, 17};
  for (std::size_t k : corrupted)
    for (std::size_t i = k * 4000; i < k * 4000 + 8000 && i < e8.size(); ++i) e8[i] = 0.0;
  const MonoSignal enhanced(e8, 8000.0);
  EnhanceHook hook = [enhanced](const MultiChannelSignal&) { return enhanced; };
  const auto res = annotate_moving(sim.signal, s, unit_device(), {}, hook);
  CHECK(res.diagnostics.interpolated_count == corrupted.size());
  for (std::size_t k : corrupted) CHECK_FALSE(res.track.valid[k]);
  // Silenced centres are unobservable; the measured ones must stay accurate.
  for (std::size_t k = 0; k < res.track.segment_times.size(); ++k) {
    if (!res.track.valid[k]) continue;
    const auto i = static_cast<std::size_t>(std::lround(res.track.segment_times[k] * kRate));
    CHECK(std::abs(res.track.tau_track[k] - sim.truth.tau[0][i]) <= 2.0);
  }
}

TEST_CASE("too many failed segments discard the utterance") {
  const auto s = synthesize_speech_like(5.0, kRate, 18);
  EnhanceHook silent = [](const MultiChannelSignal& r) {
    return MonoSignal::zeros(static_cast<std::size_t>(r.duration() * 8000.0), 8000.0);
  };
  AK_CHECK_CODE(annotate_moving(MultiChannelSignal(s), s, unit_device(), {}, silent), ErrorCode::kNoSharpPeak);
}

TEST_CASE("constant device latency shifts every delay and keeps the gains") {
  const auto s = synthesize_speech_like(6.0, kRate, 19);
  const auto dev = small_device();
  const auto rec = static_recording(s, dev, 0.45, 210.25);
  constexpr double kShift = 48.0;
  const auto later = fractional_delay(rec.channel(0), kShift);
  const auto a = annotate_static(rec, s, dev);
  const auto b = annotate_static(MultiChannelSignal(later), s, dev);
  CHECK(std::abs(b.model.tau - a.model.tau - kShift) < 0.02);
  CHECK(b.model.gain == doctest::Approx(a.model.gain).epsilon(1e-3));

  // A moving source heard later: the same delay curve, read kShift samples earlier.
  std::mt19937_64 rng(20);
  const auto traj = scenes::make_trajectory(3, rng, 6.0);
  const auto sim = simulate_moving_source(s, traj, scenes::kAnechoic, {scenes::kArrayCentre});
  const auto base = annotate_moving(sim.signal, s, unit_device());
  const auto moved = annotate_moving(MultiChannelSignal(fractional_delay(sim.signal.channel(0), kShift)), s,
                                     unit_device());
  const auto n = base.track.delay_track.size();
  double worst_tau = 0.0, worst_gain = 0.0, sum_tau = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 24000; i + 24000 < n; i += 480) {
    const double e = std::abs(moved.track.delay_track[i] - base.track.delay_track[i - 48] - kShift);
    worst_tau = std::max(worst_tau, e);
    sum_tau += e;
    ++count;
    worst_gain = std::max(worst_gain, std::abs(moved.track.gain_track[i] / base.track.gain_track[i - 48] - 1.0));
  }
  // Segment boundaries stay put while the content moves, so agreement is to
  // the estimator's resolution rather than bitwise.
  CHECK(sum_tau / static_cast<double>(count) < 0.02);
  CHECK(worst_tau < 0.25);
  CHECK(worst_gain < 0.01);
}

TEST_CASE("scaling the recording scales the gains only") {
  const auto s = synthesize_speech_like(6.0, kRate, 21);
  const auto rec = static_recording(s, unit_device(), 0.4, 250.0);
  auto louder = rec.channels();
  for (double& v : louder[0]) v *= 3.0;
  const auto a = annotate_moving(rec, s, unit_device());
  const auto b = annotate_moving(MultiChannelSignal(louder, kRate), s, unit_device());
  for (std::size_t k = 0; k < a.track.tau_track.size(); ++k) {
    CHECK(b.track.tau_track[k] == doctest::Approx(a.track.tau_track[k]).epsilon(1e-6));
    CHECK(b.track.segment_gain[k] == doctest::Approx(3.0 * a.track.segment_gain[k]).epsilon(1e-6));
  }
  const auto sa = annotate_static(rec, s, unit_device());
  const auto sb = annotate_static(MultiChannelSignal(louder, kRate), s, unit_device());
  CHECK(sb.model.tau == doctest::Approx(sa.model.tau).epsilon(1e-9));
  CHECK(sb.model.gain == doctest::Approx(3.0 * sa.model.gain).epsilon(1e-9));
}

TEST_CASE("with the oracle hook the reverberant tail does not reach the direct path") {
  const auto s = synthesize_speech_like(6.0, kRate, 22);
  std::mt19937_64 rng(23);
  const auto traj = scenes::make_trajectory(2, rng, 6.0);
  const ShoeboxRoom reverberant{scenes::kAnechoic.dimensions, 0.5, 343.0};
  const auto dry = simulate_moving_source(s, traj, scenes::kAnechoic, {scenes::kArrayCentre});
  const auto wet = simulate_moving_source(s, traj, reverberant, {scenes::kArrayCentre});
  const auto hook = oracle_hook(dry.truth.direct_path.channel(0));
  const auto a = annotate_moving(dry.signal, s, unit_device(), {}, hook);
  const auto b = annotate_moving(wet.signal, s, unit_device(), {}, hook);
  CHECK(oracle::residual_db(b.direct_path.vec(), a.direct_path.vec()) < -60.0);
}

TEST_CASE("annotation is deterministic") {
  const auto s = synthesize_speech_like(5.0, kRate, 24);
  const auto rec = scenes::add_white_noise(static_recording(s, unit_device(), 0.7, 90.0), 15.0, 25);
  const auto a = annotate_moving(rec, s, unit_device());
  const auto b = annotate_moving(rec, s, unit_device());
  CHECK(a.direct_path.vec() == b.direct_path.vec());
  CHECK(a.track.tau_track == b.track.tau_track);
  CHECK(a.track.gain_track == b.track.gain_track);
}

TEST_CASE("rendering an identity track returns the source") {
  const auto s = synthesize_speech_like(2.0, kRate, 26);
  DelayGainTrack tr;
  tr.rate_hz = kRate;
  tr.segment_length_s = 1.0;
  tr.segment_times = {0.5, 1.0, 1.5};
  tr.tau_track = {0.0, 0.0, 0.0};
  tr.segment_gain = {1.0, 1.0, 1.0};
  tr.valid = {true, true, true};
  tr.gain_track.assign(s.size(), 1.0);
  const auto y = render_direct_path(s, unit_device(), tr);
  CHECK(y.vec() == s.vec());

  tr.gain_track.assign(s.size(), 0.5);
  const auto half = render_direct_path(s, unit_device(), tr);
  CHECK(oracle::rms(half.vec()) == doctest::Approx(0.5 * oracle::rms(s.vec())));
}

TEST_CASE("re-rendering a recovered track is bitwise stable and matches the annotation") {
  const auto s = synthesize_speech_like(5.0, kRate, 27);
  std::mt19937_64 rng(28);
  const auto traj = scenes::make_trajectory(1, rng, 5.0);
  const auto sim = simulate_moving_source(s, traj, scenes::kAnechoic, {scenes::kArrayCentre});
  const auto res = annotate_moving(sim.signal, s, unit_device());
  const auto a = render_direct_path(s, unit_device(), res.track);
  const auto b = render_direct_path(s, unit_device(), res.track);
  CHECK(a.vec() == b.vec());
  CHECK(a.vec() == res.direct_path.vec());
}

TEST_CASE("rendering rejects tracks that leave gaps") {
  const auto s = synthesize_speech_like(4.0, kRate, 29);
  DelayGainTrack tr;
  tr.rate_hz = kRate;
  tr.segment_length_s = 1.0;
  tr.segment_times = {0.5, 1.0};  // stops covering at 1.5 s
  tr.tau_track = {0.0, 0.0};
  tr.segment_gain = {1.0, 1.0};
  tr.valid = {true, true};
  tr.gain_track.assign(s.size(), 1.0);
  AK_CHECK_CODE(render_direct_path(s, unit_device(), tr), ErrorCode::kTrackCoverageGap);
  tr.segment_times = {0.5, 3.5};
  AK_CHECK_CODE(render_direct_path(s, unit_device(), tr), ErrorCode::kTrackCoverageGap);
}
