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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arraykit/annotator.hpp"
#include "arraykit/dataset.hpp"
#include "arraykit/fisheye.hpp"
#include "arraykit/measurement.hpp"
#include "arraykit/metrics.hpp"
#include "arraykit/simulator.hpp"
#include "arraykit/test_signals.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace arraykit;
namespace fs = std::filesystem;

namespace {

constexpr double kRate = 48000.0;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DeviceIR loudspeaker() {
  DeviceIR d;
  d.taps = MonoSignal({0.2, 1.0, -0.35, 0.12, -0.05}, kRate);
  d.window_length = 5;
  d.peak_index = 1;
  return d;
}

DeviceIR unit_device() {
  DeviceIR d;
  d.taps = MonoSignal({1.0}, kRate);
  d.window_length = 1;
  return d;
}

// ---------------------------------------------------------------------------

Outcome static_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double t60s[] = {0.0, 0.3, 0.6};
  const double snrs[] = {10.0, 20.0, std::numeric_limits<double>::infinity()};
  const ShoeboxRoom base{{10.0, 8.0, 3.0}, 0.0, 343.0};
  const Point3 mic{1.2, 1.2, 1.4};
  const auto dev = loudspeaker();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gain_d(0.1, 2.0), tau_d(50.0, 1000.0), ang_d(0.0, 35.0);

  int ok = 0, anechoic = 0;
  double worst_tau = 0.0, worst_gain = 0.0, min_sdr = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const double t60 = t60s[i % 3], snr = snrs[(i / 3) % 3];
    const double A = gain_d(rng), tau = tau_d(rng), ang = ang_d(rng) * kPi / 180.0;
    const auto s = synthesize_speech_like(4.0, kRate, 100 + i);
    auto shaped = convolve(s.vec(), dev.taps.vec());
    shaped.resize(s.size());
    auto direct = fractional_delay(MonoSignal(shaped, kRate), tau).release();
    for (double& v : direct) v *= A;
    std::vector<double> rec = direct;

    if (t60 > 0.0) {
      // Reflections of a source placed so that its direct delay is tau.
      ShoeboxRoom room = base;
      room.t60_s = t60;
      const double d = tau * room.speed_of_sound / kRate;
      const Point3 src{mic[0] + d * std::cos(ang), mic[1] + d * std::sin(ang), 1.5 - 0.1 * (i % 2)};
      const double dz = src[2] - mic[2];
      const Point3 src_level{mic[0] + std::sqrt(d * d - dz * dz) * std::cos(ang),
                             mic[1] + std::sqrt(d * d - dz * dz) * std::sin(ang), src[2]};
      IsmOptions opt;
      opt.include_direct = false;
      opt.rate_hz = kRate;
      const auto refl = simulate_shoebox_rir(room, src_level, mic, opt);
      const double scale = A * 4.0 * kPi * d;
      auto tail = convolve(shaped, refl.vec());
      for (std::size_t n = 0; n < rec.size(); ++n) rec[n] += scale * tail[n];
    }
    MultiChannelSignal recording({rec}, kRate);
    if (std::isfinite(snr)) recording = scenes::add_white_noise(recording, snr, 500 + i);

    EnhanceHook hook;
    if (t60 > 0.0) hook = oracle_hook(MonoSignal(direct, kRate));
    try {
      const auto res = annotate_static(recording, s, dev, {}, hook);
      const double te = std::abs(res.model.tau - tau), ge = std::abs(res.model.gain / A - 1.0);
      worst_tau = std::max(worst_tau, te);
      worst_gain = std::max(worst_gain, ge);
      if (te <= 1.0 && ge <= 0.02) ++ok;
      if (t60 == 0.0) {
        ++anechoic;
        min_sdr = std::min(min_sdr, si_sdr(res.direct_path, MonoSignal(direct, kRate)));
      }
    } catch (const Error& e) {
      if (t60 == 0.0) min_sdr = -std::numeric_limits<double>::infinity();
    }
  }
  const double elapsed = seconds_since(t0);
  const bool pass = ok >= 48 && min_sdr >= 30.0 && elapsed < 300.0;
  return {pass, fmt("%d/50 scenes within 1 sample and 2%% (need 48; worst |dtau| %.3f, |dA/A| %.4f); "
                    "min SI-SDR over %d reverb-free scenes %.1f dB (need 30); %.0f s (limit 300)",
                    ok, worst_tau, worst_gain, anechoic, min_sdr, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome moving_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_mae = 0.0, min_sdr = std::numeric_limits<double>::infinity();
  int ok = 0;
  for (int i = 0; i < 20; ++i) {
    const auto s = synthesize_speech_like(10.0, kRate, 700 + i);
    std::mt19937_64 rng(800 + i);
    const auto traj = scenes::make_trajectory(i, rng, 10.0);
    const auto sim = simulate_moving_source(s, traj, scenes::kAnechoic, {scenes::kArrayCentre});
    const auto rec = scenes::add_white_noise(sim.signal, 20.0, 900 + i);
    try {
      const auto res = annotate_moving(rec, s, unit_device());
      const auto& truth = sim.truth.tau[0];
      double mae = 0.0;
      for (std::size_t k = 0; k < res.track.segment_times.size(); ++k) {
        const auto n = std::min(truth.size() - 1,
                                static_cast<std::size_t>(std::lround(res.track.segment_times[k] * kRate)));
        mae += std::abs(res.track.tau_track[k] - truth[n]);
      }
      mae /= static_cast<double>(res.track.segment_times.size());
      const double sdr = si_sdr(res.direct_path, sim.truth.direct_path.channel(0));
      worst_mae = std::max(worst_mae, mae);
      min_sdr = std::min(min_sdr, sdr);
      if (mae <= 2.0 && sdr >= 15.0) ++ok;
    } catch (const Error&) {
      worst_mae = std::numeric_limits<double>::infinity();
    }
  }
  const double elapsed = seconds_since(t0);
  return {ok == 20 && elapsed < 600.0,
          fmt("%d/20 trajectories pass; worst tau MAE %.3f samples (limit 2); min SI-SDR %.1f dB (need 15); "
              "%.0f s (limit 600)",
              ok, worst_mae, min_sdr, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome t60_and_ess() {
  double worst_rel = 0.0;
  bool identity = true;
  for (double t60 : {0.3, 0.8, 1.5}) {
    const auto n = static_cast<std::size_t>((t60 + 0.3) * kRate);
    auto h = oracle::gaussian(n, 40);
    const double a = 3.0 * std::log(10.0) / t60;
    for (std::size_t i = 0; i < n; ++i) h[i] *= std::exp(-a * static_cast<double>(i) / kRate);
    const auto e = estimate_t60(schroeder_edc(MonoSignal(h, kRate)));
    worst_rel = std::max(worst_rel, std::abs(e.t60_s / t60 - 1.0));
    identity = identity && e.t60_s == 3.0 * e.t20_s;
  }
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> slope(20.0, 400.0), wobble(-0.5, 0.5);
  int fits = 0;
  for (int trial = 0; trial < 200; ++trial) {
    DecayCurve edc;
    const double k = slope(rng);
    const double dt = 40.0 / k / 2000.0;  // every curve spans 40 dB
    for (int i = 0; i <= 2000; ++i) {
      edc.time_s.push_back(i * dt);
      edc.level_db.push_back(std::min(0.0, -k * i * dt + (i ? wobble(rng) : 0.0)));
    }
    for (std::size_t i = 1; i < edc.level_db.size(); ++i)
      edc.level_db[i] = std::min(edc.level_db[i], edc.level_db[i - 1]);
    try {
      const auto e = estimate_t60(edc);
      identity = identity && e.t60_s == 3.0 * e.t20_s;
      ++fits;
    } catch (const Error&) {
    }
  }

  SweepSpec spec;
  const auto p = generate_ess(spec);
  const std::vector<double> one(p.sweep.vec().begin(), p.sweep.vec().begin() + static_cast<long>(spec.sweep_length()));
  const auto y = convolve(one, p.inverse_filter.vec());
  std::size_t pk = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::abs(y[i]) > std::abs(y[pk])) pk = i;
  const long lobe = std::lround(2.0 / spec.f1_hz * spec.rate_hz);
  double side = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::labs(static_cast<long>(i) - static_cast<long>(pk)) > lobe) side = std::max(side, std::abs(y[i]));
  const double side_db = 20.0 * std::log10(side / std::abs(y[pk]));

  return {worst_rel <= 0.10 && side_db <= -60.0 && identity && fits == 200,
          fmt("T60 {0.3, 0.8, 1.5} s worst relative error %.2f%% (limit 10%%); ESS sidelobes %.1f dB (need <= -60); "
              "T60 == 3*T20 exactly: %s over %d/200 random noisy slopes plus the three decays",
              100.0 * worst_rel, side_db, identity ? "yes" : "NO", fits)};
}

// ---------------------------------------------------------------------------

Outcome localization() {
  CameraModel cam;
  cam.u0 = 400.0;
  cam.v0 = 400.0;
  cam.pixels_per_radian = 300.0;
  cam.height_m = 2.4;
  cam.max_theta_deg = 85.0;
  auto project = [&](double x, double y, double z) {
    const double theta = std::atan2(std::hypot(x, y), cam.height_m - z);
    const double phi = std::atan2(y, x);
    const double r = cam.pixels_per_radian * theta;
    return std::pair{cam.u0 + r * std::cos(phi), cam.v0 - r * std::sin(phi)};
  };

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> az(0.0, 2.0 * kPi), dist(0.5, 3.0), height(1.30, 1.60);
  double w_az = 0.0, w_el = 0.0, w_d = 0.0, w_px = 0.0;
  int scenes_done = 0;
  bool failed = false;
  while (scenes_done < 100) {
    LocationConfig cfg;
    cfg.source_center_height_m = height(rng);
    const double a = az(rng), d = dist(rng);
    const auto [u, v] = project(d * std::cos(a), d * std::sin(a), cfg.source_center_height_m + cfg.led_offset_m);
    RgbImage img(800, 800, 90, 90, 90);
    if (!img.contains(static_cast<int>(u), static_cast<int>(v))) continue;
    draw_disk(img, u, v, 3.5, 250, 15, 15);
    try {
      const auto det = detect_led(img, LedColor::kRed);
      w_px = std::max(w_px, std::hypot(det.u - u, det.v - v));
      const auto f = locate_pixel(cam, cfg, det.u, det.v);
      const double dz = cfg.source_center_height_m - cfg.array_height_m;
      w_az = std::max(w_az, oracle::angle_diff_deg(f.azimuth_deg, a * 180.0 / kPi));
      w_el = std::max(w_el, std::abs(f.elevation_deg - std::atan2(dz, d) * 180.0 / kPi));
      w_d = std::max(w_d, std::abs(f.distance_m / std::hypot(d, dz) - 1.0));
    } catch (const Error&) {
      failed = true;
    }
    ++scenes_done;
  }

  // Jittered 30 fps detections must land on an exact 100 ms grid.
  LocationConfig cfg;
  std::vector<LedDetection> dets;
  std::uniform_real_distribution<double> jitter(-0.012, 0.012);
  for (int i = 0; i < 300; ++i) {
    const double t = std::max(0.0, i / 30.0 + jitter(rng));
    const auto [u, v] = project(1.0 + 0.1 * t, 0.5, cfg.source_center_height_m + cfg.led_offset_m);
    dets.push_back({u, v, 1.0, t});
  }
  cfg.duration_s = 9.9;
  const auto track = annotate_location(dets, cam, cfg);
  bool grid = track.size() == 100;
  for (std::size_t i = 0; grid && i < track.size(); ++i)
    grid = std::abs(track[i].t_s - 0.1 * static_cast<double>(i)) <= 1e-12;

  const bool pass = !failed && w_az <= 0.5 && w_el <= 1.0 && w_d <= 0.02 && w_px <= 1.0 && grid;
  return {pass, fmt("100 rendered scenes: worst azimuth %.3f deg (limit 0.5), elevation %.3f deg (limit 1), "
                    "distance %.3f%% (limit 2%%), LED %.3f px (limit 1); 100 ms grid %s",
                    w_az, w_el, 100.0 * w_d, w_px, grid ? "exact" : "NOT exact")};
}

// ---------------------------------------------------------------------------

Outcome diffuse_noise() {
  const MonoSignal src(oracle::gaussian(static_cast<std::size_t>(125.0 * kRate), 8), kRate);
  const auto noise = generate_diffuse_noise(src, {{0, 0, 0}, {0.06, 0, 0}}, 60.0);
  CoherenceOptions opt;
  opt.spacing_m = 0.06;
  const auto p = estimate_spatial_coherence(noise, 0, 1, opt);
  double worst = 0.0;
  for (std::size_t k = 0; k < p.frequencies.size() && p.frequencies[k] <= 4000.0; ++k)
    worst = std::max(worst, std::abs(p.measured[k].real() - sinc_coherence_model(0.06, p.frequencies[k])));

  const MultiChannelSignal same({noise.channels()[0], noise.channels()[0]}, noise.rate());
  const auto q = estimate_spatial_coherence(same, 0, 1);
  double worst_self = 0.0;
  for (const auto& c : q.measured) worst_self = std::max(worst_self, std::abs(c - 1.0));

  const double f0 = 343.0 / (2.0 * 0.06);
  const bool zero = std::abs(sinc_coherence_model(0.06, f0)) < 1e-12 && sinc_coherence_model(0.06, f0 - 1.0) > 0.0 &&
                    sinc_coherence_model(0.06, f0 + 1.0) < 0.0;
  return {worst < 0.1 && worst_self < 1e-9 && zero && noise.duration() == 60.0,
          fmt("60 s at 6 cm: worst |coherence - sinc| up to 4 kHz %.4f (limit 0.1); identical channels |c - 1| <= %.1e; "
              "first model zero at %.1f Hz %s",
              worst, worst_self, f0, zero ? "confirmed" : "NOT confirmed")};
}

// ---------------------------------------------------------------------------

Outcome mixing() {
  const double rate = 16000.0;
  const auto s = synthesize_speech_like(1.0, rate, 3).release();
  const MultiChannelSignal speech({s, s}, rate);
  const MultiChannelSignal noise({oracle::gaussian(48000, 4), oracle::gaussian(48000, 5)}, rate);
  SnrSampler draw(77);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double snr = draw();
    const auto m = mix_at_snr(speech, noise, snr, {.seed = static_cast<std::uint64_t>(i)});
    worst = std::max(worst, std::abs(measured_snr_db(speech.channel_view(0), m.scaled_noise.channel_view(0)) - snr));
  }
  SnrSampler train(78);
  std::vector<double> u(10000);
  bool in_range = true;
  for (double& x : u) {
    x = train();
    in_range = in_range && x >= -10.0 && x <= 15.0;
  }
  const double p = oracle::ks_pvalue(oracle::ks_uniform_statistic(u, -10.0, 15.0), u.size());
  return {worst <= 0.1 && p > 0.01 && in_range,
          fmt("1000 mixtures: worst |measured - requested| %.2e dB (limit 0.1); 10000 train draws in [-10, 15]: %s, "
              "KS p = %.3f (need > 0.01)",
              worst, in_range ? "yes" : "no", p)};
}

// ---------------------------------------------------------------------------

Outcome metrics() {
  bool ok = true;
  const auto s = oracle::gaussian(16000, 1);
  for (double a : {1.0, 2.0, -0.5, 1e-3, 1e4}) {
    std::vector<double> e(s);
    for (double& v : e) v *= a;
    ok = ok && si_sdr(e, s) == kSiSdrCapDb;
  }
  auto n = oracle::gaussian(16000, 2);
  double ns = 0.0, ss = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ns += n[i] * s[i];
    ss += s[i] * s[i];
  }
  for (std::size_t i = 0; i < s.size(); ++i) n[i] -= ns / ss * s[i];
  for (double v : n) nn += v * v;
  std::vector<double> e(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) e[i] = 0.7 * s[i] + std::sqrt(0.49 * ss / nn) * n[i];
  const double zero_db = si_sdr(e, s);
  ok = ok && std::abs(zero_db) < 1e-9;

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> grid(0, 360 * 64 - 1);
  std::bernoulli_distribution keep(0.9);
  bool bitwise = true;
  for (int round = 0; round < 50; ++round) {
    const std::size_t frames = 200 + 40 * round;
    FramewiseAzimuth a, b;
    for (std::size_t i = 0; i < frames; ++i) {
      const double t = 0.1 * static_cast<double>(i);
      a.times.push_back(t);
      b.times.push_back(t);
      a.azimuth_deg.push_back(grid(rng) / 64.0);
      b.azimuth_deg.push_back(grid(rng) / 64.0);
      a.valid.push_back(keep(rng));
      b.valid.push_back(keep(rng));
    }
    double sum = 0.0;
    std::size_t used = 0, hits = 0;
    for (std::size_t i = 0; i < frames; ++i) {
      if (!a.valid[i] || !b.valid[i]) continue;
      const double err = oracle::angle_diff_deg(a.azimuth_deg[i], b.azimuth_deg[i]);
      sum += err;
      hits += err < 5.0 ? 1 : 0;
      ++used;
    }
    const auto m = loc_metrics(a, b, 5.0);
    bitwise = bitwise && m.frames == used && m.mae_deg == sum / static_cast<double>(used) &&
              m.acc_pct == 100.0 * static_cast<double>(hits) / static_cast<double>(used);
  }
  const double wrap = circular_error_deg(359.0, 1.0);
  return {ok && bitwise && wrap == 2.0,
          fmt("SI-SDR scale invariance %s; orthogonal noise %.2e dB (exact 0); loc_metrics vs brute force %s "
              "over 50 tracks; 359/1 deg error %.1f",
              ok ? "exact" : "FAILED", zero_db, bitwise ? "bitwise equal" : "DIFFERENT", wrap)};
}

// ---------------------------------------------------------------------------

Outcome subarrays() {
  const auto g = example_geometry_32ch();
  std::mt19937_64 rng(99);
  std::vector<double> counts(7, 0.0);
  int bad = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto sel = select_subarray(g, SubarrayPolicy::kTraining, rng);
    if (sel.size() < 2 || sel.size() > 8 || std::find(sel.begin(), sel.end(), 0) == sel.end() ||
        (sel.size() == 5 && is_uniform_linear_5(g, sel))) {
      ++bad;
      continue;
    }
    counts[sel.size() - 2] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 7.0) * (c - draws / 7.0) / (draws / 7.0);
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(6.0), chi2));
  const bool fixed = select_subarray(g, SubarrayPolicy::kTest, rng) == std::vector<std::size_t>{11, 3, 0, 7, 12};
  return {bad == 0 && p > 0.01 && fixed,
          fmt("10000 draws: %d policy violations; size chi-square p = %.3f (need > 0.01); test array %s",
              bad, p, fixed ? "[11, 3, 0, 7, 12]" : "WRONG")};
}

// ---------------------------------------------------------------------------

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" ARRAYKIT_CLI "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome closure() {
  std::vector<fs::path> dirs;
  std::vector<int> codes;
  double si_sdr_db = 0.0;
  for (int run = 0; run < 2; ++run) {
    const auto dir = oracle::temp_dir("closure_" + std::to_string(run));
    for (const char* f : {"closure_pipeline.json", "closure_scene.json", "geometry_32ch.json"})
      fs::copy_file(fs::path(ARRAYKIT_CONFIG_DIR) / f, dir / f);
    for (const char* cmd : {"simulate", "annotate-dp", "score"})
      codes.push_back(run_cli(dir, std::string("--config closure_pipeline.json ") + cmd));
    dirs.push_back(dir);
  }
  bool all_zero = true;
  for (int c : codes) all_zero = all_zero && c == 0;

  std::size_t files = 0;
  bool identical = fs::is_directory(dirs[0] / "run");
  if (identical) {
    for (const auto& e : fs::recursive_directory_iterator(dirs[0] / "run")) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), dirs[0]);
      identical = identical && slurp(e.path()) == slurp(dirs[1] / rel);
      ++files;
    }
  }
  const auto score_path = dirs[0] / "run" / "score.json";
  if (fs::exists(score_path)) {
    const auto text = slurp(score_path);
    const auto at = text.find("\"si_sdr_db\":");
    if (at != std::string::npos) si_sdr_db = std::strtod(text.c_str() + at + 12, nullptr);
  }
  for (const auto& d : dirs) fs::remove_all(d);
  return {all_zero && identical && files >= 5,
          fmt("simulate, annotate-dp, score from one config: exit codes %s; %zu artifacts byte-identical across "
              "two runs: %s; direct-path SI-SDR %.1f dB",
              all_zero ? "all 0" : "NONZERO", files, identical ? "yes" : "no", si_sdr_db)};
}

}  // namespace

// Optional arguments select criteria by name; default is all of them.
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"static-annotation-oracle", static_oracle},
      {"moving-annotation-oracle", moving_oracle},
      {"t60-and-sweep", t60_and_ess},
      {"localization-geometry", localization},
      {"diffuse-noise-coherence", diffuse_noise},
      {"mixing-snr", mixing},
      {"metrics", metrics},
      {"subarray-policy", subarrays},
      {"closure-pipeline", closure},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (argc > 1 && std::find_if(argv + 1, argv + argc, [&](const char* a) { return std::string(a) == name; }) ==
                        argv + argc)
      continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
