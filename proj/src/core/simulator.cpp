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

#include "arraykit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <nlohmann/json.hpp>

#include "arraykit/dataset.hpp"
#include "arraykit/test_signals.hpp"
#include "arraykit/wav.hpp"

namespace arraykit {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

bool is_stationary(const Trajectory& traj) {
  for (const auto& p : traj.positions)
    if (p != traj.positions.front()) return false;
  return true;
}

void add_into(std::vector<double>& y, const std::vector<double>& x, std::size_t offset) {
  const std::size_t end = std::min(y.size(), offset + x.size());
  for (std::size_t i = offset; i < end; ++i) y[i] += x[i - offset];
}

}  // namespace

void direct_path_tracks(const Trajectory& traj, const Point3& mic, double speed_of_sound,
                        double rate, std::size_t length, std::vector<double>& tau,
                        std::vector<double>& gain) {
  tau.resize(length);
  gain.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double d = distance(traj.position_at(static_cast<double>(i) / rate), mic);
    if (d < kMinSourceDistance) fail(ErrorCode::kGeometryError, "source passes within 1 cm of a microphone");
    tau[i] = d / speed_of_sound * rate;
    gain[i] = 1.0 / (4.0 * std::numbers::pi * d);
  }
}

LocationTrack location_track(const Trajectory& traj, const std::vector<Point3>& mics,
                             double duration_s, double grid_s) {
  require(!mics.empty() && grid_s > 0.0, ErrorCode::kInvalidArgument,
          "location track needs microphones and a positive grid");
  Point3 centre{0.0, 0.0, 0.0};
  for (const auto& m : mics)
    for (int a = 0; a < 3; ++a) centre[a] += m[a] / static_cast<double>(mics.size());
  const auto count = static_cast<std::size_t>(std::floor(duration_s / grid_s + 1e-9)) + 1;
  LocationTrack track(count);
  for (std::size_t i = 0; i < count; ++i) {
    LocationFrame& f = track[i];
    f.t_s = static_cast<double>(i) * grid_s;
    const Point3 p = traj.position_at(f.t_s);
    const double x = p[0] - centre[0], y = p[1] - centre[1], z = p[2] - centre[2];
    double az = std::atan2(y, x) * kDeg;
    if (az < 0.0) az += 360.0;
    if (az >= 360.0) az -= 360.0;
    f.azimuth_deg = az;
    f.elevation_deg = std::atan2(z, std::hypot(x, y)) * kDeg;
    f.distance_m = std::sqrt(x * x + y * y + z * z);
    f.valid = true;
  }
  return track;
}

SimulationOutput simulate_moving_source(const MonoSignal& source, const Trajectory& traj,
                                        const ShoeboxRoom& room, const std::vector<Point3>& mics,
                                        const MovingSourceOptions& options) {
  room.validate();
  traj.validate();
  require(!mics.empty(), ErrorCode::kInvalidArgument, "no microphones given");
  require(options.hop_s > 0.0, ErrorCode::kInvalidArgument, "hop must be positive");
  for (const auto& p : traj.positions)
    if (!room.contains(p)) fail(ErrorCode::kPositionOutsideRoom, "trajectory leaves the room");
  for (const auto& m : mics)
    if (!room.contains(m)) fail(ErrorCode::kPositionOutsideRoom, "microphone outside the room");
  const double rate = source.rate();
  const std::size_t n = source.size();
  const double duration = static_cast<double>(n) / rate;
  if (traj.times.size() > 1 &&
      (traj.times.front() > 1.0 / rate || traj.times.back() < duration - 1.0 / rate))
    fail(ErrorCode::kTrajectoryMismatch, "trajectory does not span the source duration");

  const double beta = room.reflection_coefficient();
  const bool stationary = is_stationary(traj);
  const double hop = options.hop_s * rate;
  const std::size_t locations =
      stationary ? 1 : static_cast<std::size_t>(std::ceil(static_cast<double>(n) / hop)) + 1;
  std::vector<double> boundaries;
  for (std::size_t l = 0; l + 1 < locations; ++l) boundaries.push_back((static_cast<double>(l) + 0.5) * hop);
  const TrapeziumLayout layout(boundaries, 0.5 * hop);

  IsmOptions ism;
  ism.rate_hz = rate;
  ism.max_order = options.max_order;
  ism.include_direct = false;

  SimulationOutput out;
  std::vector<std::vector<double>> channels(mics.size()), direct(mics.size());
  out.truth.tau.resize(mics.size());
  out.truth.gain.resize(mics.size());
  const auto x = source.samples();
  for (std::size_t m = 0; m < mics.size(); ++m) {
    auto& tau = out.truth.tau[m];
    auto& gain = out.truth.gain[m];
    direct_path_tracks(traj, mics[m], room.speed_of_sound, rate, n, tau, gain);
    std::vector<double> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<double>(i) - tau[i];
    auto dp = sample_at(x, pos, 1.0);
    for (std::size_t i = 0; i < n; ++i) dp[i] *= gain[i];
    channels[m] = dp;
    direct[m] = std::move(dp);

    if (beta == 0.0) continue;
    for (std::size_t l = 0; l < locations; ++l) {
      const auto [a, b] = layout.support(l, n);
      if (a >= b) continue;
      const Point3 p = traj.position_at(static_cast<double>(l) * options.hop_s);
      const auto h = simulate_shoebox_rir(room, p, mics[m], ism);
      std::vector<double> piece(b - a);
      for (std::size_t i = a; i < b; ++i)
        piece[i - a] = x[i] * layout.weight(l, static_cast<double>(i));
      add_into(channels[m], convolve(piece, h.samples()), a);
    }
  }
  out.signal = MultiChannelSignal(std::move(channels), rate);
  out.truth.direct_path = MultiChannelSignal(std::move(direct), rate);
  out.truth.location = location_track(traj, mics, duration, options.location_grid_s);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::kConfigInvalid, "scene." + where + ": " + what);
}

Point3 read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) config_error(where, "expected [x, y, z]");
  Point3 p;
  for (int a = 0; a < 3; ++a) {
    if (!j[static_cast<std::size_t>(a)].is_number()) config_error(where, "expected numbers");
    p[a] = j[static_cast<std::size_t>(a)].get<double>();
  }
  return p;
}

double read_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) config_error(where + "." + key, "expected a number");
  return j[key].get<double>();
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

}  // namespace

namespace {

SceneSpec parse_scene_object(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfigInvalid, std::string("scene: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("", "expected an object");
  SceneSpec s;
  s.rate_hz = read_number(j, "rate", 48000.0, "rate");
  if (!j.contains("room")) config_error("room", "missing");
  const json& room = j["room"];
  if (!room.contains("dimensions")) config_error("room.dimensions", "missing");
  s.room.dimensions = read_point(room["dimensions"], "room.dimensions");
  s.room.t60_s = read_number(room, "t60", 0.0, "room");
  s.room.speed_of_sound = read_number(room, "speed_of_sound", 343.0, "room");

  if (j.contains("mics")) {
    if (!j["mics"].is_array()) config_error("mics", "expected a list of points");
    for (std::size_t i = 0; i < j["mics"].size(); ++i)
      s.mics.push_back(read_point(j["mics"][i], "mics[" + std::to_string(i) + "]"));
  } else if (j.contains("geometry")) {
    const json& g = j["geometry"];
    const std::string path = resolve(g.value("path", ""), base_dir);
    const ArrayGeometry geo = load_array_geometry(path);
    const Point3 centre = g.contains("center") ? read_point(g["center"], "geometry.center") : Point3{0, 0, 0};
    std::vector<std::size_t> chans;
    if (g.contains("channels")) {
      chans = g["channels"].get<std::vector<std::size_t>>();
    } else {
      for (std::size_t c = 0; c < geo.positions.size(); ++c) chans.push_back(c);
    }
    for (std::size_t c : chans) {
      if (c >= geo.positions.size()) config_error("geometry.channels", "channel out of range");
      Point3 p = geo.positions[c];
      for (int a = 0; a < 3; ++a) p[a] += centre[a];
      s.mics.push_back(p);
    }
  } else {
    config_error("mics", "missing (give mics or geometry)");
  }

  if (j.contains("source")) {
    const json& src = j["source"];
    s.source_kind = src.value("kind", std::string("speech_like"));
    s.source_path = resolve(src.value("path", ""), base_dir);
    s.source_seed = src.value("seed", std::uint64_t{1});
    if (s.source_kind != "speech_like" && s.source_kind != "wav")
      config_error("source.kind", "expected speech_like or wav");
    if (s.source_kind == "wav" && !std::filesystem::exists(s.source_path))
      config_error("source.path", "file not found: " + s.source_path);
  }
  s.duration_s = read_number(j, "duration", 0.0, "duration");
  if (s.source_kind == "speech_like" && !(s.duration_s > 0.0))
    config_error("duration", "must be positive for synthetic sources");

  if (j.contains("trajectory")) {
    const json& t = j["trajectory"];
    if (!t.contains("times") || !t.contains("positions"))
      config_error("trajectory", "needs times and positions");
    s.trajectory.times = t["times"].get<std::vector<double>>();
    for (std::size_t i = 0; i < t["positions"].size(); ++i)
      s.trajectory.positions.push_back(
          read_point(t["positions"][i], "trajectory.positions[" + std::to_string(i) + "]"));
  } else if (j.contains("position")) {
    s.trajectory = Trajectory::stationary(read_point(j["position"], "position"));
  } else {
    config_error("trajectory", "missing (give trajectory or position)");
  }
  try {
    s.trajectory.validate();
  } catch (const Error& e) {
    config_error("trajectory", e.what());
  }
  s.hop_s = read_number(j, "hop_s", 0.1, "hop_s");
  s.max_order = static_cast<int>(read_number(j, "max_order", -1, "max_order"));
  if (j.contains("noise")) {
    const json& nz = j["noise"];
    s.noise.kind = nz.value("kind", std::string("white"));
    s.noise.snr_db = read_number(nz, "snr_db", 20.0, "noise");
    s.noise.seed = nz.value("seed", std::uint64_t{1});
    if (s.noise.kind != "none" && s.noise.kind != "white" && s.noise.kind != "diffuse")
      config_error("noise.kind", "expected none, white or diffuse");
  }
  return s;
}

}  // namespace

SceneSpec parse_scene(const std::string& json_text, const std::string& base_dir) {
  try {
    return parse_scene_object(json_text, base_dir);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigInvalid, std::string("scene: ") + e.what());
  }
}

SceneResult run_scene(const SceneSpec& spec) {
  SceneResult r;
  if (spec.source_kind == "wav") {
    r.source = read_wav(spec.source_path).channel(0);
    require(r.source.rate() == spec.rate_hz, ErrorCode::kRateMismatch,
            "source WAV rate differs from the scene rate");
  } else {
    r.source = synthesize_speech_like(spec.duration_s, spec.rate_hz, spec.source_seed);
  }
  MovingSourceOptions mo;
  mo.hop_s = spec.hop_s;
  mo.max_order = spec.max_order;
  r.sim = simulate_moving_source(r.source, spec.trajectory, spec.room, spec.mics, mo);

  const std::size_t n = r.sim.signal.length();
  const std::size_t m = r.sim.signal.num_channels();
  if (spec.noise.kind == "none" || n == 0) {
    r.noise = MultiChannelSignal(std::vector<std::vector<double>>(m, std::vector<double>(n, 0.0)),
                                 spec.rate_hz);
    return r;
  }
  if (spec.noise.kind == "white") {
    std::vector<std::vector<double>> ch;
    for (std::size_t c = 0; c < m; ++c) ch.push_back(white_noise(n, spec.noise.seed + c));
    r.noise = MultiChannelSignal(std::move(ch), spec.rate_hz);
  } else {
    const MonoSignal base(white_noise(n * m + 1, spec.noise.seed), spec.rate_hz);
    r.noise = generate_diffuse_noise(base, spec.mics, static_cast<double>(n) / spec.rate_hz);
  }
  const double ps = mean_power(r.sim.signal.channel_view(0));
  const double pn = mean_power(r.noise.channel_view(0));
  const double scale = pn > 0.0 ? std::sqrt(ps / pn * std::pow(10.0, -spec.noise.snr_db / 10.0)) : 0.0;
  std::vector<std::vector<double>> noisy = r.sim.signal.channels();
  std::vector<std::vector<double>> scaled = r.noise.channels();
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      scaled[c][i] *= scale;
      noisy[c][i] += scaled[c][i];
    }
  r.noise = MultiChannelSignal(std::move(scaled), spec.rate_hz);
  r.sim.signal = MultiChannelSignal(std::move(noisy), spec.rate_hz);
  return r;
}

}  // namespace arraykit
