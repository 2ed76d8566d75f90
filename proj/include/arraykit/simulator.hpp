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

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arraykit/fisheye.hpp"
#include "arraykit/signal.hpp"

namespace arraykit {

using Point3 = std::array<double, 3>;

double distance(const Point3& a, const Point3& b);

// Closer source-microphone pairs are rejected with GeometryError.
inline constexpr double kMinSourceDistance = 0.01;  // metres

// Shoebox room with a frequency-independent reverberation time.
struct ShoeboxRoom {
  Point3 dimensions{0.0, 0.0, 0.0};
  double t60_s = 0.0;
  double speed_of_sound = 343.0;

  void validate() const;
  bool contains(const Point3& p) const;
  // Uniform wall reflection coefficient from Sabine's formula; 0 for t60 = 0.
  double reflection_coefficient() const;
};

struct IsmOptions {
  double rate_hz = 48000.0;
  int max_order = -1;        // -1: limited only by length
  double length_s = 0.0;     // 0: t60 plus the direct delay and kernel margin
  bool include_direct = true;
};

// Image-source RIR with amplitudes beta^reflections / (4 pi d), each image
// placed with the band-limited fractional kernel.
ImpulseResponse simulate_shoebox_rir(const ShoeboxRoom& room, const Point3& source,
                                     const Point3& mic, const IsmOptions& options = {});

// Piecewise-linear path through time-stamped waypoints.
struct Trajectory {
  std::vector<double> times;
  std::vector<Point3> positions;

  void validate() const;
  Point3 position_at(double t) const;  // clamped to the end points
  static Trajectory stationary(const Point3& p);
};

struct MovingSourceOptions {
  double hop_s = 0.1;
  int max_order = -1;
  double location_grid_s = 0.1;
};

struct GroundTruth {
  // Per microphone, per sample: direct-path delay (samples) and gain.
  std::vector<std::vector<double>> tau;
  std::vector<std::vector<double>> gain;
  // Direct-path component of every microphone signal.
  MultiChannelSignal direct_path;
  // Source location relative to the microphone centroid on the location grid.
  LocationTrack location;
};

// Direct-path delay and gain tracks of one microphone, exactly as the
// simulator uses them: tau = d / c * rate, gain = 1 / (4 pi d).
void direct_path_tracks(const Trajectory& traj, const Point3& mic, double speed_of_sound,
                        double rate, std::size_t length, std::vector<double>& tau,
                        std::vector<double>& gain);

LocationTrack location_track(const Trajectory& traj, const std::vector<Point3>& mics,
                             double duration_s, double grid_s);

struct SimulationOutput {
  MultiChannelSignal signal;
  GroundTruth truth;
};

// Direct path rendered as a continuous variable delay; reflections rendered
// per trajectory location (every hop_s) with trapezium crossfades of width
// hop_s / 2 that sum to one.
SimulationOutput simulate_moving_source(const MonoSignal& source, const Trajectory& traj,
                                        const ShoeboxRoom& room, const std::vector<Point3>& mics,
                                        const MovingSourceOptions& options = {});

double sinc_coherence_model(double d, double f, double c = 343.0);

struct DiffuseNoiseOptions {
  double speed_of_sound = 343.0;
  std::size_t frame_length = 1024;
};

// Independent disjoint segments of `source_noise` mixed per STFT bin through a
// factor of the spherical-field coherence matrix sinc(2 pi f d_ij / c).
MultiChannelSignal generate_diffuse_noise(const MonoSignal& source_noise,
                                          const std::vector<Point3>& mics, double duration_s,
                                          const DiffuseNoiseOptions& options = {});

struct CoherenceProfile {
  std::vector<double> frequencies;
  std::vector<std::complex<double>> measured;
  std::vector<double> model;  // empty unless a spacing was given
  double start_s = 0.0;       // analysed span
  double end_s = 0.0;
};

struct CoherenceOptions {
  std::size_t frame_length = 1024;
  std::size_t hop = 512;
  std::optional<double> spacing_m;
  double speed_of_sound = 343.0;
};

// Welch estimate Phi_ij / sqrt(Phi_ii Phi_jj) over the whole signal.
CoherenceProfile estimate_spatial_coherence(const MultiChannelSignal& noise, std::size_t i,
                                            std::size_t j, const CoherenceOptions& options = {});

// The same estimate over consecutive windows of window_s seconds.
std::vector<CoherenceProfile> estimate_spatial_coherence_windows(
    const MultiChannelSignal& noise, std::size_t i, std::size_t j, double window_s = 1.0,
    const CoherenceOptions& options = {});

// ---------------------------------------------------------------------------
// Scene description shared by the command-line tool and the C API.

struct SceneNoise {
  std::string kind = "none";  // none | white | diffuse
  double snr_db = 20.0;
  std::uint64_t seed = 1;
};

struct SceneSpec {
  double rate_hz = 48000.0;
  ShoeboxRoom room;
  std::vector<Point3> mics;
  Trajectory trajectory;
  double duration_s = 0.0;
  std::string source_kind = "speech_like";  // speech_like | wav
  std::string source_path;
  std::uint64_t source_seed = 1;
  double hop_s = 0.1;
  int max_order = -1;
  SceneNoise noise;
};

// Parses the JSON scene format; relative paths resolve against base_dir.
SceneSpec parse_scene(const std::string& json_text, const std::string& base_dir = "");

struct SceneResult {
  MonoSignal source;
  SimulationOutput sim;    // sim.signal includes the noise
  MultiChannelSignal noise;
};

SceneResult run_scene(const SceneSpec& spec);

}  // namespace arraykit
