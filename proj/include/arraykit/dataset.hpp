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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arraykit/signal.hpp"
#include "arraykit/simulator.hpp"

namespace arraykit {

// ---------------------------------------------------------------------------
// Array geometry

struct ArrayGeometry {
  std::vector<Point3> positions;  // metres, indexed by channel
};

// JSON: {"positions": [[x, y, z], ...]} or
//       {"channels": [{"index": i, "position": [x, y, z]}, ...]}.
// Channel indices must be 0..n-1 without gaps.
ArrayGeometry parse_array_geometry(const std::string& json_text);
// Missing or malformed files raise ConfigInvalid naming the path.
ArrayGeometry load_array_geometry(const std::string& path);

// Illustrative 32-channel layout: centre mic 0, a 3 cm ring (1-8) and a 6 cm
// ring (9-16) in the horizontal plane, mics 17-27 on a 15 cm ring, and 28-31
// on the vertical axis at +-3 cm and +-6 cm.
ArrayGeometry example_geometry_32ch();

// ---------------------------------------------------------------------------
// Mixing

struct MixOptions {
  std::uint64_t seed = 0;
  std::size_t reference_channel = 0;
  // Measure speech power only over frames within `active_range_db` of the
  // loudest 20 ms frame.
  bool active_speech = false;
  double active_range_db = 40.0;
};

struct Mixture {
  MultiChannelSignal mixture;
  MultiChannelSignal scaled_noise;
  double noise_scale = 1.0;
  std::size_t noise_offset = 0;  // crop start in the noise recording
  double snr_db = 0.0;
};

// Scales a randomly cropped (seeded) stretch of noise so the reference-channel
// speech-to-noise power ratio equals snr_db. Speech is not modified.
Mixture mix_at_snr(const MultiChannelSignal& speech, const MultiChannelSignal& noise,
                   double snr_db, const MixOptions& options = {});

// 10 log10(P_speech / P_noise) on one channel over the full duration.
double measured_snr_db(std::span<const double> speech, std::span<const double> noise);

// Training SNR draws, uniform on [lo, hi].
class SnrSampler {
 public:
  explicit SnrSampler(std::uint64_t seed, double lo = -10.0, double hi = 15.0);
  double operator()();

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> dist_;
};

// ---------------------------------------------------------------------------
// Noise gating

// Returns true when the clip carries speech.
using VadHook = std::function<bool(const MonoSignal&)>;

struct VadOptions {
  double frame_s = 0.032;
  double energy_margin_db = 6.0;   // above the 10th-percentile frame energy
  double max_flatness = 0.3;       // spectral flatness in [band_lo, band_hi]
  double band_lo_hz = 100.0;
  double band_hi_hz = 4000.0;
  double min_speech_s = 0.1;
};

// Energy plus spectral-flatness heuristic.
VadHook default_vad(const VadOptions& options = {});

struct GateOptions {
  double clip_s = 10.0;
  double power_floor_db = -60.0;  // mean power of the reference channel, dB re full scale
  std::size_t reference_channel = 0;
};

struct NoiseClip {
  std::size_t start = 0;
  std::size_t length = 0;
  double power_db = 0.0;
  bool kept = false;
  std::string reason;  // empty when kept: "below_floor" or "speech"
};

// Splits the recording into whole clips and flags each; kept clips are those
// above the power floor that the VAD does not flag.
std::vector<NoiseClip> gate_noise_clips(const MultiChannelSignal& recording,
                                        const GateOptions& options = {},
                                        const VadHook& vad = {});

// ---------------------------------------------------------------------------
// Sub-array selection

enum class SubarrayPolicy { kTest, kTraining };

struct SubarrayOptions {
  std::size_t min_size = 2;
  std::size_t max_size = 8;
  std::size_t reference = 0;
  double tolerance_m = 0.001;
  int max_attempts = 10000;
  std::vector<std::size_t> test_array{11, 3, 0, 7, 12};
};

// True for exactly five collinear channels with equal consecutive spacing.
bool is_uniform_linear_5(const ArrayGeometry& geometry, const std::vector<std::size_t>& channels,
                         double tolerance_m = 0.001);

std::vector<std::size_t> select_subarray(const ArrayGeometry& geometry, SubarrayPolicy policy,
                                         std::mt19937_64& rng, const SubarrayOptions& options = {});

// ---------------------------------------------------------------------------
// Manifests

struct Utterance {
  std::vector<std::string> paths;
  std::string speaker_id;
  std::string state;  // static | moving
};

struct SceneManifest {
  std::string scene_name;
  std::string scene_type;  // indoor | outdoor | semi-outdoor | transportation
  std::optional<double> t60_s;
  std::optional<double> spl_db;
  std::string split;  // train | val | test
  std::vector<Utterance> utterances;
  std::vector<std::string> noise_paths;
  std::vector<std::string> noise_scenes;  // scenes whose noise pairs with this speech
};

// Scene-name patterns ('*' wildcard, case-insensitive) to the noise scenes
// that may stand in for them.
using SimilarNoiseMap = std::vector<std::pair<std::string, std::vector<std::string>>>;

SimilarNoiseMap default_similar_noise_map();
SimilarNoiseMap parse_similar_noise_map(const std::string& json_text);
bool wildcard_match(const std::string& pattern, const std::string& name);

struct ManifestOptions {
  SimilarNoiseMap similar = default_similar_noise_map();
};

// Scans root/<split>/<scene>/ (see README) and validates split rules.
// Throws SplitViolation listing the offending entries.
std::vector<SceneManifest> build_manifest(const std::string& root,
                                          const ManifestOptions& options = {});

// Checks speaker disjointness and val/test noise pairing.
void validate_manifests(const std::vector<SceneManifest>& manifests, const SimilarNoiseMap& similar);

std::string manifest_to_json(const SceneManifest& manifest);
// One <split>_<scene>.json per scene plus index.json.
void write_manifests(const std::string& out_dir, const std::vector<SceneManifest>& manifests);

}  // namespace arraykit
