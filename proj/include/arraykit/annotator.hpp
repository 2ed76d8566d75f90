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

#include <cstddef>
#include <functional>
#include <vector>

#include "arraykit/measurement.hpp"
#include "arraykit/signal.hpp"

namespace arraykit {

// Rough direct-path estimate from a multichannel recording. Hooks must return
// a mono signal at the configured GCC rate.
using EnhanceHook = std::function<MonoSignal(const MultiChannelSignal&)>;

// Reference channel downsampled to `rate`.
EnhanceHook reference_channel_hook(std::size_t channel = 0, double rate = 8000.0);
// Ignores the recording and returns `direct_path` downsampled to `rate`.
EnhanceHook oracle_hook(MonoSignal direct_path, double rate = 8000.0);

struct AnnotatorConfig {
  double gcc_rate_hz = 8000.0;
  double speed_of_sound = 343.0;
  double max_distance_m = 10.0;
  double device_latency_s = 0.05;
  double sharpness_threshold = 6.0;
  long refine_radius = 10;  // output-rate samples around the coarse peak
  // Source speed covered by the per-segment Doppler search; 0 disables it.
  double doppler_search_mps = 2.0;

  double segment_s = 1.0;
  double hop_s = 0.5;
  int median_window = 5;
  double max_speed_mps = 5.0;
  double min_gain = 0.01;
  double max_gain = 100.0;
  double max_invalid_fraction = 0.5;
  // Fine delay and gain curves: knot spacing, Gauss-Newton passes (analysis
  // band 1, 2, 4 kHz, then the GCC rate), smoothness damping of each delay
  // update and smoothness weight of the gain fit.
  double track_step_s = 0.05;
  int refine_passes = 6;
  double track_damping = 0.1;
  double gain_smoothing = 0.01;
};

// Calls the hook and checks its contract. Failures become HookFailure.
MonoSignal pre_enhance(const MultiChannelSignal& recording, const EnhanceHook& hook,
                       double expected_rate = 8000.0);

struct DirectPathModel {
  double tau = 0.0;   // samples at the recording rate
  double gain = 1.0;  // linear
};

struct DelayGainTrack {
  double rate_hz = 48000.0;
  double segment_length_s = 1.0;
  std::vector<double> segment_times;  // segment centres, seconds
  std::vector<double> tau_track;      // samples at rate_hz, per segment
  std::vector<double> segment_gain;   // per segment
  std::vector<bool> valid;            // per segment, false where cleansed
  std::vector<double> gain_track;     // per output sample, from the fine gain curve
  std::vector<double> delay_track;    // per output sample; empty: PCHIP of tau_track
};

struct AnnotationDiagnostics {
  std::vector<double> peak_sharpness;  // per segment
  std::size_t cleansed_count = 0;      // valid GCC peaks rejected as outliers
  std::size_t interpolated_count = 0;  // segments filled by interpolation
  std::size_t gain_cleansed_count = 0;
};

struct AnnotationResult {
  MonoSignal direct_path;
  DelayGainTrack track;
  AnnotationDiagnostics diagnostics;
  DirectPathModel model;  // static annotation only
};

AnnotationResult annotate_static(const MultiChannelSignal& recording, const MonoSignal& source,
                                 const DeviceIR& device_ir, const AnnotatorConfig& cfg = {},
                                 const EnhanceHook& hook = {});

struct SegmentDelays {
  std::vector<double> times;      // segment centres, seconds
  std::vector<double> tau;        // output-rate samples, at the segment centre
  std::vector<double> slope;      // delay drift, samples per sample
  std::vector<double> sharpness;
  std::vector<bool> valid;
};

// Per-segment delay of `enhanced` relative to `reference` (both at the GCC
// rate), refined and reported at `output_rate`.
SegmentDelays segment_delay_track(const MonoSignal& enhanced, const MonoSignal& reference,
                                  const AnnotatorConfig& cfg, double output_rate = 48000.0);

struct CleansedTrack {
  std::vector<double> values;
  std::vector<bool> valid;
  std::size_t outliers = 0;
};

// Rejects values farther than `max_deviation` from the running median of the
// valid neighbours and fills invalid entries by PCHIP over the valid ones.
CleansedTrack cleanse_track(const std::vector<double>& times, const std::vector<double>& values,
                            const std::vector<bool>& valid, double max_deviation,
                            int median_window = 5);

AnnotationResult annotate_moving(const MultiChannelSignal& recording, const MonoSignal& source,
                                 const DeviceIR& device_ir, const AnnotatorConfig& cfg = {},
                                 const EnhanceHook& hook = {});

// Renders gain(n) * (source * h_dev)(n - tau(n)) as a band-limited variable
// delay. tau(n) is track.delay_track when present, otherwise PCHIP through
// the segment centres extrapolated linearly to the edges. Output length is
// track.gain_track.size().
MonoSignal render_direct_path(const MonoSignal& source, const DeviceIR& device_ir,
                              const DelayGainTrack& track);

}  // namespace arraykit
