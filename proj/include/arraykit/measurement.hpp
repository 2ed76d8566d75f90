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
#include <vector>

#include "arraykit/signal.hpp"

namespace arraykit {

// Exponential sine sweep excitation. The emitted signal is `repetitions`
// copies of the sweep, each followed by `gap_s` of silence.
struct SweepSpec {
  double f1_hz = 200.0;
  double f2_hz = 8000.0;
  double duration_s = 2.0;
  double rate_hz = 48000.0;
  int repetitions = 1;
  double gap_s = 1.0;
  double fade_in_s = 0.05;
  double fade_out_s = 0.01;
  // Width of the raised-cosine band edges (in octaves, inside [f1, f2]) applied
  // by the inverse filter. Smooth edges keep the deconvolved impulse compact.
  double band_taper_octaves = 0.5;

  void validate() const;
  std::size_t sweep_length() const;
  std::size_t period_length() const;
};

struct SweepPair {
  MonoSignal sweep;           // all repetitions
  MonoSignal inverse_filter;  // inverse of a single sweep, odd length
  std::size_t period = 0;     // samples between repetition onsets
};

SweepPair generate_ess(const SweepSpec& spec);

// Index of the zero-lag tap of an inverse filter from generate_ess.
std::size_t inverse_reference_lag(const MonoSignal& inverse_filter);

struct RirOptions {
  double length_s = 1.0;
  double pre_ms = 5.0;  // samples kept ahead of the peak
};

// Deconvolves the recording and returns the response peak-aligned so that the
// strongest tap sits `pre_ms` into the output.
ImpulseResponse estimate_rir(const MonoSignal& recorded, const MonoSignal& inverse_filter,
                             const RirOptions& options = {});

// One response per repetition period of a repeated-sweep recording.
std::vector<ImpulseResponse> estimate_rir_trials(const MonoSignal& recorded,
                                                 const MonoSignal& inverse_filter,
                                                 std::size_t period, int repetitions,
                                                 const RirOptions& options = {});

struct DecayCurve {
  std::vector<double> time_s;
  std::vector<double> level_db;  // 0 dB at t = 0, non-increasing
};

// Backward-integrated energy decay. Levels below floor_db are clamped.
DecayCurve schroeder_edc(const ImpulseResponse& rir, double floor_db = -300.0);

struct FitRange {
  double hi_db = -5.0;
  double lo_db = -25.0;
};

struct T60Estimate {
  double t60_s = 0.0;
  double t20_s = 0.0;
  double slope_db_per_s = 0.0;
  double intercept_db = 0.0;
  FitRange fit_range;
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;  // exclusive
};

// Least-squares line over the selected decay segment; T20 is the time the
// fitted line takes to fall 20 dB and T60 = 3 * T20.
T60Estimate estimate_t60(const DecayCurve& edc, const FitRange& range = {});

struct TrialSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single trial
  std::size_t count = 0;
};

TrialSummary aggregate_trials(const std::vector<double>& values);

struct DeviceIrOptions {
  double window_ms = 5.0;
  double fade_ms = 0.5;
  double gap_factor = 2.0;            // clear region after the peak, in windows
  double reflection_threshold = 0.25; // relative to the peak magnitude
};

struct DeviceIR {
  ImpulseResponse taps;
  std::size_t window_start = 0;
  std::size_t window_length = 0;
  std::size_t peak_index = 0;  // in the source response
};

// Cuts a faded window centred on the dominant peak. Throws NoDistinctPath when
// another tap reaches reflection_threshold of the peak within gap_factor
// windows of it.
DeviceIR extract_device_ir(const ImpulseResponse& rir, const DeviceIrOptions& options = {});

}  // namespace arraykit
