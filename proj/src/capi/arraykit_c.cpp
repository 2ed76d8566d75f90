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

#include "arraykit/arraykit.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <new>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arraykit/annotator.hpp"
#include "arraykit/dataset.hpp"
#include "arraykit/fisheye.hpp"
#include "arraykit/measurement.hpp"
#include "arraykit/metrics.hpp"
#include "arraykit/simulator.hpp"
#include "arraykit/wav.hpp"

struct ak_signal {
  arraykit::MultiChannelSignal sig;
};

struct ak_annotation {
  arraykit::AnnotationResult result;
  ak_signal direct_path;
};

struct ak_scene {
  arraykit::SceneResult result;
  ak_signal mixture;
  ak_signal source;
  ak_signal direct_path;
  ak_signal noise;
};

namespace {

using arraykit::ErrorCode;
using arraykit::fail;
using nlohmann::json;

thread_local std::string g_last_error;

template <class F>
ak_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return AK_OK;
  } catch (const arraykit::Error& e) {
    g_last_error = e.what();
    return static_cast<ak_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return AK_ERR_CONFIG_INVALID;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return AK_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ak_signal* wrap(arraykit::MultiChannelSignal s) { return new ak_signal{std::move(s)}; }
ak_signal* wrap(const arraykit::MonoSignal& s) { return new ak_signal{arraykit::MultiChannelSignal(s)}; }

const arraykit::MultiChannelSignal& sig(const ak_signal* s, const char* what) {
  need(s, what);
  return s->sig;
}

arraykit::MonoSignal mono(const ak_signal* s, const char* what) {
  const auto& m = sig(s, what);
  if (m.num_channels() == 0) fail(ErrorCode::kInvalidArgument, std::string(what) + " has no channels");
  return m.channel(0);
}

json parse_json(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  try {
    json j = json::parse(text);
    if (!j.is_object()) fail(ErrorCode::kConfigInvalid, std::string(what) + " must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfigInvalid, std::string(what) + ": " + e.what());
  }
}

template <class T>
void read_key(const json& j, const char* what, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigInvalid, std::string(what) + "." + key + ": " + e.what());
  }
}

arraykit::AnnotatorConfig annotator_config(const char* text) {
  const json j = parse_json(text, "annotator");
  arraykit::AnnotatorConfig c;
  const char* w = "annotator";
  read_key(j, w, "gcc_rate_hz", c.gcc_rate_hz);
  read_key(j, w, "speed_of_sound", c.speed_of_sound);
  read_key(j, w, "max_distance_m", c.max_distance_m);
  read_key(j, w, "device_latency_s", c.device_latency_s);
  read_key(j, w, "sharpness_threshold", c.sharpness_threshold);
  read_key(j, w, "refine_radius", c.refine_radius);
  read_key(j, w, "segment_s", c.segment_s);
  read_key(j, w, "hop_s", c.hop_s);
  read_key(j, w, "median_window", c.median_window);
  read_key(j, w, "max_speed_mps", c.max_speed_mps);
  read_key(j, w, "min_gain", c.min_gain);
  read_key(j, w, "max_gain", c.max_gain);
  read_key(j, w, "max_invalid_fraction", c.max_invalid_fraction);
  read_key(j, w, "refine_passes", c.refine_passes);
  read_key(j, w, "doppler_search_mps", c.doppler_search_mps);
  read_key(j, w, "track_step_s", c.track_step_s);
  read_key(j, w, "track_damping", c.track_damping);
  read_key(j, w, "gain_smoothing", c.gain_smoothing);
  for (const auto& [key, value] : j.items()) {
    static const char* known[] = {"gcc_rate_hz", "speed_of_sound", "max_distance_m",
                                  "device_latency_s", "sharpness_threshold", "refine_radius",
                                  "segment_s", "hop_s", "median_window", "max_speed_mps",
                                  "min_gain", "max_gain", "max_invalid_fraction", "refine_passes",
                                  "doppler_search_mps", "track_step_s", "track_damping",
                                  "gain_smoothing"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(ErrorCode::kConfigInvalid, "annotator." + key + ": unknown key");
  }
  if (!(c.gcc_rate_hz > 0) || !(c.segment_s > 0) || !(c.hop_s > 0) || c.median_window < 1 ||
      !(c.doppler_search_mps >= 0) || !(c.track_step_s > 0) || !(c.track_damping >= 0) ||
      !(c.gain_smoothing >= 0))
    fail(ErrorCode::kConfigInvalid, "annotator: rates, segment_s and hop_s must be positive and doppler_search_mps non-negative");
  return c;
}

arraykit::CameraModel camera_model(const char* text) {
  const json j = parse_json(text, "camera");
  arraykit::CameraModel cam;
  const char* w = "camera";
  read_key(j, w, "u0", cam.u0);
  read_key(j, w, "v0", cam.v0);
  read_key(j, w, "pixels_per_radian", cam.pixels_per_radian);
  read_key(j, w, "height_m", cam.height_m);
  read_key(j, w, "yaw_offset_deg", cam.yaw_offset_deg);
  read_key(j, w, "max_theta_deg", cam.max_theta_deg);
  if (j.contains("calibration")) {
    const json& cal = j.at("calibration");
    read_key(cal, "camera.calibration", "radius_px", cam.table_radius_px);
    read_key(cal, "camera.calibration", "theta_deg", cam.table_theta_deg);
  }
  try {
    cam.validate();
  } catch (const arraykit::Error& e) {
    fail(ErrorCode::kConfigInvalid, std::string("camera: ") + e.what());
  }
  return cam;
}

arraykit::LocationConfig location_config(const char* text) {
  const json j = parse_json(text, "location");
  arraykit::LocationConfig c;
  const char* w = "location";
  read_key(j, w, "source_center_height_m", c.source_center_height_m);
  read_key(j, w, "array_height_m", c.array_height_m);
  read_key(j, w, "led_offset_m", c.led_offset_m);
  read_key(j, w, "min_source_height_m", c.min_source_height_m);
  read_key(j, w, "max_source_height_m", c.max_source_height_m);
  read_key(j, w, "grid_s", c.grid_s);
  read_key(j, w, "max_assign_gap_s", c.max_assign_gap_s);
  if (j.contains("led_height_m")) {
    double led = 0.0;
    read_key(j, w, "led_height_m", led);
    c.source_center_height_m = arraykit::source_center_from_led_height(led, c.led_offset_m);
  }
  if (j.contains("duration_s")) {
    double d = 0.0;
    read_key(j, w, "duration_s", d);
    c.duration_s = d;
  }
  return c;
}

ak_location_frame to_c(const arraykit::LocationFrame& f) {
  return {f.t_s, f.azimuth_deg, f.elevation_deg, f.distance_m, f.valid ? 1 : 0};
}

void copy_frames(const arraykit::LocationTrack& track, ak_location_frame** frames, size_t* count) {
  auto* out = static_cast<ak_location_frame*>(
      std::malloc(sizeof(ak_location_frame) * (track.empty() ? 1 : track.size())));
  if (out == nullptr) throw std::bad_alloc();
  for (std::size_t i = 0; i < track.size(); ++i) out[i] = to_c(track[i]);
  *frames = out;
  *count = track.size();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

extern "C" {

const char* ak_status_name(ak_status status) {
  if (status == AK_ERR_INTERNAL) return "Internal";
  return arraykit::error_code_name(static_cast<ErrorCode>(status));
}

const char* ak_last_error(void) { return g_last_error.c_str(); }

const char* ak_version(void) { return "0.1.0"; }

void ak_string_free(char* s) { std::free(s); }

ak_status ak_signal_create(const double* data, size_t channels, size_t frames, double rate,
                           ak_signal** out) {
  return guard([&] {
    need(out, "out");
    if (frames > 0) need(data, "data");
    if (channels == 0) fail(ErrorCode::kInvalidArgument, "signal needs at least one channel");
    std::vector<std::vector<double>> ch(channels);
    for (std::size_t c = 0; c < channels; ++c) ch[c].assign(data + c * frames, data + (c + 1) * frames);
    *out = wrap(arraykit::MultiChannelSignal(std::move(ch), rate));
  });
}

ak_status ak_signal_read_wav(const char* path, ak_signal** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(arraykit::read_wav(path));
  });
}

ak_status ak_signal_write_wav(const ak_signal* s, const char* path, const char* format) {
  return guard([&] {
    need(path, "path");
    arraykit::write_wav(path, sig(s, "signal"),
                        arraykit::parse_sample_format(format ? format : "float32"));
  });
}

ak_status ak_signal_select(const ak_signal* s, const size_t* channels, size_t count,
                           ak_signal** out) {
  return guard([&] {
    const auto& m = sig(s, "signal");
    need(channels, "channels");
    need(out, "out");
    std::vector<std::vector<double>> ch;
    for (std::size_t k = 0; k < count; ++k) {
      if (channels[k] >= m.num_channels())
        fail(ErrorCode::kInvalidArgument, "channel " + std::to_string(channels[k]) + " out of range");
      ch.push_back(m.channels()[channels[k]]);
    }
    *out = wrap(arraykit::MultiChannelSignal(std::move(ch), m.rate()));
  });
}

size_t ak_signal_channels(const ak_signal* s) { return s ? s->sig.num_channels() : 0; }
size_t ak_signal_frames(const ak_signal* s) { return s ? s->sig.length() : 0; }
double ak_signal_rate(const ak_signal* s) { return s ? s->sig.rate() : 0.0; }

const double* ak_signal_data(const ak_signal* s, size_t channel) {
  if (s == nullptr || channel >= s->sig.num_channels()) return nullptr;
  return s->sig.channels()[channel].data();
}

void ak_signal_free(ak_signal* s) { delete s; }

ak_status ak_gcc(const ak_signal* a, const ak_signal* b, int phat, long max_lag, ak_gcc_result* out) {
  return guard([&] {
    need(out, "out");
    const auto r = arraykit::gcc(mono(a, "a"), mono(b, "b"),
                                 phat ? arraykit::GccWeighting::kPhat : arraykit::GccWeighting::kNone,
                                 max_lag);
    *out = {r.peak_lag, r.peak_value, r.peak_sharpness, r.refined_lag};
  });
}

ak_status ak_fractional_resample(const ak_signal* x, double ratio, ak_signal** out) {
  return guard([&] {
    need(out, "out");
    const auto& m = sig(x, "x");
    std::vector<arraykit::MonoSignal> ch;
    for (std::size_t c = 0; c < m.num_channels(); ++c)
      ch.push_back(arraykit::fractional_resample(m.channel(c), ratio));
    *out = wrap(arraykit::MultiChannelSignal::from_mono(std::move(ch)));
  });
}

ak_status ak_resample_to_rate(const ak_signal* x, double rate, ak_signal** out) {
  return guard([&] {
    need(out, "out");
    const auto& m = sig(x, "x");
    std::vector<arraykit::MonoSignal> ch;
    for (std::size_t c = 0; c < m.num_channels(); ++c)
      ch.push_back(arraykit::resample_to_rate(m.channel(c), rate));
    *out = wrap(arraykit::MultiChannelSignal::from_mono(std::move(ch)));
  });
}

ak_status ak_convolve(const ak_signal* x, const ak_signal* h, ak_signal** out) {
  return guard([&] {
    need(out, "out");
    const auto& m = sig(x, "x");
    const auto taps = mono(h, "h");
    std::vector<arraykit::MonoSignal> ch;
    for (std::size_t c = 0; c < m.num_channels(); ++c)
      ch.push_back(arraykit::convolve(m.channel(c), taps));
    *out = wrap(arraykit::MultiChannelSignal::from_mono(std::move(ch)));
  });
}

ak_status ak_ess_generate(const char* spec_json, ak_signal** sweep, ak_signal** inverse,
                          size_t* period) {
  return guard([&] {
    need(sweep, "sweep");
    need(inverse, "inverse");
    const json j = parse_json(spec_json, "sweep");
    arraykit::SweepSpec spec;
    const char* w = "sweep";
    read_key(j, w, "f1_hz", spec.f1_hz);
    read_key(j, w, "f2_hz", spec.f2_hz);
    read_key(j, w, "duration_s", spec.duration_s);
    read_key(j, w, "rate_hz", spec.rate_hz);
    read_key(j, w, "repetitions", spec.repetitions);
    read_key(j, w, "gap_s", spec.gap_s);
    read_key(j, w, "fade_in_s", spec.fade_in_s);
    read_key(j, w, "fade_out_s", spec.fade_out_s);
    read_key(j, w, "band_taper_octaves", spec.band_taper_octaves);
    auto pair = arraykit::generate_ess(spec);
    *sweep = wrap(pair.sweep);
    *inverse = wrap(pair.inverse_filter);
    if (period) *period = pair.period;
  });
}

ak_status ak_measure_rir(const ak_signal* recorded, const ak_signal* inverse,
                         const char* options_json, ak_signal** rir, char** report_json) {
  return guard([&] {
    need(rir, "rir");
    need(report_json, "report_json");
    const json j = parse_json(options_json, "measure");
    arraykit::RirOptions ro;
    arraykit::FitRange fit;
    int repetitions = 1;
    std::size_t period = 0;
    const char* w = "measure";
    read_key(j, w, "length_s", ro.length_s);
    read_key(j, w, "pre_ms", ro.pre_ms);
    read_key(j, w, "repetitions", repetitions);
    read_key(j, w, "period", period);
    read_key(j, w, "fit_hi_db", fit.hi_db);
    read_key(j, w, "fit_lo_db", fit.lo_db);
    const auto rec = mono(recorded, "recorded");
    const auto inv = mono(inverse, "inverse");
    std::vector<arraykit::ImpulseResponse> trials;
    if (repetitions > 1) {
      if (period == 0) fail(ErrorCode::kConfigInvalid, "measure.period: required with repetitions > 1");
      trials = arraykit::estimate_rir_trials(rec, inv, period, repetitions, ro);
    } else {
      trials.push_back(arraykit::estimate_rir(rec, inv, ro));
    }
    std::vector<double> t60s, t20s;
    json per_trial = json::array();
    for (const auto& t : trials) {
      const auto est = arraykit::estimate_t60(arraykit::schroeder_edc(t), fit);
      t60s.push_back(est.t60_s);
      t20s.push_back(est.t20_s);
      per_trial.push_back({{"t60_s", est.t60_s}, {"t20_s", est.t20_s},
                           {"slope_db_per_s", est.slope_db_per_s}});
    }
    const auto s60 = arraykit::aggregate_trials(t60s);
    const auto s20 = arraykit::aggregate_trials(t20s);
    json report = {{"t60_s", s60.mean},
                   {"t60_std_s", s60.stddev},
                   {"t20_s", s20.mean},
                   {"trials", s60.count},
                   {"fit_range_db", {fit.hi_db, fit.lo_db}},
                   {"per_trial", per_trial}};
    *rir = wrap(trials.front());
    *report_json = dup_string(report.dump(2));
  });
}

ak_status ak_extract_device_ir(const ak_signal* rir, double window_ms, ak_signal** taps,
                               size_t* window_start, size_t* peak_index) {
  return guard([&] {
    need(taps, "taps");
    arraykit::DeviceIrOptions opt;
    if (window_ms > 0) opt.window_ms = window_ms;
    const auto dev = arraykit::extract_device_ir(mono(rir, "rir"), opt);
    *taps = wrap(dev.taps);
    if (window_start) *window_start = dev.window_start;
    if (peak_index) *peak_index = dev.peak_index;
  });
}

ak_status ak_annotate_direct_path(const ak_annotate_request* request, ak_annotation** out) {
  return guard([&] {
    need(request, "request");
    need(out, "out");
    const auto& rec = sig(request->recording, "recording");
    const auto src = mono(request->source, "source");
    const auto cfg = annotator_config(request->config_json);
    if (request->reference_channel >= rec.num_channels())
      fail(ErrorCode::kInvalidArgument, "reference channel out of range");

    arraykit::DeviceIR dev;
    if (request->device_ir) {
      dev.taps = mono(request->device_ir, "device_ir");
    } else {
      dev.taps = arraykit::MonoSignal({1.0}, rec.rate());
    }
    dev.window_length = dev.taps.size();

    arraykit::EnhanceHook hook;
    if (request->oracle) {
      hook = arraykit::oracle_hook(mono(request->oracle, "oracle"), cfg.gcc_rate_hz);
    } else if (request->hook) {
      ak_enhance_fn fn = request->hook;
      void* user = request->hook_user;
      hook = [fn, user](const arraykit::MultiChannelSignal& r) {
        ak_signal in{r};
        ak_signal* result = nullptr;
        const int rc = fn(&in, user, &result);
        if (rc != 0 || result == nullptr) {
          delete result;
          fail(ErrorCode::kHookFailure, "enhancement callback returned " + std::to_string(rc));
        }
        arraykit::MonoSignal m = result->sig.num_channels() ? result->sig.channel(0) : arraykit::MonoSignal();
        delete result;
        return m;
      };
    } else {
      hook = arraykit::reference_channel_hook(request->reference_channel, cfg.gcc_rate_hz);
    }

    auto* a = new ak_annotation;
    try {
      a->result = request->moving ? arraykit::annotate_moving(rec, src, dev, cfg, hook)
                                  : arraykit::annotate_static(rec, src, dev, cfg, hook);
      a->direct_path.sig = arraykit::MultiChannelSignal(a->result.direct_path);
    } catch (...) {
      delete a;
      throw;
    }
    *out = a;
  });
}

const ak_signal* ak_annotation_direct_path(const ak_annotation* a) {
  return a ? &a->direct_path : nullptr;
}

size_t ak_annotation_segments(const ak_annotation* a) {
  return a ? a->result.track.segment_times.size() : 0;
}

ak_status ak_annotation_segment(const ak_annotation* a, size_t k, double* time_s, double* tau,
                                double* gain, int* valid) {
  return guard([&] {
    need(a, "annotation");
    const auto& t = a->result.track;
    if (k >= t.segment_times.size()) fail(ErrorCode::kInvalidArgument, "segment index out of range");
    if (time_s) *time_s = t.segment_times[k];
    if (tau) *tau = t.tau_track[k];
    if (gain) *gain = t.segment_gain[k];
    if (valid) *valid = t.valid[k] ? 1 : 0;
  });
}

ak_status ak_annotation_diagnostics_json(const ak_annotation* a, char** out) {
  return guard([&] {
    need(a, "annotation");
    need(out, "out");
    const auto& d = a->result.diagnostics;
    json j = {{"peak_sharpness", d.peak_sharpness},
              {"cleansed_count", d.cleansed_count},
              {"interpolated_count", d.interpolated_count},
              {"gain_cleansed_count", d.gain_cleansed_count},
              {"model", {{"tau", a->result.model.tau}, {"gain", a->result.model.gain}}}};
    *out = dup_string(j.dump(2));
  });
}

void ak_annotation_free(ak_annotation* a) { delete a; }

ak_status ak_detect_led(const char* image_path, const char* color, double frame_time,
                        ak_detection* out) {
  return guard([&] {
    need(image_path, "image_path");
    need(out, "out");
    const auto img = arraykit::read_image(image_path);
    const auto d = arraykit::detect_led(img, arraykit::parse_led_color(color ? color : "red"), {},
                                        frame_time);
    *out = {d.u, d.v, d.score, d.frame_time};
  });
}

ak_status ak_annotate_location(const char* camera_json, const char* options_json,
                               const ak_detection* detections, size_t count,
                               ak_location_frame** frames, size_t* frame_count) {
  return guard([&] {
    need(frames, "frames");
    need(frame_count, "frame_count");
    if (count > 0) need(detections, "detections");
    const auto cam = camera_model(camera_json);
    const auto cfg = location_config(options_json);
    std::vector<arraykit::LedDetection> det;
    for (std::size_t i = 0; i < count; ++i)
      det.push_back({detections[i].u, detections[i].v, detections[i].score, detections[i].frame_time});
    copy_frames(arraykit::annotate_location(det, cam, cfg), frames, frame_count);
  });
}

void ak_location_frames_free(ak_location_frame* frames) { std::free(frames); }

ak_status ak_write_overlay(const char* image_path, double u, double v, const char* png_path) {
  return guard([&] {
    need(image_path, "image_path");
    need(png_path, "png_path");
    auto img = arraykit::read_image(image_path);
    arraykit::draw_box(img, u, v, 12, 0, 255, 255);
    arraykit::draw_box(img, u, v, 13, 0, 0, 0);
    arraykit::write_png(png_path, img);
  });
}

ak_status ak_simulate_scene(const char* scene_json, const char* base_dir, int64_t seed_override,
                            ak_scene** out) {
  return guard([&] {
    need(scene_json, "scene_json");
    need(out, "out");
    auto spec = arraykit::parse_scene(scene_json, base_dir ? base_dir : "");
    if (seed_override >= 0) {
      spec.source_seed = static_cast<std::uint64_t>(seed_override);
      spec.noise.seed = static_cast<std::uint64_t>(seed_override) + 1;
    }
    auto* s = new ak_scene;
    try {
      s->result = arraykit::run_scene(spec);
      s->mixture.sig = s->result.sim.signal;
      s->source.sig = arraykit::MultiChannelSignal(s->result.source);
      s->direct_path.sig = s->result.sim.truth.direct_path;
      s->noise.sig = s->result.noise;
    } catch (...) {
      delete s;
      throw;
    }
    *out = s;
  });
}

const ak_signal* ak_scene_mixture(const ak_scene* s) { return s ? &s->mixture : nullptr; }
const ak_signal* ak_scene_source(const ak_scene* s) { return s ? &s->source : nullptr; }
const ak_signal* ak_scene_direct_path(const ak_scene* s) { return s ? &s->direct_path : nullptr; }
const ak_signal* ak_scene_noise(const ak_scene* s) { return s ? &s->noise : nullptr; }

ak_status ak_scene_truth(const ak_scene* s, size_t mic, const double** tau, const double** gain,
                         size_t* length) {
  return guard([&] {
    need(s, "scene");
    const auto& t = s->result.sim.truth;
    if (mic >= t.tau.size()) fail(ErrorCode::kInvalidArgument, "microphone index out of range");
    if (tau) *tau = t.tau[mic].data();
    if (gain) *gain = t.gain[mic].data();
    if (length) *length = t.tau[mic].size();
  });
}

ak_status ak_scene_location(const ak_scene* s, ak_location_frame** frames, size_t* count) {
  return guard([&] {
    need(s, "scene");
    need(frames, "frames");
    need(count, "count");
    copy_frames(s->result.sim.truth.location, frames, count);
  });
}

void ak_scene_free(ak_scene* s) { delete s; }

ak_status ak_coherence_csv(const ak_signal* noise, size_t i, size_t j, double spacing_m,
                           double window_s, char** csv) {
  return guard([&] {
    need(csv, "csv");
    const auto& m = sig(noise, "noise");
    if (i >= m.num_channels() || j >= m.num_channels())
      fail(ErrorCode::kInvalidArgument, "channel index out of range");
    arraykit::CoherenceOptions opt;
    if (spacing_m > 0) opt.spacing_m = spacing_m;
    std::vector<arraykit::CoherenceProfile> profiles;
    if (window_s > 0) {
      profiles = arraykit::estimate_spatial_coherence_windows(m, i, j, window_s, opt);
    } else {
      profiles.push_back(arraykit::estimate_spatial_coherence(m, i, j, opt));
    }
    std::string out = window_s > 0 ? "window_start_s," : "";
    out += "frequency_hz,coherence_re,coherence_im,magnitude";
    if (opt.spacing_m) out += ",model";
    out += "\n";
    for (const auto& p : profiles) {
      for (std::size_t k = 0; k < p.frequencies.size(); ++k) {
        if (window_s > 0) out += fmt(p.start_s) + ",";
        out += fmt(p.frequencies[k]) + "," + fmt(p.measured[k].real()) + "," +
               fmt(p.measured[k].imag()) + "," + fmt(std::abs(p.measured[k]));
        if (opt.spacing_m) out += "," + fmt(p.model[k]);
        out += "\n";
      }
    }
    *csv = dup_string(out);
  });
}

ak_status ak_diffuse_noise(const ak_signal* source_noise, const double* mic_xyz, size_t mics,
                           double duration_s, ak_signal** out) {
  return guard([&] {
    need(out, "out");
    need(mic_xyz, "mic_xyz");
    std::vector<arraykit::Point3> pos(mics);
    for (std::size_t m = 0; m < mics; ++m) pos[m] = {mic_xyz[3 * m], mic_xyz[3 * m + 1], mic_xyz[3 * m + 2]};
    *out = wrap(arraykit::generate_diffuse_noise(mono(source_noise, "source_noise"), pos, duration_s));
  });
}

ak_status ak_mix(const ak_signal* speech, const ak_signal* noise, double snr_db, uint64_t seed,
                 int active_speech, ak_signal** mixture, ak_mix_result* info) {
  return guard([&] {
    need(mixture, "mixture");
    arraykit::MixOptions opt;
    opt.seed = seed;
    opt.active_speech = active_speech != 0;
    const auto& sp = sig(speech, "speech");
    auto mx = arraykit::mix_at_snr(sp, sig(noise, "noise"), snr_db, opt);
    if (info) {
      info->snr_db = mx.snr_db;
      info->measured_snr_db =
          arraykit::measured_snr_db(sp.channel_view(0), mx.scaled_noise.channel_view(0));
      info->noise_scale = mx.noise_scale;
      info->noise_offset = mx.noise_offset;
    }
    *mixture = wrap(std::move(mx.mixture));
  });
}

ak_status ak_draw_snr(uint64_t seed, size_t count, double* out) {
  return guard([&] {
    if (count > 0) need(out, "out");
    arraykit::SnrSampler draw(seed);
    for (std::size_t i = 0; i < count; ++i) out[i] = draw();
  });
}

ak_status ak_load_geometry(const char* path, double** xyz, size_t* channels) {
  return guard([&] {
    need(path, "path");
    need(xyz, "xyz");
    need(channels, "channels");
    const auto g = arraykit::load_array_geometry(path);
    auto* buf = static_cast<double*>(std::malloc(sizeof(double) * 3 * (g.positions.size() + 1)));
    if (buf == nullptr) throw std::bad_alloc();
    for (std::size_t m = 0; m < g.positions.size(); ++m)
      for (int k = 0; k < 3; ++k) buf[3 * m + k] = g.positions[m][k];
    *xyz = buf;
    *channels = g.positions.size();
  });
}

void ak_doubles_free(double* p) { std::free(p); }

ak_status ak_select_subarray(const double* xyz, size_t channels, int policy, uint64_t seed,
                             size_t* out, size_t capacity, size_t* count) {
  return guard([&] {
    need(xyz, "xyz");
    need(out, "out");
    need(count, "count");
    if (policy != 0 && policy != 1) fail(ErrorCode::kInvalidArgument, "policy must be 0 or 1");
    arraykit::ArrayGeometry g;
    for (std::size_t m = 0; m < channels; ++m) g.positions.push_back({xyz[3 * m], xyz[3 * m + 1], xyz[3 * m + 2]});
    std::mt19937_64 rng(seed);
    const auto sel = arraykit::select_subarray(
        g, policy == 1 ? arraykit::SubarrayPolicy::kTest : arraykit::SubarrayPolicy::kTraining, rng);
    if (sel.size() > capacity) fail(ErrorCode::kInvalidArgument, "output capacity too small");
    for (std::size_t k = 0; k < sel.size(); ++k) out[k] = sel[k];
    *count = sel.size();
  });
}

ak_status ak_gate_noise(const ak_signal* recording, double clip_s, double power_floor_db,
                        char** report_json) {
  return guard([&] {
    need(report_json, "report_json");
    const auto& m = sig(recording, "recording");
    arraykit::GateOptions opt;
    if (clip_s > 0) opt.clip_s = clip_s;
    opt.power_floor_db = power_floor_db;
    const auto clips = arraykit::gate_noise_clips(m, opt, arraykit::default_vad());
    json j = json::array();
    for (const auto& c : clips)
      j.push_back({{"start_s", c.start / m.rate()},
                   {"length_s", c.length / m.rate()},
                   {"power_db", c.power_db},
                   {"kept", c.kept},
                   {"reason", c.reason}});
    *report_json = dup_string(j.dump(2));
  });
}

ak_status ak_build_manifest(const char* root, const char* similar_map_path, const char* out_dir,
                            char** index_json) {
  return guard([&] {
    need(root, "root");
    need(index_json, "index_json");
    arraykit::ManifestOptions opt;
    if (similar_map_path) {
      std::ifstream in(similar_map_path);
      if (!in)
        fail(ErrorCode::kConfigInvalid, std::string("similar-noise map not found: ") + similar_map_path);
      opt.similar = arraykit::parse_similar_noise_map(
          {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
    }
    const auto manifests = arraykit::build_manifest(root, opt);
    if (out_dir) arraykit::write_manifests(out_dir, manifests);
    json index = {{"train", json::array()}, {"val", json::array()}, {"test", json::array()}};
    for (const auto& m : manifests)
      index[m.split].push_back({{"scene", m.scene_name},
                                {"utterances", m.utterances.size()},
                                {"noise_scenes", m.noise_scenes}});
    *index_json = dup_string(index.dump(2));
  });
}

ak_status ak_si_sdr(const ak_signal* estimate, const ak_signal* reference, double* out) {
  return guard([&] {
    need(out, "out");
    const auto& e = sig(estimate, "estimate");
    const auto& r = sig(reference, "reference");
    if (e.num_channels() == 0 || r.num_channels() == 0)
      fail(ErrorCode::kShapeMismatch, "empty signal");
    *out = arraykit::si_sdr(e.channel_view(0), r.channel_view(0));
  });
}

ak_status ak_loc_metrics(const double* times, const double* est_az, const int* est_valid,
                         const double* true_az, const int* true_valid, size_t frames,
                         double threshold_deg, double* mae_deg, double* acc_pct,
                         size_t* used_frames) {
  return guard([&] {
    if (frames > 0) {
      need(est_az, "est_az");
      need(true_az, "true_az");
    }
    arraykit::FramewiseAzimuth e, t;
    for (std::size_t i = 0; i < frames; ++i) {
      const double ti = times ? times[i] : static_cast<double>(i);
      e.times.push_back(ti);
      t.times.push_back(ti);
      e.azimuth_deg.push_back(est_az[i]);
      t.azimuth_deg.push_back(true_az[i]);
      e.valid.push_back(est_valid ? est_valid[i] != 0 : true);
      t.valid.push_back(true_valid ? true_valid[i] != 0 : true);
    }
    const auto m = arraykit::loc_metrics(e, t, threshold_deg);
    if (mae_deg) *mae_deg = m.mae_deg;
    if (acc_pct) *acc_pct = m.acc_pct;
    if (used_frames) *used_frames = m.frames;
  });
}

}  // extern "C"
