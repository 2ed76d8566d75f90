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

/* C interface to arraykit. All functions return an ak_status; on failure
 * ak_last_error() describes the problem for the calling thread. Objects are
 * opaque handles released with their matching *_free function. Strings
 * returned through char** are released with ak_string_free. */
#ifndef ARRAYKIT_H_
#define ARRAYKIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(AK_BUILDING_LIBRARY)
#define AK_API __attribute__((visibility("default")))
#else
#define AK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ak_status {
  AK_OK = 0,
  AK_ERR_INVALID_ARGUMENT = 1,
  AK_ERR_IO = 2,
  AK_ERR_CONFIG_INVALID = 3,
  AK_ERR_DEGENERATE_SIGNAL = 10,
  AK_ERR_RATIO_OUT_OF_RANGE = 11,
  AK_ERR_RATE_MISMATCH = 12,
  AK_ERR_UNSORTED_KNOTS = 13,
  AK_ERR_TOO_FEW_KNOTS = 14,
  AK_ERR_BAD_FRAMING = 15,
  AK_ERR_BAD_SPEC = 20,
  AK_ERR_INSUFFICIENT_DECAY = 21,
  AK_ERR_NO_DISTINCT_PATH = 22,
  AK_ERR_HOOK_FAILURE = 30,
  AK_ERR_NO_SHARP_PEAK = 31,
  AK_ERR_TOO_FEW_VALID_SEGMENTS = 32,
  AK_ERR_TRACK_COVERAGE_GAP = 33,
  AK_ERR_NO_DETECTION = 40,
  AK_ERR_OUTSIDE_CALIBRATED_FIELD = 41,
  AK_ERR_GEOMETRY = 42,
  AK_ERR_POSITION_OUTSIDE_ROOM = 50,
  AK_ERR_TRAJECTORY_MISMATCH = 51,
  AK_ERR_TOO_SHORT = 52,
  AK_ERR_SHAPE_MISMATCH = 60,
  AK_ERR_NOISE_TOO_SHORT = 61,
  AK_ERR_POLICY_UNSATISFIABLE = 62,
  AK_ERR_SPLIT_VIOLATION = 63,
  AK_ERR_DEGENERATE_REFERENCE = 70,
  AK_ERR_NO_VALID_FRAMES = 71,
  AK_ERR_INTERNAL = 99
} ak_status;

AK_API const char* ak_status_name(ak_status status);
AK_API const char* ak_last_error(void);
AK_API const char* ak_version(void);
AK_API void ak_string_free(char* s);

/* ---- Signals (multichannel; mono is one channel) ---------------------- */

typedef struct ak_signal ak_signal;

/* data is channel-major: channel c occupies data[c * frames, (c + 1) * frames). */
AK_API ak_status ak_signal_create(const double* data, size_t channels, size_t frames, double rate,
                                  ak_signal** out);
AK_API ak_status ak_signal_read_wav(const char* path, ak_signal** out);
/* format: "pcm16", "pcm24" or "float32". */
AK_API ak_status ak_signal_write_wav(const ak_signal* s, const char* path, const char* format);
AK_API ak_status ak_signal_select(const ak_signal* s, const size_t* channels, size_t count,
                                  ak_signal** out);
AK_API size_t ak_signal_channels(const ak_signal* s);
AK_API size_t ak_signal_frames(const ak_signal* s);
AK_API double ak_signal_rate(const ak_signal* s);
AK_API const double* ak_signal_data(const ak_signal* s, size_t channel);
AK_API void ak_signal_free(ak_signal* s);

/* ---- Signal core ------------------------------------------------------- */

typedef struct ak_gcc_result {
  long peak_lag;
  double peak_value;
  double peak_sharpness;
  double refined_lag;
} ak_gcc_result;

/* Channel 0 of each input; positive lag means b is delayed. */
AK_API ak_status ak_gcc(const ak_signal* a, const ak_signal* b, int phat, long max_lag,
                        ak_gcc_result* out);
AK_API ak_status ak_fractional_resample(const ak_signal* x, double ratio, ak_signal** out);
AK_API ak_status ak_resample_to_rate(const ak_signal* x, double rate, ak_signal** out);
/* Every channel of x convolved with channel 0 of h. */
AK_API ak_status ak_convolve(const ak_signal* x, const ak_signal* h, ak_signal** out);

/* ---- Acoustic measurement --------------------------------------------- */

/* spec_json keys (all optional): f1_hz, f2_hz, duration_s, rate_hz,
 * repetitions, gap_s, fade_in_s, fade_out_s, band_taper_octaves. */
AK_API ak_status ak_ess_generate(const char* spec_json, ak_signal** sweep, ak_signal** inverse,
                                 size_t* period);
/* options_json keys: length_s, pre_ms, repetitions, period, fit_hi_db,
 * fit_lo_db. Returns the first trial's RIR and a JSON report with
 * t60_s, t20_s, t60_std_s, fit_range_db and per-trial values. */
AK_API ak_status ak_measure_rir(const ak_signal* recorded, const ak_signal* inverse,
                                const char* options_json, ak_signal** rir, char** report_json);
AK_API ak_status ak_extract_device_ir(const ak_signal* rir, double window_ms, ak_signal** taps,
                                      size_t* window_start, size_t* peak_index);

/* ---- Direct-path annotation ------------------------------------------- */

/* Enhancement hook: returns 0 and a mono signal at the GCC rate on success. */
typedef int (*ak_enhance_fn)(const ak_signal* recording, void* user, ak_signal** out);

typedef struct ak_annotation ak_annotation;

typedef struct ak_annotate_request {
  const ak_signal* recording;
  const ak_signal* source;
  const ak_signal* device_ir; /* NULL: unit impulse */
  const char* config_json;    /* NULL or AnnotatorConfig keys */
  int moving;
  size_t reference_channel;
  const ak_signal* oracle; /* NULL, or a direct-path signal used as the hook */
  ak_enhance_fn hook;      /* used when oracle is NULL */
  void* hook_user;
} ak_annotate_request;

AK_API ak_status ak_annotate_direct_path(const ak_annotate_request* request, ak_annotation** out);
AK_API const ak_signal* ak_annotation_direct_path(const ak_annotation* a);
AK_API size_t ak_annotation_segments(const ak_annotation* a);
AK_API ak_status ak_annotation_segment(const ak_annotation* a, size_t k, double* time_s,
                                       double* tau, double* gain, int* valid);
/* peak_sharpness per segment, cleansed_count, interpolated_count, model. */
AK_API ak_status ak_annotation_diagnostics_json(const ak_annotation* a, char** out);
AK_API void ak_annotation_free(ak_annotation* a);

/* ---- Fisheye localization --------------------------------------------- */

typedef struct ak_location_frame {
  double t_s;
  double azimuth_deg;
  double elevation_deg;
  double distance_m;
  int valid;
} ak_location_frame;

typedef struct ak_detection {
  double u;
  double v;
  double score;
  double frame_time;
} ak_detection;

/* color: "red" or "green". */
AK_API ak_status ak_detect_led(const char* image_path, const char* color, double frame_time,
                               ak_detection* out);
/* camera_json: u0, v0, pixels_per_radian | calibration {radius_px, theta_deg},
 * height_m, yaw_offset_deg, max_theta_deg. options_json: source_center_height_m,
 * array_height_m, led_offset_m, grid_s, max_assign_gap_s, duration_s. */
AK_API ak_status ak_annotate_location(const char* camera_json, const char* options_json,
                                      const ak_detection* detections, size_t count,
                                      ak_location_frame** frames, size_t* frame_count);
AK_API void ak_location_frames_free(ak_location_frame* frames);
/* Copies the image to a PNG with a box drawn around (u, v). */
AK_API ak_status ak_write_overlay(const char* image_path, double u, double v, const char* png_path);

/* ---- Scene simulation --------------------------------------------------- */

typedef struct ak_scene ak_scene;

/* Scene JSON; relative paths resolve against base_dir (may be NULL).
 * seed_override < 0 keeps the seeds in the JSON. */
AK_API ak_status ak_simulate_scene(const char* scene_json, const char* base_dir,
                                   int64_t seed_override, ak_scene** out);
AK_API const ak_signal* ak_scene_mixture(const ak_scene* s);
AK_API const ak_signal* ak_scene_source(const ak_scene* s);
AK_API const ak_signal* ak_scene_direct_path(const ak_scene* s);
AK_API const ak_signal* ak_scene_noise(const ak_scene* s);
/* Per-sample direct-path delay and gain of one microphone. */
AK_API ak_status ak_scene_truth(const ak_scene* s, size_t mic, const double** tau,
                                const double** gain, size_t* length);
AK_API ak_status ak_scene_location(const ak_scene* s, ak_location_frame** frames, size_t* count);
AK_API void ak_scene_free(ak_scene* s);

/* CSV with columns frequency_hz, coherence_re, coherence_im, magnitude,
 * model (when spacing_m > 0), plus window_start_s when window_s > 0. */
AK_API ak_status ak_coherence_csv(const ak_signal* noise, size_t i, size_t j, double spacing_m,
                                  double window_s, char** csv);
/* mic_xyz holds mics * 3 coordinates. */
AK_API ak_status ak_diffuse_noise(const ak_signal* source_noise, const double* mic_xyz, size_t mics,
                                  double duration_s, ak_signal** out);

/* ---- Dataset assembly --------------------------------------------------- */

typedef struct ak_mix_result {
  double snr_db;
  double measured_snr_db;
  double noise_scale;
  size_t noise_offset;
} ak_mix_result;

AK_API ak_status ak_mix(const ak_signal* speech, const ak_signal* noise, double snr_db,
                        uint64_t seed, int active_speech, ak_signal** mixture, ak_mix_result* info);
/* Draw `count` training SNRs uniform in [-10, 15] dB. */
AK_API ak_status ak_draw_snr(uint64_t seed, size_t count, double* out);
AK_API ak_status ak_load_geometry(const char* path, double** xyz, size_t* channels);
AK_API void ak_doubles_free(double* p);
/* policy: 0 training, 1 test. Writes up to capacity indices. */
AK_API ak_status ak_select_subarray(const double* xyz, size_t channels, int policy, uint64_t seed,
                                    size_t* out, size_t capacity, size_t* count);
/* Gating report JSON: one entry per clip with start_s, length_s, power_db, kept, reason. */
AK_API ak_status ak_gate_noise(const ak_signal* recording, double clip_s, double power_floor_db,
                               char** report_json);
/* Writes manifests under out_dir (NULL: validate only) and returns index JSON. */
AK_API ak_status ak_build_manifest(const char* root, const char* similar_map_path,
                                   const char* out_dir, char** index_json);

/* ---- Metrics ------------------------------------------------------------ */

AK_API ak_status ak_si_sdr(const ak_signal* estimate, const ak_signal* reference, double* out);
AK_API ak_status ak_loc_metrics(const double* times, const double* est_az, const int* est_valid,
                                const double* true_az, const int* true_valid, size_t frames,
                                double threshold_deg, double* mae_deg, double* acc_pct,
                                size_t* used_frames);

#ifdef __cplusplus
}
#endif

#endif  // ARRAYKIT_H_
