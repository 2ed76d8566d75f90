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

#include "arraykit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include <nlohmann/json.hpp>

#include "fft.hpp"

namespace arraykit {

// ---------------------------------------------------------------------------
// Geometry

namespace {

Point3 json_point(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    fail(ErrorCode::kConfigInvalid, where + ": expected [x, y, z] in metres");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

ArrayGeometry parse_array_geometry(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigInvalid, std::string("geometry: invalid JSON: ") + e.what());
  }
  ArrayGeometry g;
  if (j.contains("positions") && j["positions"].is_array()) {
    for (std::size_t i = 0; i < j["positions"].size(); ++i)
      g.positions.push_back(json_point(j["positions"][i], "positions[" + std::to_string(i) + "]"));
  } else if (j.contains("channels") && j["channels"].is_array()) {
    const auto& ch = j["channels"];
    g.positions.resize(ch.size());
    std::vector<bool> seen(ch.size(), false);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const std::string where = "channels[" + std::to_string(i) + "]";
      if (!ch[i].contains("index") || !ch[i]["index"].is_number_unsigned() || !ch[i].contains("position"))
        fail(ErrorCode::kConfigInvalid, where + ": needs index and position");
      const auto idx = ch[i]["index"].get<std::size_t>();
      if (idx >= ch.size() || seen[idx])
        fail(ErrorCode::kConfigInvalid, where + ": indices must be 0..n-1 without repeats");
      seen[idx] = true;
      g.positions[idx] = json_point(ch[i]["position"], where + ".position");
    }
  } else {
    fail(ErrorCode::kConfigInvalid, "geometry: expected a positions or channels list");
  }
  if (g.positions.empty()) fail(ErrorCode::kConfigInvalid, "geometry: no channels");
  return g;
}

ArrayGeometry load_array_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfigInvalid, "array geometry file not found: " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_array_geometry(text);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigInvalid, path + ": " + e.what());
  }
}

ArrayGeometry example_geometry_32ch() {
  ArrayGeometry g;
  const auto polar = [](double r, double deg) -> Point3 {
    const double a = deg * std::numbers::pi / 180.0;
    return {r * std::cos(a), r * std::sin(a), 0.0};
  };
  g.positions.push_back({0.0, 0.0, 0.0});
  for (int k = 0; k < 8; ++k) g.positions.push_back(polar(0.03, 45.0 * k));
  for (double deg : {0.0, 180.0, 90.0, 270.0, 45.0, 225.0, 135.0, 315.0})
    g.positions.push_back(polar(0.06, deg));
  for (int k = 0; k < 11; ++k) g.positions.push_back(polar(0.15, 360.0 * k / 11.0 + 180.0 / 11.0));
  g.positions.push_back({0.0, 0.0, -0.03});
  g.positions.push_back({0.0, 0.0, 0.03});
  g.positions.push_back({0.0, 0.0, -0.06});
  g.positions.push_back({0.0, 0.0, 0.06});
  return g;
}

// ---------------------------------------------------------------------------
// Mixing

double measured_snr_db(std::span<const double> speech, std::span<const double> noise) {
  return 10.0 * std::log10(mean_power(speech) / mean_power(noise));
}

namespace {

// Sample ranges of 20 ms frames within range_db of the loudest frame.
std::vector<std::pair<std::size_t, std::size_t>> active_frames(std::span<const double> x,
                                                               double rate, double range_db) {
  const auto frame = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.02 * rate)));
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  std::vector<double> e;
  for (std::size_t s = 0; s < x.size(); s += frame) {
    const std::size_t len = std::min(frame, x.size() - s);
    frames.emplace_back(s, len);
    e.push_back(mean_power(x.subspan(s, len)));
  }
  const double peak = e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
  const double thresh = peak * std::pow(10.0, -range_db / 10.0);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (e[i] > 0.0 && e[i] >= thresh) out.push_back(frames[i]);
  return out;
}

double power_over(std::span<const double> x, const std::vector<std::pair<std::size_t, std::size_t>>& frames) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& [s, len] : frames) {
    for (std::size_t i = s; i < s + len; ++i) acc += x[i] * x[i];
    n += len;
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

}  // namespace

Mixture mix_at_snr(const MultiChannelSignal& speech, const MultiChannelSignal& noise,
                   double snr_db, const MixOptions& options) {
  if (speech.rate() != noise.rate() || speech.num_channels() != noise.num_channels())
    fail(ErrorCode::kShapeMismatch, "speech and noise differ in rate or channel count");
  require(options.reference_channel < speech.num_channels(), ErrorCode::kInvalidArgument,
          "reference channel out of range");
  const std::size_t n = speech.length();
  if (noise.length() < n) fail(ErrorCode::kNoiseTooShort, "noise is shorter than the speech");

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, noise.length() - n);
  const std::size_t offset = pick(rng);

  const std::size_t ref = options.reference_channel;
  const auto sref = speech.channel_view(ref);
  const auto nref = noise.channel_view(ref).subspan(offset, n);
  double ps, pn;
  if (options.active_speech) {
    const auto frames = active_frames(sref, speech.rate(), options.active_range_db);
    ps = power_over(sref, frames);
    pn = power_over(nref, frames);
  } else {
    ps = mean_power(sref);
    pn = mean_power(nref);
  }
  if (!(ps > 0.0)) fail(ErrorCode::kDegenerateSignal, "speech reference channel is silent");
  if (!(pn > 0.0)) fail(ErrorCode::kDegenerateSignal, "noise reference channel is silent");
  const double scale = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));

  std::vector<std::vector<double>> mix(speech.num_channels()), scaled(speech.num_channels());
  for (std::size_t c = 0; c < speech.num_channels(); ++c) {
    const auto s = speech.channel_view(c);
    const auto z = noise.channel_view(c).subspan(offset, n);
    scaled[c].resize(n);
    mix[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[c][i] = scale * z[i];
      mix[c][i] = s[i] + scaled[c][i];
    }
  }
  Mixture out;
  out.mixture = MultiChannelSignal(std::move(mix), speech.rate());
  out.scaled_noise = MultiChannelSignal(std::move(scaled), speech.rate());
  out.noise_scale = scale;
  out.noise_offset = offset;
  out.snr_db = snr_db;
  return out;
}

SnrSampler::SnrSampler(std::uint64_t seed, double lo, double hi) : rng_(seed), dist_(lo, hi) {
  require(hi > lo, ErrorCode::kInvalidArgument, "SNR range must be non-empty");
}

double SnrSampler::operator()() { return dist_(rng_); }

// ---------------------------------------------------------------------------
// Noise gating

VadHook default_vad(const VadOptions& options) {
  return [options](const MonoSignal& clip) {
    const double rate = clip.rate();
    const auto frame = static_cast<std::size_t>(std::llround(options.frame_s * rate));
    if (frame < 8 || clip.size() < frame) return false;
    const std::size_t hop = frame / 2;
    const std::size_t nfft = detail::next_pow2(frame);
    detail::RealFft fft(nfft);
    const auto win = hann_window(frame);
    const auto lo = static_cast<std::size_t>(std::ceil(options.band_lo_hz * nfft / rate));
    const auto hi = std::min(nfft / 2, static_cast<std::size_t>(std::floor(options.band_hi_hz * nfft / rate)));
    const auto x = clip.samples();

    std::vector<double> energy_db, flatness;
    std::vector<double> buf(frame);
    std::vector<std::complex<double>> spec;
    for (std::size_t s = 0; s + frame <= x.size(); s += hop) {
      double e = 0.0;
      for (std::size_t i = 0; i < frame; ++i) {
        buf[i] = x[s + i] * win[i];
        e += x[s + i] * x[s + i];
      }
      energy_db.push_back(10.0 * std::log10(e / static_cast<double>(frame) + 1e-30));
      fft.forward(buf, spec);
      double log_sum = 0.0, sum = 0.0;
      std::size_t count = 0;
      for (std::size_t k = lo; k <= hi; ++k) {
        const double p = std::norm(spec[k]) + 1e-30;
        log_sum += std::log(p);
        sum += p;
        ++count;
      }
      flatness.push_back(count ? std::exp(log_sum / count) / (sum / count) : 1.0);
    }
    if (energy_db.empty()) return false;
    std::vector<double> sorted = energy_db;
    const std::size_t q = sorted.size() / 10;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q), sorted.end());
    const double floor_db = sorted[q];
    std::size_t speech_frames = 0;
    for (std::size_t i = 0; i < energy_db.size(); ++i)
      if (energy_db[i] > floor_db + options.energy_margin_db && flatness[i] < options.max_flatness)
        ++speech_frames;
    return static_cast<double>(speech_frames * hop) / rate >= options.min_speech_s;
  };
}

std::vector<NoiseClip> gate_noise_clips(const MultiChannelSignal& recording,
                                        const GateOptions& options, const VadHook& vad) {
  require(options.clip_s > 0.0, ErrorCode::kInvalidArgument, "clip length must be positive");
  require(options.reference_channel < recording.num_channels(), ErrorCode::kInvalidArgument,
          "reference channel out of range");
  const VadHook hook = vad ? vad : default_vad();
  const auto len = static_cast<std::size_t>(std::llround(options.clip_s * recording.rate()));
  const std::size_t total = recording.length();
  std::vector<NoiseClip> clips;
  if (total == 0) return clips;
  const std::size_t count = total < len ? 1 : total / len;
  const auto ref = recording.channel_view(options.reference_channel);
  for (std::size_t k = 0; k < count; ++k) {
    NoiseClip c;
    c.start = k * len;
    c.length = std::min(len, total - c.start);
    const auto span = ref.subspan(c.start, c.length);
    const double p = mean_power(span);
    c.power_db = p > 0.0 ? 10.0 * std::log10(p) : -300.0;
    if (c.power_db < options.power_floor_db) {
      c.reason = "below_floor";
    } else if (hook(MonoSignal(std::vector<double>(span.begin(), span.end()), recording.rate()))) {
      c.reason = "speech";
    } else {
      c.kept = true;
    }
    clips.push_back(c);
  }
  return clips;
}

// ---------------------------------------------------------------------------
// Sub-arrays

bool is_uniform_linear_5(const ArrayGeometry& geometry, const std::vector<std::size_t>& channels,
                         double tolerance_m) {
  if (channels.size() != 5) return false;
  std::vector<Point3> p;
  for (std::size_t c : channels) {
    require(c < geometry.positions.size(), ErrorCode::kInvalidArgument, "channel out of range");
    p.push_back(geometry.positions[c]);
  }
  std::size_t ia = 0, ib = 1;
  double longest = -1.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j)
      if (distance(p[i], p[j]) > longest) {
        longest = distance(p[i], p[j]);
        ia = i;
        ib = j;
      }
  if (longest <= tolerance_m) return false;
  Point3 u;
  for (int a = 0; a < 3; ++a) u[a] = (p[ib][a] - p[ia][a]) / longest;
  std::vector<double> t;
  for (const auto& q : p) {
    double proj = 0.0;
    for (int a = 0; a < 3; ++a) proj += (q[a] - p[ia][a]) * u[a];
    Point3 foot;
    for (int a = 0; a < 3; ++a) foot[a] = p[ia][a] + proj * u[a];
    if (distance(q, foot) > tolerance_m) return false;
    t.push_back(proj);
  }
  std::sort(t.begin(), t.end());
  const double spacing = longest / 4.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - t[i - 1] - spacing) > tolerance_m) return false;
  return true;
}

std::vector<std::size_t> select_subarray(const ArrayGeometry& geometry, SubarrayPolicy policy,
                                         std::mt19937_64& rng, const SubarrayOptions& options) {
  const std::size_t n = geometry.positions.size();
  if (policy == SubarrayPolicy::kTest) {
    for (std::size_t c : options.test_array)
      if (c >= n) fail(ErrorCode::kPolicyUnsatisfiable, "geometry lacks a test-array channel");
    return options.test_array;
  }
  if (options.reference >= n || options.min_size < 1 || options.min_size > options.max_size)
    fail(ErrorCode::kPolicyUnsatisfiable, "invalid sub-array size range or reference");
  std::uniform_int_distribution<std::size_t> size_dist(options.min_size, options.max_size);
  const std::size_t size = size_dist(rng);
  if (size > n) fail(ErrorCode::kPolicyUnsatisfiable, "sub-array larger than the array");

  std::vector<std::size_t> others;
  for (std::size_t c = 0; c < n; ++c)
    if (c != options.reference) others.push_back(c);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    // Partial Fisher-Yates draw of size - 1 companions.
    for (std::size_t i = 0; i + 1 < size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
      std::swap(others[i], others[pick(rng)]);
    }
    std::vector<std::size_t> chosen(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(size - 1));
    std::sort(chosen.begin(), chosen.end());
    chosen.insert(chosen.begin(), options.reference);
    if (!is_uniform_linear_5(geometry, chosen, options.tolerance_m)) return chosen;
  }
  fail(ErrorCode::kPolicyUnsatisfiable, "no admissible sub-array found within the attempt budget");
}

}  // namespace arraykit
