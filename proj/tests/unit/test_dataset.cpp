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

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "arraykit/dataset.hpp"
#include "arraykit/test_signals.hpp"
#include "expect.hpp"
#include "oracles.hpp"

using namespace arraykit;
namespace fs = std::filesystem;

namespace {

constexpr double kRate = 16000.0;

MultiChannelSignal noise_channels(std::size_t channels, double seconds, std::uint64_t seed) {
  std::vector<std::vector<double>> ch;
  for (std::size_t c = 0; c < channels; ++c)
    ch.push_back(oracle::gaussian(static_cast<std::size_t>(seconds * kRate), seed + c));
  return MultiChannelSignal(ch, kRate);
}

MultiChannelSignal speech_channels(std::size_t channels, double seconds, std::uint64_t seed) {
  const auto s = synthesize_speech_like(seconds, kRate, seed).release();
  std::vector<std::vector<double>> ch(channels, s);
  for (std::size_t c = 1; c < channels; ++c)
    for (double& v : ch[c]) v *= 0.8;
  return MultiChannelSignal(ch, kRate);
}

void touch(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << "x";
}

}  // namespace

TEST_CASE("mixing at 0 dB balances the reference-channel powers") {
  const auto speech = speech_channels(2, 3.0, 1);
  const auto noise = noise_channels(2, 5.0, 2);
  const auto m = mix_at_snr(speech, noise, 0.0);
  const double snr = measured_snr_db(speech.channel_view(0), m.scaled_noise.channel_view(0));
  CHECK(std::abs(snr) < 0.1);
  CHECK(m.snr_db == 0.0);
}

TEST_CASE("mixing at 15 dB measures back from the components") {
  const auto speech = speech_channels(3, 2.0, 3);
  const auto noise = noise_channels(3, 2.5, 4);
  const auto m = mix_at_snr(speech, noise, 15.0, {.seed = 9});
  CHECK(std::abs(measured_snr_db(speech.channel_view(0), m.scaled_noise.channel_view(0)) - 15.0) <= 0.01);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto mix = m.mixture.channel_view(c);
    const auto nz = m.scaled_noise.channel_view(c);
    const auto sp = speech.channel_view(c);
    for (std::size_t i = 0; i < mix.size(); i += 101) CHECK(mix[i] - nz[i] == doctest::Approx(sp[i]));
    // Every channel shares the reference-channel scale and crop.
    const auto raw = noise.channel_view(c);
    for (std::size_t i = 0; i < nz.size(); i += 997)
      CHECK(nz[i] == doctest::Approx(m.noise_scale * raw[m.noise_offset + i]));
  }
}

TEST_CASE("mixing is linear in both components") {
  const auto speech = speech_channels(2, 1.0, 5);
  const auto noise = noise_channels(2, 2.0, 6);
  const auto a = mix_at_snr(speech, noise, 5.0, {.seed = 3});
  auto scale = [](const MultiChannelSignal& x, double k) {
    auto ch = x.channels();
    for (auto& c : ch)
      for (double& v : c) v *= k;
    return MultiChannelSignal(ch, x.rate());
  };
  const auto b = mix_at_snr(scale(speech, 2.5), scale(noise, 2.5), 5.0, {.seed = 3});
  CHECK(b.noise_offset == a.noise_offset);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < a.mixture.length(); i += 53)
      CHECK(b.mixture.channel_view(c)[i] == doctest::Approx(2.5 * a.mixture.channel_view(c)[i]));
}

TEST_CASE("noise crops are seeded") {
  const auto speech = speech_channels(1, 1.0, 7);
  const auto noise = noise_channels(1, 20.0, 8);
  const auto a = mix_at_snr(speech, noise, 0.0, {.seed = 11});
  const auto b = mix_at_snr(speech, noise, 0.0, {.seed = 11});
  const auto c = mix_at_snr(speech, noise, 0.0, {.seed = 12});
  CHECK(a.noise_offset == b.noise_offset);
  CHECK(a.mixture.channels() == b.mixture.channels());
  CHECK(a.noise_offset != c.noise_offset);
  CHECK(a.noise_offset + speech.length() <= noise.length());
}

TEST_CASE("mixing input checks") {
  const auto speech = speech_channels(2, 1.0, 9);
  AK_CHECK_CODE(mix_at_snr(speech, noise_channels(3, 2.0, 1), 0.0), ErrorCode::kShapeMismatch);
  AK_CHECK_CODE(mix_at_snr(speech, noise_channels(2, 0.5, 1), 0.0), ErrorCode::kNoiseTooShort);
  const MultiChannelSignal other_rate(noise_channels(2, 2.0, 1).channels(), 48000.0);
  AK_CHECK_CODE(mix_at_snr(speech, other_rate, 0.0), ErrorCode::kShapeMismatch);
}

TEST_CASE("active-speech SNR ignores pauses") {
  // One second of tone then one of silence: active power is twice the mean.
  std::vector<double> x(static_cast<std::size_t>(2.0 * kRate), 0.0);
  for (std::size_t i = 0; i < x.size() / 2; ++i) x[i] = std::sin(2.0 * std::numbers::pi * 500.0 * i / kRate);
  const MultiChannelSignal speech({x}, kRate);
  const auto noise = noise_channels(1, 5.0, 11);
  const auto full = mix_at_snr(speech, noise, 10.0);
  const auto active = mix_at_snr(speech, noise, 10.0, {.active_speech = true});
  CHECK(std::abs(measured_snr_db(speech.channel_view(0), active.scaled_noise.channel_view(0)) -
                 (10.0 - 10.0 * std::log10(2.0))) < 0.01);
  CHECK(std::abs(measured_snr_db(speech.channel_view(0), full.scaled_noise.channel_view(0)) - 10.0) < 0.01);
}

TEST_CASE("training SNR draws are uniform on [-10, 15] dB and seeded") {
  SnrSampler a(5), b(5);
  std::vector<double> u;
  for (int i = 0; i < 5000; ++i) {
    const double x = a();
    CHECK(x == b());
    REQUIRE(x >= -10.0);
    REQUIRE(x <= 15.0);
    u.push_back(x);
  }
  const double d = oracle::ks_uniform_statistic(u, -10.0, 15.0);
  CHECK(oracle::ks_pvalue(d, u.size()) > 0.01);
}

TEST_CASE("silence is gated out") {
  const MultiChannelSignal silent({std::vector<double>(static_cast<std::size_t>(25.0 * kRate), 0.0)}, kRate);
  const auto clips = gate_noise_clips(silent);
  REQUIRE(clips.size() == 2);  // whole 10 s clips only
  for (const auto& c : clips) {
    CHECK_FALSE(c.kept);
    CHECK(c.reason == "below_floor");
  }
}

TEST_CASE("stationary fan noise is kept") {
  // Low-passed noise plus a weak blade-rate hum.
  auto x = oracle::gaussian(static_cast<std::size_t>(30.0 * kRate), 12);
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lp = 0.9 * lp + 0.1 * x[i];
    x[i] = 0.2 * lp + 0.01 * std::sin(2.0 * std::numbers::pi * 120.0 * i / kRate);
  }
  const auto clips = gate_noise_clips(MultiChannelSignal({x}, kRate));
  REQUIRE(clips.size() == 3);
  for (const auto& c : clips) CHECK(c.kept);
}

TEST_CASE("a clip with inserted speech is dropped by the default VAD") {
  auto x = oracle::gaussian(static_cast<std::size_t>(30.0 * kRate), 13);
  for (double& v : x) v *= 0.01;
  const auto s = synthesize_speech_like(3.0, kRate, 14).release();
  const std::size_t at = static_cast<std::size_t>(13.0 * kRate);
  const double k = 0.1 / oracle::rms(s);
  for (std::size_t i = 0; i < s.size(); ++i) x[at + i] += k * s[i];
  const auto clips = gate_noise_clips(MultiChannelSignal({x}, kRate));
  REQUIRE(clips.size() == 3);
  CHECK(clips[0].kept);
  CHECK_FALSE(clips[1].kept);
  CHECK(clips[1].reason == "speech");
  CHECK(clips[2].kept);
}

TEST_CASE("a custom VAD hook replaces the default") {
  const auto x = noise_channels(1, 20.0, 15);
  int calls = 0;
  VadHook always = [&calls](const MonoSignal&) {
    ++calls;
    return true;
  };
  const auto clips = gate_noise_clips(x, {}, always);
  CHECK(calls == 2);
  for (const auto& c : clips) CHECK(c.reason == "speech");
}

TEST_CASE("the fixed test array is microphones 11, 3, 0, 7, 12") {
  const auto g = example_geometry_32ch();
  std::mt19937_64 rng(1);
  CHECK(select_subarray(g, SubarrayPolicy::kTest, rng) == std::vector<std::size_t>{11, 3, 0, 7, 12});
  CHECK(is_uniform_linear_5(g, {11, 3, 0, 7, 12}));
  CHECK(is_uniform_linear_5(g, {12, 7, 0, 3, 11}));
  CHECK_FALSE(is_uniform_linear_5(g, {11, 3, 0, 7, 13}));
  CHECK_FALSE(is_uniform_linear_5(g, {3, 0, 7, 12}));
  CHECK(is_uniform_linear_5(g, {9, 1, 0, 5, 10}));
}

TEST_CASE("training sub-arrays follow the policy") {
  const auto g = example_geometry_32ch();
  std::mt19937_64 rng(2);
  std::vector<double> counts(7, 0.0);
  const int draws = 5000;
  for (int i = 0; i < draws; ++i) {
    const auto s = select_subarray(g, SubarrayPolicy::kTraining, rng);
    REQUIRE(s.size() >= 2);
    REQUIRE(s.size() <= 8);
    CHECK(std::find(s.begin(), s.end(), 0) != s.end());
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == s.size());
    for (auto c : s) CHECK(c < 32);
    if (s.size() == 5) CHECK_FALSE(is_uniform_linear_5(g, s));
    counts[s.size() - 2] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 7.0) * (c - draws / 7.0) / (draws / 7.0);
  const boost::math::chi_squared dist(6.0);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.01);

  std::mt19937_64 r1(7), r2(7);
  for (int i = 0; i < 50; ++i)
    CHECK(select_subarray(g, SubarrayPolicy::kTraining, r1) == select_subarray(g, SubarrayPolicy::kTraining, r2));
}

TEST_CASE("a line-only geometry forces redraws of the uniform five") {
  ArrayGeometry line;
  for (int i = 0; i < 5; ++i) line.positions.push_back({0.02 * i, 0.0, 0.0});
  std::mt19937_64 rng(3);
  SubarrayOptions opt;
  opt.min_size = 5;
  opt.max_size = 5;
  AK_CHECK_CODE(select_subarray(line, SubarrayPolicy::kTraining, rng, opt), ErrorCode::kPolicyUnsatisfiable);
  ArrayGeometry tiny;
  tiny.positions = {{0, 0, 0}};
  AK_CHECK_CODE(select_subarray(tiny, SubarrayPolicy::kTraining, rng), ErrorCode::kPolicyUnsatisfiable);
}

TEST_CASE("geometry files parse in both layouts") {
  const auto a = parse_array_geometry(R"({"positions": [[0,0,0],[0.1,0,0]]})");
  const auto b = parse_array_geometry(
      R"({"channels": [{"index": 1, "position": [0.1,0,0]}, {"index": 0, "position": [0,0,0]}]})");
  CHECK(a.positions == b.positions);
  AK_CHECK_CODE(parse_array_geometry(R"({"channels": [{"index": 2, "position": [0,0,0]}]})"),
                ErrorCode::kConfigInvalid);
  AK_CHECK_CODE(parse_array_geometry(R"({"positions": [[0,0]]})"), ErrorCode::kConfigInvalid);
  AK_CHECK_CODE(load_array_geometry("/nonexistent/geometry.json"), ErrorCode::kConfigInvalid);
  CHECK(example_geometry_32ch().positions.size() == 32);
}

TEST_CASE("manifests from an empty root") {
  const auto root = oracle::temp_dir("manifest_empty");
  CHECK(build_manifest(root.string()).empty());
}

TEST_CASE("manifests follow the directory layout and pairing rules") {
  const auto root = oracle::temp_dir("manifest_ok");
  touch(root / "train/OfficeRoom2/static/spk01/a.wav");
  touch(root / "train/OfficeRoom2/moving/spk02/b.wav");
  touch(root / "val/ClassRoom2/static/spk10/c.wav");
  touch(root / "val/ClassRoom1/noise/n1.wav");
  touch(root / "test/Library/static/spk20/d.wav");
  touch(root / "test/OfficeRoom1/noise/n2.wav");
  touch(root / "test/OfficeRoom3/noise/n3.wav");
  std::ofstream(root / "val/ClassRoom2/scene.json") << R"({"scene_type": "indoor", "t60_s": 0.9})";
  const auto ms = build_manifest(root.string());
  REQUIRE(ms.size() == 6);
  const auto find = [&](const std::string& split, const std::string& name) {
    for (const auto& m : ms)
      if (m.split == split && m.scene_name == name) return m;
    FAIL("missing " << split << "/" << name);
    return SceneManifest{};
  };
  const auto office = find("train", "OfficeRoom2");
  CHECK(office.utterances.size() == 2);
  const auto cls = find("val", "ClassRoom2");
  CHECK(cls.noise_scenes == std::vector<std::string>{"ClassRoom1"});
  CHECK(cls.t60_s.value() == doctest::Approx(0.9));
  CHECK(find("test", "Library").noise_scenes == std::vector<std::string>{"OfficeRoom1", "OfficeRoom3"});

  const auto out = oracle::temp_dir("manifest_out");
  write_manifests(out.string(), ms);
  CHECK(fs::exists(out / "index.json"));
  CHECK(fs::exists(out / "val_ClassRoom2.json"));
}

TEST_CASE("a speaker in two splits is a split violation") {
  const auto root = oracle::temp_dir("manifest_overlap");
  touch(root / "train/Hall/static/spk07/a.wav");
  touch(root / "test/Hall2/static/spk07/b.wav");
  touch(root / "test/Hall2/noise/n.wav");
  try {
    build_manifest(root.string());
    FAIL("expected SplitViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSplitViolation);
    CHECK(std::string(e.what()).find("spk07") != std::string::npos);
  }
}

TEST_CASE("validation speech paired with unrelated noise is a split violation") {
  const auto root = oracle::temp_dir("manifest_pairing");
  touch(root / "val/Canteen/static/spk30/a.wav");
  touch(root / "val/Gym/noise/n.wav");
  std::ofstream(root / "pairings.json") << R"({"val": {"Canteen": ["Gym"]}})";
  AK_CHECK_CODE(build_manifest(root.string()), ErrorCode::kSplitViolation);

  // Training may pair freely.
  const auto ok = oracle::temp_dir("manifest_train_pairing");
  touch(ok / "train/Canteen/static/spk30/a.wav");
  touch(ok / "train/Gym/noise/n.wav");
  std::ofstream(ok / "pairings.json") << R"({"train": {"Canteen": ["Gym"]}})";
  CHECK(build_manifest(ok.string()).size() == 2);
}

TEST_CASE("similar-noise patterns") {
  CHECK(wildcard_match("ClassRoom*", "classroom7"));
  CHECK_FALSE(wildcard_match("ClassRoom*", "Class"));
  CHECK(wildcard_match("*Room*", "LivingRoom2"));
  CHECK(wildcard_match("Library", "LIBRARY"));
  const auto m = parse_similar_noise_map(R"({"Lab*": ["Lab1"]})");
  REQUIRE(m.size() == 1);
  CHECK(m[0].second == std::vector<std::string>{"Lab1"});
  AK_CHECK_CODE(parse_similar_noise_map("[1]"), ErrorCode::kConfigInvalid);
}
