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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace cli {

namespace {

using Kind = Params::Kind;

json parse_doc(const Params& p, const std::string& name) {
  const std::string v = p.str(name);
  const bool inline_doc = !v.empty() && v.front() == '{';
  try {
    json j = json::parse(inline_doc ? v : read_text(v));
    if (!j.is_object()) config_error(p.section() + "." + name + ": must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    config_error(p.section() + "." + name + ": " + e.what());
  }
}

Signal select(const ak_signal* s, std::size_t channel) {
  ak_signal* out = nullptr;
  check(ak_signal_select(s, &channel, 1, &out), "select channel");
  return Signal(out);
}

Signal select_many(const ak_signal* s, const std::vector<std::size_t>& channels) {
  ak_signal* out = nullptr;
  check(ak_signal_select(s, channels.data(), channels.size(), &out), "select channels");
  return Signal(out);
}

Signal to_rate(Signal s, double rate) {
  if (std::abs(ak_signal_rate(s.get()) - rate) < 1e-9) return s;
  ak_signal* out = nullptr;
  check(ak_resample_to_rate(s.get(), rate, &out), "resample");
  return Signal(out);
}

std::vector<std::size_t> channel_list(const Params& p, const std::string& name, std::size_t available) {
  std::vector<std::size_t> out;
  if (p.str(name) == "all") {
    for (std::size_t c = 0; c < available; ++c) out.push_back(c);
    return out;
  }
  for (long c : p.int_list(name)) {
    if (c < 0 || static_cast<std::size_t>(c) >= available)
      config_error(p.section() + "." + name + ": channel " + std::to_string(c) + " out of range (" +
                   std::to_string(available) + " channels)");
    out.push_back(static_cast<std::size_t>(c));
  }
  if (out.empty()) config_error(p.section() + "." + name + ": no channels selected");
  return out;
}

std::string suffix(std::size_t count, std::size_t channel) {
  return count == 1 ? "" : "_ch" + std::to_string(channel);
}

std::vector<double> load_geometry(const std::string& path) {
  double* xyz = nullptr;
  std::size_t n = 0;
  check(ak_load_geometry(path.c_str(), &xyz, &n), "geometry");
  std::vector<double> out(xyz, xyz + 3 * n);
  ak_doubles_free(xyz);
  return out;
}

std::optional<std::string> geometry_of(const Context& ctx, const Params& p) {
  if (p.has("geometry")) return p.str("geometry");
  return ctx.geometry_path();
}

// ---------------------------------------------------------------------------

void setup_measure(Command& c) {
  auto& p = *c.params;
  p.add("recording", "Recorded sweep response WAV", "", Kind::kInput);
  p.add("inverse", "Inverse filter WAV (default: regenerated from the sweep spec)", "", Kind::kInput);
  p.add("sweep", "Sweep spec JSON file (f1_hz, f2_hz, duration_s, repetitions, gap_s, ...)", "",
        Kind::kInput);
  p.flag("generate", "Write sweep.wav and inverse.wav instead of measuring");
  p.add("channels", "Channels to measure: list or 'all'", "0");
  p.add("length-s", "RIR length in seconds", "1.0");
  p.add("pre-ms", "Samples kept ahead of the peak, in ms", "5");
  p.add("period", "Samples between repetitions (default: from the sweep spec)");
  p.add("fit-hi-db", "Upper edge of the decay fit", "-5");
  p.add("fit-lo-db", "Lower edge of the decay fit", "-25");
  p.add("device-ir-window-ms", "Also extract a device IR with this window");
  p.add("out", "Output directory", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    json spec = p.has("sweep") ? parse_doc(p, "sweep") : json::object();
    if (!spec.contains("rate_hz")) spec["rate_hz"] = ctx.rates().record_hz;
    const fs::path out = p.str("out");

    if (p.boolean("generate")) {
      if (ctx.dry_run) {
        for (const char* f : {"sweep.wav", "inverse.wav", "sweep.json"}) ctx.plan("measure", "write", (out / f).string());
        return kExitOk;
      }
      ak_signal *sw = nullptr, *inv = nullptr;
      std::size_t period = 0;
      check(ak_ess_generate(spec.dump().c_str(), &sw, &inv, &period), "measure");
      Signal sweep(sw), inverse(inv);
      ensure_dir(out);
      write_wav(sweep.get(), (out / "sweep.wav").string());
      write_wav(inverse.get(), (out / "inverse.wav").string());
      json meta = {{"spec", spec}, {"period", period}, {"sweep_samples", ak_signal_frames(sweep.get())}};
      write_text(out / "sweep.json", meta.dump(2) + "\n");
      ctx.log("info", "wrote", {{"cmd", "measure"}, {"dir", out.string()}});
      return kExitOk;
    }

    Signal rec = read_wav(p.str("recording"));
    Signal inverse;
    std::size_t period = 0;
    if (p.has("inverse")) {
      inverse = read_wav(p.str("inverse"));
    } else {
      ak_signal *sw = nullptr, *inv = nullptr;
      check(ak_ess_generate(spec.dump().c_str(), &sw, &inv, &period), "measure");
      ak_signal_free(sw);
      inverse.reset(inv);
    }
    if (p.has("period")) period = static_cast<std::size_t>(p.integer("period"));
    const int repetitions = spec.value("repetitions", 1);
    const auto channels = channel_list(p, "channels", ak_signal_channels(rec.get()));

    if (ctx.dry_run) {
      for (auto ch : channels) {
        ctx.plan("measure", "write", (out / ("rir" + suffix(channels.size(), ch) + ".wav")).string());
        if (p.has("device-ir-window-ms"))
          ctx.plan("measure", "write", (out / ("device_ir" + suffix(channels.size(), ch) + ".wav")).string());
      }
      ctx.plan("measure", "write", (out / "measurement.json").string());
      return kExitOk;
    }

    const json opts = {{"length_s", p.num("length-s")},   {"pre_ms", p.num("pre-ms")},
                       {"repetitions", repetitions},      {"period", period},
                       {"fit_hi_db", p.num("fit-hi-db")}, {"fit_lo_db", p.num("fit-lo-db")}};
    const std::string opts_text = opts.dump();
    ensure_dir(out);
    std::vector<json> reports(channels.size());
    run_jobs(ctx.jobs, channels.size(), [&](std::size_t k) {
      const std::size_t ch = channels[k];
      Signal mono = select(rec.get(), ch);
      ak_signal* rir = nullptr;
      CString report;
      check(ak_measure_rir(mono.get(), inverse.get(), opts_text.c_str(), &rir, &report.p), "measure");
      Signal rir_sig(rir);
      const std::string sfx = suffix(channels.size(), ch);
      write_wav(rir_sig.get(), (out / ("rir" + sfx + ".wav")).string());
      json r = json::parse(report.str());
      r["channel"] = ch;
      if (p.has("device-ir-window-ms")) {
        ak_signal* taps = nullptr;
        std::size_t start = 0, peak = 0;
        check(ak_extract_device_ir(rir_sig.get(), p.num("device-ir-window-ms"), &taps, &start, &peak),
              "device IR");
        Signal dev(taps);
        write_wav(dev.get(), (out / ("device_ir" + sfx + ".wav")).string());
        r["device_ir"] = {{"window_start", start}, {"peak_index", peak},
                          {"taps", ak_signal_frames(dev.get())}};
      }
      reports[k] = std::move(r);
    });
    const json doc = channels.size() == 1 ? reports.front() : json{{"channels", reports}};
    write_text(out / "measurement.json", doc.dump(2) + "\n");
    ctx.log("info", "wrote", {{"cmd", "measure"}, {"dir", out.string()}});
    return kExitOk;
  };
}

// ---------------------------------------------------------------------------

void setup_annotate_dp(Command& c) {
  auto& p = *c.params;
  p.add("recording", "Multichannel recording WAV", "", Kind::kInput);
  p.add("source", "Source (played) signal WAV", "", Kind::kInput);
  p.add("device-ir", "Device impulse response WAV (default: unit impulse)", "", Kind::kInput);
  p.add("oracle", "Direct-path WAV used as the pre-enhancement hook", "", Kind::kInput);
  p.add("oracle-channel", "Oracle channel (default: same as the annotated channel)");
  p.add("mode", "static or moving", "static");
  p.add("channels", "Channels to annotate: list or 'all'", "0");
  p.add("annotator", "Annotator config JSON file", "", Kind::kInput);
  p.add("out", "Output directory", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    const std::string mode = p.str("mode");
    if (mode != "static" && mode != "moving")
      config_error(p.section() + ".mode: expected 'static' or 'moving', got '" + mode + "'");
    json acfg = p.has("annotator") ? parse_doc(p, "annotator") : json::object();
    if (!acfg.contains("gcc_rate_hz")) acfg["gcc_rate_hz"] = ctx.rates().gcc_hz;
    const std::string acfg_text = acfg.dump();
    const fs::path out = p.str("out");

    Signal rec = read_wav(p.str("recording"));
    const auto channels = channel_list(p, "channels", ak_signal_channels(rec.get()));
    if (ctx.dry_run) {
      for (auto ch : channels) {
        const std::string sfx = suffix(channels.size(), ch);
        for (const char* f : {"direct_path", "track", "diagnostics"}) {
          const std::string ext = std::string(f) == "direct_path" ? ".wav"
                                  : std::string(f) == "track"     ? ".csv"
                                                                  : ".json";
          ctx.plan("annotate-dp", "write", (out / (f + sfx + ext)).string());
        }
      }
      return kExitOk;
    }
    Signal src = read_wav(p.str("source"));
    Signal dev = p.has("device-ir") ? read_wav(p.str("device-ir")) : Signal();
    Signal oracle = p.has("oracle") ? read_wav(p.str("oracle")) : Signal();
    ensure_dir(out);

    std::vector<int> discarded(channels.size(), 0);
    run_jobs(ctx.jobs, channels.size(), [&](std::size_t k) {
      const std::size_t ch = channels[k];
      const std::string sfx = suffix(channels.size(), ch);
      Signal oracle_ch;
      if (oracle) {
        std::size_t oc = ak_signal_channels(oracle.get()) == 1 ? 0 : ch;
        if (p.has("oracle-channel")) oc = static_cast<std::size_t>(p.integer("oracle-channel"));
        oracle_ch = select(oracle.get(), oc);
      }
      ak_annotate_request req{};
      req.recording = rec.get();
      req.source = src.get();
      req.device_ir = dev.get();
      req.config_json = acfg_text.c_str();
      req.moving = mode == "moving";
      req.reference_channel = ch;
      req.oracle = oracle_ch.get();
      ak_annotation* a = nullptr;
      const ak_status st = ak_annotate_direct_path(&req, &a);
      if (st == AK_ERR_NO_SHARP_PEAK) {
        discarded[k] = 1;
        const json d = {{"status", "discarded"}, {"reason", ak_last_error()}, {"channel", ch}, {"mode", mode}};
        write_text(out / ("diagnostics" + sfx + ".json"), d.dump(2) + "\n");
        ctx.log("warn", "discarded", {{"cmd", "annotate-dp"}, {"channel", ch}, {"status", ak_status_name(st)}, {"reason", ak_last_error()}});
        return;
      }
      check(st, "annotate-dp");
      std::unique_ptr<ak_annotation, void (*)(ak_annotation*)> ann(a, ak_annotation_free);
      write_wav(ak_annotation_direct_path(a), (out / ("direct_path" + sfx + ".wav")).string());
      std::string csv = "segment_time_s,tau_samples,gain,valid\n";
      for (std::size_t s = 0; s < ak_annotation_segments(a); ++s) {
        double t = 0, tau = 0, g = 0;
        int valid = 0;
        check(ak_annotation_segment(a, s, &t, &tau, &g, &valid), "annotate-dp");
        csv += fmt(t) + "," + fmt(tau) + "," + fmt(g) + "," + std::to_string(valid) + "\n";
      }
      write_text(out / ("track" + sfx + ".csv"), csv);
      CString diag;
      check(ak_annotation_diagnostics_json(a, &diag.p), "annotate-dp");
      json d = json::parse(diag.str());
      d["status"] = "ok";
      d["channel"] = ch;
      d["mode"] = mode;
      write_text(out / ("diagnostics" + sfx + ".json"), d.dump(2) + "\n");
    });
    const bool any_discarded = std::find(discarded.begin(), discarded.end(), 1) != discarded.end();
    ctx.log("info", "done", {{"cmd", "annotate-dp"}, {"dir", out.string()}, {"discarded", any_discarded}});
    return any_discarded ? kExitDiscarded : kExitOk;
  };
}

// ---------------------------------------------------------------------------

void setup_annotate_loc(Command& c) {
  auto& p = *c.params;
  p.add("frames", "Directory of PNG/PPM frames, sorted by name", "", Kind::kInput);
  p.add("times", "CSV with columns file,t_s (default: index / fps)", "", Kind::kInput);
  p.add("fps", "Frame rate when no times file is given", "10");
  p.add("camera", "Camera model JSON file", "", Kind::kInput);
  p.add("color", "LED colour: red or green", "red");
  p.add("led-height", "Logged LED height in metres");
  p.add("source-height", "Loudspeaker centre height in metres", "1.40");
  p.add("array-height", "Array centre height in metres", "1.40");
  p.add("led-offset", "LED height above the loudspeaker centre", "0.12");
  p.add("duration", "Annotation span in seconds (default: last frame)");
  p.add("overlay", "Directory for overlay PNGs", "", Kind::kOutput);
  p.add("out", "Output CSV", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    std::string camera_text;
    if (p.has("camera")) {
      camera_text = parse_doc(p, "camera").dump();
    } else if (ctx.camera_path()) {
      camera_text = read_text(*ctx.camera_path());
    } else {
      config_error("annotate_loc.camera: camera model required (--camera or config camera_model)");
    }
    const fs::path dir = p.str("frames");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
      if (e.is_regular_file() && (ext == ".png" || ext == ".ppm")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) config_error("annotate_loc.frames: no PNG or PPM frames in " + dir.string());

    std::vector<double> times(files.size());
    if (p.has("times")) {
      std::vector<std::string> header;
      const auto rows = read_csv(p.str("times"), header);
      std::map<std::string, double> by_name;
      for (const auto& r : rows)
        if (r.size() >= 2) by_name[r[0]] = std::stod(r[1]);
      for (std::size_t i = 0; i < files.size(); ++i) {
        const auto it = by_name.find(files[i].filename().string());
        if (it == by_name.end())
          config_error("annotate_loc.times: no entry for " + files[i].filename().string());
        times[i] = it->second;
      }
    } else {
      const double fps = p.num("fps");
      if (!(fps > 0)) config_error("annotate_loc.fps: must be positive");
      for (std::size_t i = 0; i < files.size(); ++i) times[i] = static_cast<double>(i) / fps;
    }

    json opts = {{"array_height_m", p.num("array-height")}, {"led_offset_m", p.num("led-offset")}};
    if (p.has("led-height")) {
      opts["led_height_m"] = p.num("led-height");
    } else {
      opts["source_center_height_m"] = p.num("source-height");
    }
    if (p.has("duration")) opts["duration_s"] = p.num("duration");

    const fs::path out = p.str("out");
    if (ctx.dry_run) {
      ctx.plan("annotate-loc", "detect", std::to_string(files.size()) + " frames in " + dir.string());
      ctx.plan("annotate-loc", "write", out.string());
      if (p.has("overlay")) ctx.plan("annotate-loc", "write overlays to", p.str("overlay"));
      return kExitOk;
    }

    const std::string color = p.str("color");
    std::vector<ak_detection> det(files.size());
    std::vector<int> found(files.size(), 0);
    run_jobs(ctx.jobs, files.size(), [&](std::size_t i) {
      const ak_status st = ak_detect_led(files[i].string().c_str(), color.c_str(), times[i], &det[i]);
      if (st == AK_ERR_NO_DETECTION) {
        ctx.log("info", "no_detection", {{"frame", files[i].filename().string()}});
        return;
      }
      check(st, "detect_led");
      found[i] = 1;
    });
    std::vector<ak_detection> hits;
    for (std::size_t i = 0; i < files.size(); ++i)
      if (found[i]) hits.push_back(det[i]);

    ak_location_frame* frames = nullptr;
    std::size_t n = 0;
    check(ak_annotate_location(camera_text.c_str(), opts.dump().c_str(), hits.data(), hits.size(),
                               &frames, &n),
          "annotate-loc");
    std::string csv = "t_s,azimuth_deg,elevation_deg,distance_m,valid\n";
    for (std::size_t i = 0; i < n; ++i)
      csv += fmt(frames[i].t_s) + "," + fmt(frames[i].azimuth_deg) + "," + fmt(frames[i].elevation_deg) +
             "," + fmt(frames[i].distance_m) + "," + std::to_string(frames[i].valid) + "\n";
    ak_location_frames_free(frames);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_text(out, csv);

    if (p.has("overlay")) {
      const fs::path odir = p.str("overlay");
      ensure_dir(odir);
      run_jobs(ctx.jobs, files.size(), [&](std::size_t i) {
        if (!found[i]) return;
        const fs::path target = odir / (files[i].stem().string() + ".png");
        check(ak_write_overlay(files[i].string().c_str(), det[i].u, det[i].v, target.string().c_str()),
              "overlay");
      });
    }
    ctx.log("info", "wrote", {{"cmd", "annotate-loc"}, {"path", out.string()}, {"frames", n}});
    return kExitOk;
  };
}

// ---------------------------------------------------------------------------

std::string truth_csv(const ak_scene* scene, double step_s) {
  const ak_signal* mix = ak_scene_mixture(scene);
  const std::size_t mics = ak_signal_channels(mix);
  const double rate = ak_signal_rate(mix);
  std::vector<const double*> tau(mics), gain(mics);
  std::size_t len = 0;
  for (std::size_t m = 0; m < mics; ++m) check(ak_scene_truth(scene, m, &tau[m], &gain[m], &len), "truth");
  std::string csv = "t_s";
  for (std::size_t m = 0; m < mics; ++m)
    csv += ",tau_m" + std::to_string(m) + "_samples,gain_m" + std::to_string(m);
  csv += "\n";
  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * step_s;
    const auto idx = static_cast<std::size_t>(std::llround(t * rate));
    if (idx >= len) break;
    csv += fmt(static_cast<double>(idx) / rate);
    for (std::size_t m = 0; m < mics; ++m) csv += "," + fmt(tau[m][idx]) + "," + fmt(gain[m][idx]);
    csv += "\n";
  }
  return csv;
}

void setup_simulate(Command& c) {
  auto& p = *c.params;
  p.add("scene", "Scene JSON file", "", Kind::kInput);
  p.add("truth-step-s", "Grid of the ground-truth track CSV", "0.01");
  p.add("format", "WAV sample format: float32, pcm24 or pcm16", "float32");
  p.add("out", "Output directory", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    json scene = parse_doc(p, "scene");
    const std::string raw = p.str("scene");
    const fs::path base = (!raw.empty() && raw.front() == '{') ? ctx.config_dir()
                                                                : fs::absolute(raw).parent_path();
    if (!scene.contains("mics") && !scene.contains("geometry") && ctx.geometry_path())
      scene["geometry"] = {{"path", *ctx.geometry_path()}};
    const fs::path out = p.str("out");
    const double step = p.num("truth-step-s");
    if (!(step > 0)) config_error("simulate.truth_step_s: must be positive");
    static const char* kFiles[] = {"mixture.wav", "source.wav", "direct_path.wav", "noise.wav",
                                   "truth_tracks.csv", "truth_location.csv"};
    if (ctx.dry_run) {
      for (const char* f : kFiles) ctx.plan("simulate", "write", (out / f).string());
      return kExitOk;
    }
    const std::int64_t seed = ctx.seed().value_or(-1);
    ak_scene* raw_scene = nullptr;
    check(ak_simulate_scene(scene.dump().c_str(), base.string().c_str(), seed, &raw_scene), "simulate");
    std::unique_ptr<ak_scene, void (*)(ak_scene*)> s(raw_scene, ak_scene_free);
    ensure_dir(out);
    const std::string format = p.str("format");
    write_wav(ak_scene_mixture(s.get()), (out / "mixture.wav").string(), format);
    write_wav(ak_scene_source(s.get()), (out / "source.wav").string(), format);
    write_wav(ak_scene_direct_path(s.get()), (out / "direct_path.wav").string(), format);
    if (ak_signal_channels(ak_scene_noise(s.get())) > 0)
      write_wav(ak_scene_noise(s.get()), (out / "noise.wav").string(), format);
    write_text(out / "truth_tracks.csv", truth_csv(s.get(), step));

    ak_location_frame* frames = nullptr;
    std::size_t n = 0;
    check(ak_scene_location(s.get(), &frames, &n), "simulate");
    std::string csv = "t_s,azimuth_deg,elevation_deg,distance_m,valid\n";
    for (std::size_t i = 0; i < n; ++i)
      csv += fmt(frames[i].t_s) + "," + fmt(frames[i].azimuth_deg) + "," + fmt(frames[i].elevation_deg) +
             "," + fmt(frames[i].distance_m) + "," + std::to_string(frames[i].valid) + "\n";
    ak_location_frames_free(frames);
    write_text(out / "truth_location.csv", csv);
    ctx.log("info", "wrote", {{"cmd", "simulate"}, {"dir", out.string()}});
    return kExitOk;
  };
}

// ---------------------------------------------------------------------------

void setup_coherence(Command& c) {
  auto& p = *c.params;
  p.add("noise", "Multichannel noise WAV", "", Kind::kInput);
  p.add("source-noise", "Mono noise WAV; generates diffuse noise first", "", Kind::kInput);
  p.add("duration", "Duration of generated diffuse noise, seconds", "60");
  p.add("noise-out", "Where to write the generated diffuse noise", "", Kind::kOutput);
  p.add("pair", "Channel pair i,j", "0,1");
  p.add("spacing", "Microphone spacing in metres (default: from the geometry)");
  p.add("geometry", "Array geometry JSON", "", Kind::kInput);
  p.add("window-s", "Per-window estimates of this length (default: whole signal)");
  p.add("out", "Output CSV", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    const auto pair = p.int_list("pair");
    if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0) config_error("coherence.pair: expected i,j");
    const auto geometry = geometry_of(ctx, p);
    std::optional<double> spacing;
    std::vector<double> pos;  // the pair's two positions
    if (p.has("spacing")) {
      spacing = p.num("spacing");
      pos = {0, 0, 0, *spacing, 0, 0};
    } else if (geometry) {
      const auto xyz = load_geometry(*geometry);
      const std::size_t n = xyz.size() / 3;
      if (static_cast<std::size_t>(pair[0]) >= n || static_cast<std::size_t>(pair[1]) >= n)
        config_error("coherence.pair: channel out of range for " + *geometry);
      for (long m : pair)
        for (int k = 0; k < 3; ++k) pos.push_back(xyz[3 * m + k]);
      spacing = std::hypot(pos[0] - pos[3], pos[1] - pos[4], pos[2] - pos[5]);
    }
    const fs::path out = p.str("out");
    if (ctx.dry_run) {
      if (p.has("source-noise") && p.has("noise-out")) ctx.plan("coherence", "write", p.str("noise-out"));
      ctx.plan("coherence", "write", out.string());
      return kExitOk;
    }
    Signal noise;
    std::size_t i = static_cast<std::size_t>(pair[0]), j = static_cast<std::size_t>(pair[1]);
    if (p.has("source-noise")) {
      if (pos.empty()) config_error("coherence: --spacing or a geometry is required to generate noise");
      Signal src = read_wav(p.str("source-noise"));
      ak_signal* gen = nullptr;
      check(ak_diffuse_noise(src.get(), pos.data(), 2, p.num("duration"), &gen), "diffuse noise");
      noise.reset(gen);
      i = 0;
      j = 1;
      if (p.has("noise-out")) write_wav(noise.get(), p.str("noise-out"));
    } else {
      noise = read_wav(p.str("noise"));
    }
    CString csv;
    check(ak_coherence_csv(noise.get(), i, j, spacing.value_or(0.0),
                           p.has("window-s") ? p.num("window-s") : 0.0, &csv.p),
          "coherence");
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_text(out, csv.str());
    ctx.log("info", "wrote", {{"cmd", "coherence"}, {"path", out.string()}});
    return kExitOk;
  };
}

// ---------------------------------------------------------------------------

void setup_mix(Command& c) {
  auto& p = *c.params;
  p.add("speech", "Multichannel speech WAV", "", Kind::kInput);
  p.add("noise", "Multichannel noise WAV", "", Kind::kInput);
  p.add("snr", "SNR in dB (default: drawn uniformly from [-10, 15])");
  p.add("count", "Number of mixtures; mixture k uses seed + k", "1");
  p.add("subarray", "none, train or test", "none");
  p.add("geometry", "Array geometry JSON", "", Kind::kInput);
  p.flag("active-speech", "Measure speech power over active frames only");
  p.add("rate", "Output rate in Hz (default: the process rate)");
  p.add("format", "WAV sample format", "float32");
  p.add("out", "Output directory", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    const long count = p.integer("count");
    if (count < 1) config_error("mix.count: must be at least 1");
    const std::string policy = p.str("subarray");
    if (policy != "none" && policy != "train" && policy != "test")
      config_error("mix.subarray: expected none, train or test");
    std::vector<double> xyz;
    if (policy != "none") {
      const auto g = geometry_of(ctx, p);
      if (!g) config_error("mix.geometry: an array geometry is required for sub-array selection");
      xyz = load_geometry(*g);
    }
    const double rate = p.has("rate") ? p.num("rate") : ctx.rates().process_hz;
    const std::uint64_t base_seed = static_cast<std::uint64_t>(ctx.seed().value_or(0));
    const fs::path out = p.str("out");
    auto name = [](long k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "mix_%04ld", k);
      return std::string(buf);
    };
    if (ctx.dry_run) {
      for (long k = 0; k < count; ++k) {
        ctx.plan("mix", "write", (out / (name(k) + ".wav")).string());
        ctx.plan("mix", "write", (out / (name(k) + ".json")).string());
      }
      return kExitOk;
    }
    Signal speech = to_rate(read_wav(p.str("speech")), rate);
    Signal noise = to_rate(read_wav(p.str("noise")), rate);
    ensure_dir(out);
    const std::string format = p.str("format");
    run_jobs(ctx.jobs, static_cast<std::size_t>(count), [&](std::size_t k) {
      const std::uint64_t seed = base_seed + k;
      std::vector<std::size_t> channels;
      if (policy != "none") {
        std::vector<std::size_t> buf(64);
        std::size_t n = 0;
        check(ak_select_subarray(xyz.data(), xyz.size() / 3, policy == "test" ? 1 : 0, seed, buf.data(),
                                 buf.size(), &n),
              "subarray");
        channels.assign(buf.begin(), buf.begin() + static_cast<long>(n));
      } else {
        for (std::size_t ch = 0; ch < ak_signal_channels(speech.get()); ++ch) channels.push_back(ch);
      }
      double snr = 0.0;
      if (p.has("snr")) {
        snr = p.num("snr");
      } else {
        check(ak_draw_snr(seed, 1, &snr), "draw_snr");
      }
      Signal sp = select_many(speech.get(), channels);
      Signal nz = select_many(noise.get(), channels);
      ak_signal* mixed = nullptr;
      ak_mix_result info{};
      check(ak_mix(sp.get(), nz.get(), snr, seed, p.boolean("active-speech") ? 1 : 0, &mixed, &info), "mix");
      Signal m(mixed);
      write_wav(m.get(), (out / (name(static_cast<long>(k)) + ".wav")).string(), format);
      const json side = {{"snr_db", info.snr_db},
                         {"measured_snr_db", info.measured_snr_db},
                         {"speech_ref", p.str("speech")},
                         {"noise_ref", p.str("noise")},
                         {"seed", seed},
                         {"channels", channels},
                         {"noise_offset", info.noise_offset},
                         {"noise_scale", info.noise_scale},
                         {"rate_hz", rate}};
      write_text(out / (name(static_cast<long>(k)) + ".json"), side.dump(2) + "\n");
    });
    ctx.log("info", "wrote", {{"cmd", "mix"}, {"dir", out.string()}, {"count", count}});
    return kExitOk;
  };
}

// ---------------------------------------------------------------------------

std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::string& file) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Failure{kExitModule, file + ": missing column " + name, "ShapeMismatch"};
  return static_cast<std::size_t>(it - header.begin());
}

double cell(const std::vector<std::string>& row, std::size_t i, const std::string& file) {
  if (i >= row.size()) throw Failure{kExitModule, file + ": short row", "ShapeMismatch"};
  try {
    return std::stod(row[i]);
  } catch (const std::exception&) {
    throw Failure{kExitModule, file + ": bad number '" + row[i] + "'", "ShapeMismatch"};
  }
}

double interp(const std::vector<double>& x, const std::vector<double>& y, double q) {
  if (q <= x.front()) return y.front();
  if (q >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), q);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double w = (q - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

void setup_score(Command& c) {
  auto& p = *c.params;
  p.add("estimate", "Estimated signal WAV", "", Kind::kInput);
  p.add("reference", "Reference signal WAV", "", Kind::kInput);
  p.add("channel", "Estimate channel", "0");
  p.add("reference-channel", "Reference channel (default: --channel)");
  p.add("track", "Estimated delay/gain track CSV", "", Kind::kInput);
  p.add("truth", "Ground-truth track CSV from simulate", "", Kind::kInput);
  p.add("truth-mic", "Microphone column of the ground truth", "0");
  p.add("loc-estimate", "Estimated location CSV", "", Kind::kInput);
  p.add("loc-truth", "Ground-truth location CSV", "", Kind::kInput);
  p.add("threshold-deg", "ACC threshold", "5");
  p.add("out", "Output JSON", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    const bool sdr = p.has("estimate") || p.has("reference");
    const bool track = p.has("track") || p.has("truth");
    const bool loc = p.has("loc-estimate") || p.has("loc-truth");
    if (!sdr && !track && !loc) config_error("score: nothing to score");
    const fs::path out = p.str("out");
    if (ctx.dry_run) {
      ctx.plan("score", "write", out.string());
      return kExitOk;
    }
    json report = json::object();
    if (sdr) {
      Signal est = read_wav(p.str("estimate"));
      Signal ref = read_wav(p.str("reference"));
      const long ch = p.integer("channel");
      const long rch = p.has("reference-channel") ? p.integer("reference-channel") : ch;
      Signal e1 = select(est.get(), static_cast<std::size_t>(ch));
      Signal r1 = select(ref.get(), static_cast<std::size_t>(rch));
      double v = 0.0;
      check(ak_si_sdr(e1.get(), r1.get(), &v), "si_sdr");
      report["si_sdr_db"] = v;
      report["si_sdr_cap_db"] = 60.0;
    }
    if (track) {
      const std::string tf = p.str("track"), gf = p.str("truth");
      std::vector<std::string> th, gh;
      const auto trows = read_csv(tf, th);
      const auto grows = read_csv(gf, gh);
      const std::string mic = std::to_string(p.integer("truth-mic"));
      const std::size_t gt = column(gh, "t_s", gf), gtau = column(gh, "tau_m" + mic + "_samples", gf),
                        ggain = column(gh, "gain_m" + mic, gf);
      std::vector<double> tx, ty, ga;
      for (const auto& r : grows) {
        tx.push_back(cell(r, gt, gf));
        ty.push_back(cell(r, gtau, gf));
        ga.push_back(cell(r, ggain, gf));
      }
      if (tx.empty()) throw Failure{kExitModule, gf + ": no rows", "ShapeMismatch"};
      const std::size_t st = column(th, "segment_time_s", tf), stau = column(th, "tau_samples", tf),
                        sgain = column(th, "gain", tf);
      double tau_sum = 0.0, tau_max = 0.0;
      std::size_t n = 0;
      std::vector<double> gains, true_gains;
      for (const auto& r : trows) {
        const double t = cell(r, st, tf);
        const double err = std::abs(cell(r, stau, tf) - interp(tx, ty, t));
        tau_sum += err;
        tau_max = std::max(tau_max, err);
        gains.push_back(cell(r, sgain, tf));
        true_gains.push_back(interp(tx, ga, t));
        ++n;
      }
      if (n == 0) throw Failure{kExitModule, tf + ": no segments", "NoValidFrames"};
      // Gains are compared up to one common scale (the source level is unknown).
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        num += gains[k] * true_gains[k];
        den += true_gains[k] * true_gains[k];
      }
      const double scale = den > 0 ? num / den : 0.0;
      double gerr = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        gerr += std::abs(gains[k] - scale * true_gains[k]) / std::max(scale * true_gains[k], 1e-300);
      report["tau_mae_samples"] = tau_sum / static_cast<double>(n);
      report["tau_max_error_samples"] = tau_max;
      report["gain_scale"] = scale;
      report["gain_mean_rel_error"] = gerr / static_cast<double>(n);
      report["segments"] = n;
    }
    if (loc) {
      const std::string ef = p.str("loc-estimate"), tf = p.str("loc-truth");
      std::vector<std::string> eh, th;
      const auto er = read_csv(ef, eh);
      const auto tr = read_csv(tf, th);
      if (er.size() != tr.size())
        throw Failure{kExitModule, "location tracks differ in length", "ShapeMismatch"};
      std::vector<double> times, ea, ta;
      std::vector<int> ev, tv;
      const std::size_t et = column(eh, "t_s", ef), eaz = column(eh, "azimuth_deg", ef),
                        evl = column(eh, "valid", ef);
      const std::size_t taz = column(th, "azimuth_deg", tf), tvl = column(th, "valid", tf);
      for (std::size_t k = 0; k < er.size(); ++k) {
        times.push_back(cell(er[k], et, ef));
        ea.push_back(cell(er[k], eaz, ef));
        ev.push_back(cell(er[k], evl, ef) != 0.0);
        ta.push_back(cell(tr[k], taz, tf));
        tv.push_back(cell(tr[k], tvl, tf) != 0.0);
      }
      double mae = 0.0, acc = 0.0;
      std::size_t used = 0;
      const double thr = p.num("threshold-deg");
      check(ak_loc_metrics(times.data(), ea.data(), ev.data(), ta.data(), tv.data(), times.size(), thr, &mae,
                           &acc, &used),
            "loc_metrics");
      report["loc"] = {{"mae_deg", mae}, {"acc_pct", acc}, {"threshold_deg", thr}, {"frames", used}};
    }
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_text(out, report.dump(2) + "\n");
    ctx.log("info", "wrote", {{"cmd", "score"}, {"path", out.string()}});
    return kExitOk;
  };
}

// ---------------------------------------------------------------------------

void setup_manifest(Command& c) {
  auto& p = *c.params;
  p.add("root", "Corpus root with train/, val/, test/", "", Kind::kInput);
  p.add("similar-map", "Similar-environment noise map JSON", "", Kind::kInput);
  p.flag("gate", "Also gate every noise recording into kept/dropped clips");
  p.add("gate-clip-s", "Gating clip length", "10");
  p.add("gate-floor-db", "Minimum clip power, dB re full scale", "-60");
  p.add("out", "Output directory", "", Kind::kOutput);

  c.run = [](const Context& ctx, const Params& p) {
    const std::string root = p.str("root");
    const std::string map = p.has("similar-map") ? p.str("similar-map") : "";
    const fs::path out = p.str("out");
    CString index;
    check(ak_build_manifest(root.c_str(), map.empty() ? nullptr : map.c_str(),
                            ctx.dry_run ? nullptr : out.string().c_str(), &index.p),
          "manifest");
    if (ctx.dry_run) {
      const json j = json::parse(index.str());
      for (const char* split : {"train", "val", "test"})
        for (const auto& s : j[split])
          ctx.plan("manifest", "write", (out / (std::string(split) + "_" + s["scene"].get<std::string>() + ".json")).string());
      ctx.plan("manifest", "write", (out / "index.json").string());
      if (p.boolean("gate")) ctx.plan("manifest", "write", (out / "noise_gating.json").string());
      return kExitOk;
    }
    if (p.boolean("gate")) {
      std::vector<fs::path> noise_files;
      for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().extension() != ".wav") continue;
        if (e.path().parent_path().filename() == "noise") noise_files.push_back(e.path());
      }
      std::sort(noise_files.begin(), noise_files.end());
      std::vector<json> reports(noise_files.size());
      const double clip = p.num("gate-clip-s"), floor_db = p.num("gate-floor-db");
      run_jobs(ctx.jobs, noise_files.size(), [&](std::size_t k) {
        Signal rec = read_wav(noise_files[k].string());
        CString rep;
        check(ak_gate_noise(rec.get(), clip, floor_db, &rep.p), "gate");
        reports[k] = json::parse(rep.str());
      });
      json doc = json::object();
      for (std::size_t k = 0; k < noise_files.size(); ++k)
        doc[fs::relative(noise_files[k], root).generic_string()] = reports[k];
      write_text(out / "noise_gating.json", doc.dump(2) + "\n");
    }
    ctx.log("info", "wrote", {{"cmd", "manifest"}, {"dir", out.string()}});
    return kExitOk;
  };
}

}  // namespace

std::vector<Command> register_commands(CLI::App& root) {
  struct Spec {
    const char* name;
    const char* section;
    const char* help;
    void (*setup)(Command&);
  };
  static const Spec specs[] = {
      {"measure", "measure", "Sweep generation, RIR and T60 measurement", setup_measure},
      {"annotate-dp", "annotate_dp", "Direct-path annotation of a recording", setup_annotate_dp},
      {"annotate-loc", "annotate_loc", "Source location from fisheye frames", setup_annotate_loc},
      {"simulate", "simulate", "Simulate a scene with ground truth", setup_simulate},
      {"coherence", "coherence", "Spatial coherence of multichannel noise", setup_coherence},
      {"mix", "mix", "Mix speech and noise at a target SNR", setup_mix},
      {"score", "score", "SI-SDR, delay-track and localization metrics", setup_score},
      {"manifest", "manifest", "Build and validate dataset manifests", setup_manifest},
  };
  std::vector<Command> out;
  for (const auto& s : specs) {
    Command c;
    c.app = root.add_subcommand(s.name, s.help);
    c.params = std::make_unique<Params>(c.app, s.section);
    s.setup(c);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace cli
