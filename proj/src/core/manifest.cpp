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

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "arraykit/dataset.hpp"

namespace arraykit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool match_from(const std::string& p, std::size_t i, const std::string& s, std::size_t j) {
  while (i < p.size()) {
    if (p[i] == '*') {
      for (std::size_t k = j; k <= s.size(); ++k)
        if (match_from(p, i + 1, s, k)) return true;
      return false;
    }
    if (j >= s.size() || p[i] != s[j]) return false;
    ++i;
    ++j;
  }
  return j == s.size();
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_wav(const fs::path& p) { return lower(p.extension().string()) == ".wav"; }

bool mapping_allows(const SimilarNoiseMap& similar, const std::string& scene,
                    const std::string& noise_scene) {
  for (const auto& [pattern, targets] : similar) {
    if (!wildcard_match(pattern, scene)) continue;
    for (const auto& t : targets)
      if (lower(t) == lower(noise_scene)) return true;
  }
  return false;
}

const std::set<std::string> kSplits{"train", "val", "test"};
const std::set<std::string> kSceneTypes{"indoor", "outdoor", "semi-outdoor", "transportation"};

}  // namespace

bool wildcard_match(const std::string& pattern, const std::string& name) {
  return match_from(lower(pattern), 0, lower(name), 0);
}

SimilarNoiseMap default_similar_noise_map() {
  return {{"ClassRoom*", {"ClassRoom1"}},
          {"OfficeRoom*", {"OfficeRoom1", "OfficeRoom3"}},
          {"Library", {"OfficeRoom1", "OfficeRoom3"}},
          {"LivingRoom*", {"LivingRoom1", "Laundry"}}};
}

SimilarNoiseMap parse_similar_noise_map(const std::string& json_text) {
  SimilarNoiseMap out;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) fail(ErrorCode::kConfigInvalid, "similar-noise map must be an object");
    for (const auto& [pattern, targets] : j.items())
      out.emplace_back(pattern, targets.get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigInvalid, std::string("similar-noise map: ") + e.what());
  }
  return out;
}

std::vector<SceneManifest> build_manifest(const std::string& root, const ManifestOptions& options) {
  const fs::path base(root);
  if (!fs::is_directory(base)) fail(ErrorCode::kIoError, "manifest root is not a directory: " + root);

  std::map<std::string, std::map<std::string, std::vector<std::string>>> pairings;
  const fs::path pairing_file = base / "pairings.json";
  if (fs::exists(pairing_file)) {
    try {
      const json j = json::parse(read_text(pairing_file));
      for (const auto& [split, scenes] : j.items())
        for (const auto& [scene, noise] : scenes.items())
          pairings[split][scene] = noise.get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfigInvalid, pairing_file.string() + ": " + e.what());
    }
  }

  std::vector<SceneManifest> out;
  for (const auto& split_dir : sorted_entries(base, true)) {
    const std::string split = split_dir.filename().string();
    if (!kSplits.count(split))
      fail(ErrorCode::kSplitViolation, "unknown split directory '" + split + "'");
    for (const auto& scene_dir : sorted_entries(split_dir, true)) {
      SceneManifest m;
      m.scene_name = scene_dir.filename().string();
      m.split = split;
      m.scene_type = "indoor";
      const fs::path meta = scene_dir / "scene.json";
      if (fs::exists(meta)) {
        try {
          const json j = json::parse(read_text(meta));
          m.scene_type = j.value("scene_type", m.scene_type);
          if (j.contains("t60_s") && !j["t60_s"].is_null()) m.t60_s = j["t60_s"].get<double>();
          if (j.contains("spl_db") && !j["spl_db"].is_null()) m.spl_db = j["spl_db"].get<double>();
        } catch (const json::exception& e) {
          fail(ErrorCode::kConfigInvalid, meta.string() + ": " + e.what());
        }
        if (!kSceneTypes.count(m.scene_type))
          fail(ErrorCode::kConfigInvalid, meta.string() + ": unknown scene_type '" + m.scene_type + "'");
      }
      for (const char* state : {"static", "moving"}) {
        for (const auto& spk_dir : sorted_entries(scene_dir / state, true)) {
          for (const auto& f : sorted_entries(spk_dir, false)) {
            if (!is_wav(f)) continue;
            m.utterances.push_back({{fs::relative(f, base).generic_string()},
                                    spk_dir.filename().string(), state});
          }
        }
      }
      for (const auto& f : sorted_entries(scene_dir / "noise", false))
        if (is_wav(f)) m.noise_paths.push_back(fs::relative(f, base).generic_string());

      const auto sp = pairings.find(split);
      if (sp != pairings.end() && sp->second.count(m.scene_name)) {
        m.noise_scenes = sp->second.at(m.scene_name);
      } else if (split != "train" && !m.utterances.empty()) {
        if (!m.noise_paths.empty()) {
          m.noise_scenes = {m.scene_name};
        } else {
          for (const auto& [pattern, targets] : options.similar)
            if (wildcard_match(pattern, m.scene_name)) {
              m.noise_scenes = targets;
              break;
            }
        }
      }
      out.push_back(std::move(m));
    }
  }
  validate_manifests(out, options.similar);
  return out;
}

void validate_manifests(const std::vector<SceneManifest>& manifests, const SimilarNoiseMap& similar) {
  std::vector<std::string> problems;
  std::map<std::string, std::set<std::string>> speaker_splits;
  std::set<std::string> noise_scenes;
  for (const auto& m : manifests) {
    if (!kSplits.count(m.split)) problems.push_back(m.scene_name + ": invalid split '" + m.split + "'");
    for (const auto& u : m.utterances) speaker_splits[u.speaker_id].insert(m.split);
    if (!m.noise_paths.empty()) noise_scenes.insert(lower(m.scene_name));
  }
  for (const auto& [speaker, splits] : speaker_splits) {
    if (splits.size() < 2) continue;
    std::string list;
    for (const auto& s : splits) list += (list.empty() ? "" : ", ") + s;
    problems.push_back("speaker " + speaker + " appears in " + list);
  }
  for (const auto& m : manifests) {
    if (m.split == "train" || m.utterances.empty()) continue;
    if (m.noise_scenes.empty())
      problems.push_back(m.split + "/" + m.scene_name + ": no matched noise scene");
    for (const auto& ns : m.noise_scenes) {
      if (lower(ns) != lower(m.scene_name) && !mapping_allows(similar, m.scene_name, ns))
        problems.push_back(m.split + "/" + m.scene_name + ": paired with noise from " + ns +
                           " without a similar-environment mapping");
      else if (!noise_scenes.count(lower(ns)))
        problems.push_back(m.split + "/" + m.scene_name + ": noise scene " + ns + " has no noise recordings");
    }
  }
  if (!problems.empty()) {
    std::string msg = "split rules violated:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorCode::kSplitViolation, msg);
  }
}

std::string manifest_to_json(const SceneManifest& m) {
  json j;
  j["scene_name"] = m.scene_name;
  j["scene_type"] = m.scene_type;
  j["split"] = m.split;
  j["t60_s"] = m.t60_s ? json(*m.t60_s) : json(nullptr);
  j["spl_db"] = m.spl_db ? json(*m.spl_db) : json(nullptr);
  j["utterances"] = json::array();
  for (const auto& u : m.utterances)
    j["utterances"].push_back({{"paths", u.paths}, {"speaker_id", u.speaker_id}, {"state", u.state}});
  j["noise_paths"] = m.noise_paths;
  j["noise_scenes"] = m.noise_scenes;
  return j.dump(2) + "\n";
}

void write_manifests(const std::string& out_dir, const std::vector<SceneManifest>& manifests) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + out_dir + ": " + ec.message());
  json index = {{"train", json::array()}, {"val", json::array()}, {"test", json::array()}};
  for (const auto& m : manifests) {
    const std::string name = m.split + "_" + m.scene_name + ".json";
    std::ofstream out(dir / name);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    out << manifest_to_json(m);
    index[m.split].push_back({{"scene", m.scene_name}, {"file", name}});
  }
  std::ofstream out(dir / "index.json");
  if (!out) fail(ErrorCode::kIoError, "cannot write index.json");
  out << index.dump(2) << "\n";
}

}  // namespace arraykit
