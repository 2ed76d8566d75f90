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

#include "context.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cli {

namespace {

const std::set<std::string> kSections{"measure", "annotate_dp", "annotate_loc", "simulate",
                                      "coherence", "mix", "score", "manifest"};

std::string json_to_option(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) out += (out.empty() ? "" : ",") + json_to_option(e);
    return out;
  }
  return v.dump();
}

double positive_rate(const json& rates, const char* key, double fallback) {
  if (!rates.contains(key)) return fallback;
  const json& v = rates.at(key);
  if (!v.is_number() || !(v.get<double>() > 0))
    config_error(std::string("config.rates.") + key + ": must be a positive number");
  return v.get<double>();
}

}  // namespace

[[noreturn]] void config_error(const std::string& message) {
  throw Failure{kExitConfig, message, "ConfigInvalid"};
}

void check(ak_status status, const char* what) {
  if (status == AK_OK) return;
  const int code = status == AK_ERR_CONFIG_INVALID ? kExitConfig : kExitModule;
  throw Failure{code, std::string(what) + ": " + ak_last_error(), ak_status_name(status)};
}

Signal read_wav(const std::string& path) {
  ak_signal* s = nullptr;
  check(ak_signal_read_wav(path.c_str(), &s), "read_wav");
  return Signal(s);
}

void write_wav(const ak_signal* s, const std::string& path, const std::string& format) {
  check(ak_signal_write_wav(s, path.c_str(), format.c_str()), "write_wav");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{kExitModule, "cannot write " + path.string(), "IoError"};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitModule, "cannot read " + path.string(), "IoError"};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kExitModule, "cannot create " + dir.string() + ": " + ec.message(), "IoError"};
}

void Context::load() {
  if (config_path.empty()) return;
  const fs::path p(config_path);
  if (!fs::is_regular_file(p)) config_error("config file not found: " + config_path);
  config_dir_ = fs::absolute(p).parent_path();
  try {
    config_ = json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    config_error(config_path + ": " + e.what());
  }
  if (!config_.is_object()) config_error(config_path + ": top level must be an object");

  for (const auto& [key, value] : config_.items()) {
    if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        config_error("config.seed: must be a non-negative integer");
      config_seed_ = value.get<std::int64_t>();
    } else if (key == "rates") {
      if (!value.is_object()) config_error("config.rates: must be an object");
      for (const auto& [rk, rv] : value.items())
        if (rk != "record_hz" && rk != "process_hz" && rk != "gcc_hz")
          config_error("config.rates." + rk + ": unknown key");
      rates_.record_hz = positive_rate(value, "record_hz", rates_.record_hz);
      rates_.process_hz = positive_rate(value, "process_hz", rates_.process_hz);
      rates_.gcc_hz = positive_rate(value, "gcc_hz", rates_.gcc_hz);
    } else if (key == "array_geometry" || key == "camera_model") {
      if (!value.is_string()) config_error("config." + key + ": must be a path string");
      fs::path gp(value.get<std::string>());
      if (gp.is_relative()) gp = config_dir_ / gp;
      if (!fs::is_regular_file(gp)) {
        config_error(std::string(key == "array_geometry" ? "array geometry" : "camera model") +
                     " file not found: " + gp.string());
      }
      (key == "array_geometry" ? geometry_ : camera_) = gp.string();
    } else if (kSections.count(key)) {
      if (!value.is_object()) config_error("config." + key + ": must be an object");
    } else {
      config_error("config." + key + ": unknown key");
    }
  }
  for (double r : {rates_.process_hz, rates_.gcc_hz}) {
    const double q = rates_.record_hz / r;
    if (std::abs(q - std::round(q)) > 1e-9)
      config_error("config.rates: record_hz must be an integer multiple of process_hz and gcc_hz");
  }
}

const json& Context::section(const std::string& name) const {
  static const json empty = json::object();
  const auto it = config_.find(name);
  return it == config_.end() ? empty : *it;
}

std::optional<std::int64_t> Context::seed() const { return seed_flag ? seed_flag : config_seed_; }

void Context::log(const std::string& level, const std::string& event, json fields) const {
  if (level == "info" && !verbose) return;
  static std::mutex mu;
  fields["level"] = level;
  fields["event"] = event;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << fields.dump() << "\n";
}

void Context::plan(const std::string& cmd, const std::string& action, const std::string& target) const {
  std::cout << "plan " << cmd << ": " << action << " " << target << "\n";
}

void Params::add(const std::string& name, const std::string& help, std::string fallback, Kind kind) {
  Entry& e = entries_[name];
  e.fallback = std::move(fallback);
  e.kind = kind;
  app_->add_option("--" + name, e.cli_value, help);
}

void Params::flag(const std::string& name, const std::string& help) {
  Entry& e = entries_[name];
  e.is_flag = true;
  app_->add_flag("--" + name, e.flag_value, help);
}

std::string Params::key_of(const std::string& name) {
  std::string k = name;
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

void Params::bind(const Context& ctx) {
  const json& sec = ctx.section(section_);
  std::set<std::string> keys;
  for (const auto& [name, e] : entries_) keys.insert(key_of(name));
  for (const auto& [key, value] : sec.items()) {
    const bool known = keys.count(key) ||
                       std::find(extra_keys_.begin(), extra_keys_.end(), key) != extra_keys_.end();
    if (!known) config_error("config." + where(key) + ": unknown key");
  }
  for (auto& [name, e] : entries_) {
    const bool on_cli = app_->count("--" + name) > 0;
    const std::string key = key_of(name);
    if (e.is_flag) {
      if (on_cli) {
        e.resolved = e.flag_value ? "true" : "false";
      } else if (sec.contains(key)) {
        if (!sec.at(key).is_boolean()) config_error("config." + where(name) + ": must be a boolean");
        e.resolved = sec.at(key).get<bool>() ? "true" : "false";
      } else {
        e.resolved = "false";
      }
      continue;
    }
    if (on_cli) {
      e.resolved = e.cli_value;
    } else if (sec.contains(key) && sec.at(key).is_object()) {
      e.resolved = sec.at(key).dump();  // inline JSON document
      continue;
    } else if (sec.contains(key)) {
      std::string v = json_to_option(sec.at(key));
      if (e.kind != Kind::kValue && !v.empty() && fs::path(v).is_relative())
        v = (ctx.config_dir() / v).lexically_normal().string();
      e.resolved = v;
    } else if (!e.fallback.empty()) {
      e.resolved = e.fallback;
    }
    if (e.kind == Kind::kInput && e.resolved && !fs::exists(*e.resolved))
      config_error("input not found: " + *e.resolved + " (" + where(name) + ")");
  }
}

bool Params::has(const std::string& name) const {
  const auto it = entries_.find(name);
  return it != entries_.end() && it->second.resolved.has_value() &&
         !(it->second.is_flag && *it->second.resolved == "false");
}

std::string Params::str(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end() || !it->second.resolved)
    config_error("missing required option --" + name + " (or config." + where(name) + ")");
  return *it->second.resolved;
}

double Params::num(const std::string& name) const {
  const std::string s = str(name);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    config_error(where(name) + ": expected a number, got '" + s + "'");
  }
}

long Params::integer(const std::string& name) const {
  const std::string s = str(name);
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    config_error(where(name) + ": expected an integer, got '" + s + "'");
  }
}

bool Params::boolean(const std::string& name) const { return has(name) && str(name) == "true"; }

std::vector<long> Params::int_list(const std::string& name) const {
  std::vector<long> out;
  std::stringstream ss(str(name));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      config_error(where(name) + ": expected comma-separated integers, got '" + str(name) + "'");
    }
  }
  return out;
}

void run_jobs(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::size_t first_index = count;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < first_index) {
            first_index = i;
            first = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::vector<std::string>& header) {
  std::stringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      header = cells;
      first = false;
    } else {
      rows.push_back(std::move(cells));
    }
  }
  return rows;
}

}  // namespace cli
