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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "arraykit/arraykit.h"

namespace cli {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitModule = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiscarded = 3;

// Carries the exit status out of a subcommand.
struct Failure {
  int exit_code;
  std::string message;
  std::string status;  // ak_status name, empty for CLI-level problems
};

[[noreturn]] void config_error(const std::string& message);
// Throws Failure for any status other than AK_OK.
void check(ak_status status, const char* what);

struct SignalDeleter {
  void operator()(ak_signal* s) const { ak_signal_free(s); }
};
using Signal = std::unique_ptr<ak_signal, SignalDeleter>;

struct CString {
  char* p = nullptr;
  CString() = default;
  CString(const CString&) = delete;
  CString& operator=(const CString&) = delete;
  ~CString() { ak_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

Signal read_wav(const std::string& path);
void write_wav(const ak_signal* s, const std::string& path, const std::string& format = "float32");
std::string fmt(double v);  // %.10g
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void ensure_dir(const fs::path& dir);

struct Rates {
  double record_hz = 48000.0;
  double process_hz = 16000.0;
  double gcc_hz = 8000.0;
};

// Global options and the parsed configuration file.
class Context {
 public:
  std::string config_path;
  std::optional<std::int64_t> seed_flag;
  int jobs = 1;
  bool dry_run = false;
  bool verbose = false;

  void load();  // reads and validates config_path
  const json& section(const std::string& name) const;
  fs::path config_dir() const { return config_dir_; }
  std::optional<std::int64_t> seed() const;
  const Rates& rates() const { return rates_; }
  std::optional<std::string> geometry_path() const { return geometry_; }
  std::optional<std::string> camera_path() const { return camera_; }

  void log(const std::string& level, const std::string& event, json fields = json::object()) const;
  void plan(const std::string& cmd, const std::string& action, const std::string& target) const;

 private:
  json config_ = json::object();
  fs::path config_dir_ = fs::current_path();
  std::optional<std::int64_t> config_seed_;
  Rates rates_;
  std::optional<std::string> geometry_;
  std::optional<std::string> camera_;
};

// Subcommand options that fall back to the matching config section.
class Params {
 public:
  enum class Kind { kValue, kInput, kOutput };

  Params(CLI::App* app, std::string section) : app_(app), section_(std::move(section)) {}

  void add(const std::string& name, const std::string& help, std::string fallback = "",
           Kind kind = Kind::kValue);
  void flag(const std::string& name, const std::string& help);
  // Extra config keys accepted in the section without a command-line option.
  void allow_key(const std::string& key) { extra_keys_.push_back(key); }

  // Resolves every option against the config; checks inputs exist.
  void bind(const Context& ctx);

  bool has(const std::string& name) const;
  std::string str(const std::string& name) const;
  double num(const std::string& name) const;
  long integer(const std::string& name) const;
  bool boolean(const std::string& name) const;
  std::vector<long> int_list(const std::string& name) const;
  const std::string& section() const { return section_; }

 private:
  struct Entry {
    std::string cli_value;
    std::string fallback;
    Kind kind = Kind::kValue;
    bool is_flag = false;
    bool flag_value = false;
    std::optional<std::string> resolved;
  };
  static std::string key_of(const std::string& name);
  std::string where(const std::string& name) const { return section_ + "." + key_of(name); }

  CLI::App* app_;
  std::string section_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> extra_keys_;
};

// Runs fn(0..count-1) on up to `jobs` threads; the first failure is rethrown.
void run_jobs(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn);

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::vector<std::string>& header);

}  // namespace cli
