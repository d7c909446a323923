/*
 * Copyright 2026 The adsorbxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Configuration resolution and run manifests shared by the subcommands.

#ifndef ADSORBXAI_TOOLS_RUN_CONTEXT_H_
#define ADSORBXAI_TOOLS_RUN_CONTEXT_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace adsorbxai::cli {

using nlohmann::json;

// Collects the options of one subcommand. Every option has a config key and a
// default; Resolve() layers defaults < config file < explicitly passed flags.
class ConfigSchema {
 public:
  explicit ConfigSchema(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* Option(const std::string& flag, const std::string& key, T default_value,
                      const std::string& help) {
    auto storage = std::make_shared<T>(default_value);
    defaults_[key] = default_value;
    CLI::Option* opt = app_->add_option(flag, *storage, help);
    overrides_.push_back([opt, storage, key](json& j) {
      if (opt->count() > 0) j[key] = *storage;
    });
    return opt;
  }

  CLI::Option* Flag(const std::string& flag, const std::string& key, const std::string& help) {
    auto storage = std::make_shared<bool>(false);
    defaults_[key] = false;
    CLI::Option* opt = app_->add_flag(flag, *storage, help);
    overrides_.push_back([opt, storage, key](json& j) {
      if (opt->count() > 0) j[key] = *storage;
    });
    return opt;
  }

  // Unknown keys in `file_config` are rejected.
  json Resolve(const json& file_config) const;

 private:
  CLI::App* app_;
  json defaults_ = json::object();
  std::vector<std::function<void(json&)>> overrides_;
};

struct CommonOptions {
  std::string out;
  std::string config;
  unsigned workers = 1;
  bool verbose = false;
};

void AddCommonOptions(CLI::App* app, CommonOptions& options);

// Reads a flat JSON object, or the "config" member of a run manifest.
json LoadConfigFile(const std::string& path);

class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> command_line);

  void SetConfig(json config) { config_ = std::move(config); }
  void AddSeed(const std::string& name, uint64_t seed) { seeds_[name] = seed; }
  void AddInput(const std::filesystem::path& path);
  void AddOutput(const std::string& relative) { outputs_.push_back(relative); }
  json& extra() { return extra_; }

  void Write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  std::vector<std::string> command_line_;
  json config_ = json::object();
  json seeds_ = json::object();
  json inputs_ = json::array();
  json extra_ = json::object();
  std::vector<std::string> outputs_;
  std::string started_at_;
};

// Writes `contents` to out_dir/relative and records it in the manifest.
void WriteArtifact(const std::filesystem::path& out_dir, const std::string& relative,
                   std::string_view contents, RunManifest& manifest);

std::string UtcTimestamp();

}  // namespace adsorbxai::cli

#endif  // ADSORBXAI_TOOLS_RUN_CONTEXT_H_
