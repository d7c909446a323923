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

#include "run_context.h"

#include <ctime>

#include "adsorbxai/csv.h"
#include "adsorbxai/digest.h"
#include "adsorbxai/elements.h"
#include "adsorbxai/error.h"

#ifndef ADSORBXAI_VERSION
#define ADSORBXAI_VERSION "0.0.0"
#endif

namespace adsorbxai::cli {

json ConfigSchema::Resolve(const json& file_config) const {
  json resolved = defaults_;
  if (!file_config.is_null()) {
    if (!file_config.is_object()) {
      throw Error(ErrorCode::kInvalidArgument, "config file must hold a JSON object");
    }
    for (const auto& [key, value] : file_config.items()) {
      if (!defaults_.contains(key)) {
        throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
      }
      resolved[key] = value;
    }
  }
  for (const auto& apply : overrides_) apply(resolved);
  return resolved;
}

void AddCommonOptions(CLI::App* app, CommonOptions& options) {
  app->add_option("--out", options.out, "Artifact directory")->required();
  app->add_option("--config", options.config, "JSON config file or run manifest");
  app->add_flag("--verbose", options.verbose, "Print warnings and progress");
}

json LoadConfigFile(const std::string& path) {
  if (path.empty()) return nullptr;
  json doc;
  try {
    doc = json::parse(csv::ReadFile(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("tool")) return doc["config"];
  return doc;
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> command_line)
    : command_(std::move(command)),
      command_line_(std::move(command_line)),
      started_at_(UtcTimestamp()) {}

void RunManifest::AddInput(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", Sha256File(path)}});
}

void RunManifest::Write(const std::filesystem::path& out_dir) const {
  json doc = {
      {"tool", "adsorbxai"},
      {"version", ADSORBXAI_VERSION},
      {"command", command_},
      {"command_line", command_line_},
      {"config", config_},
      {"seeds", seeds_},
      {"assets",
       {{"elements", {{"version", std::string(kElementTableVersion)}, {"checksum", ElementTableChecksum()}}}}},
      {"inputs", inputs_},
      {"outputs", outputs_},
      {"started_at", started_at_},
      {"finished_at", UtcTimestamp()},
  };
  if (!extra_.empty()) doc["details"] = extra_;
  csv::WriteFile(out_dir / "manifest.json", doc.dump(2) + "\n");
}

void WriteArtifact(const std::filesystem::path& out_dir, const std::string& relative,
                   std::string_view contents, RunManifest& manifest) {
  const std::filesystem::path target = out_dir / relative;
  std::filesystem::create_directories(target.parent_path());
  csv::WriteFile(target, contents);
  manifest.AddOutput(relative);
}

}  // namespace adsorbxai::cli
