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

#include <iostream>

#include "adsorbxai/error.h"
#include "adsorbxai/models.h"
#include "commands.h"
#include "run_context.h"

using adsorbxai::cli::ConfigSchema;
using adsorbxai::cli::Invocation;

namespace {

std::vector<std::string> DefaultModels() {
  std::vector<std::string> names;
  for (auto kind : adsorbxai::AllModelKinds()) names.emplace_back(adsorbxai::ModelKindName(kind));
  return names;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adsorption-energy descriptors, regressors, Shapley attribution and symbolic search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ADSORBXAI_VERSION);

  Invocation inv;
  for (int i = 0; i < argc; ++i) inv.argv.emplace_back(argv[i]);

  CLI::App* extract = app.add_subcommand("extract", "Parse structures and write the feature table");
  ConfigSchema extract_cfg(extract);
  extract_cfg.Option("--input", "input", std::vector<std::string>{}, "Structure files (.xyz/.extxyz/.json)");
  extract_cfg.Option("--filter", "filter", std::string("all"), "Subset rule: all, ohc1, h-metal");
  extract_cfg.Option("--bond-scale", "bond_scale", 1.25, "Neighbor cutoff as a multiple of r_i + r_j");
  extract_cfg.Option("--workers", "workers", 1u, "Worker threads (0 = all cores)");

  CLI::App* train = app.add_subcommand("train", "Benchmark regressors and save fitted models");
  ConfigSchema train_cfg(train);
  train_cfg.Option("--features", "features", std::string(), "Feature CSV");
  train_cfg.Option("--models", "models", DefaultModels(), "Model specs, e.g. random_forest:n_estimators=50");
  train_cfg.Option("--seed", "seed", uint64_t{0}, "Split and model seed");
  train_cfg.Option("--repeats", "repeats", 5, "Benchmark repeats");
  train_cfg.Option("--train-fraction", "train_fraction", 0.8, "Training share of each split");
  train_cfg.Flag("--vary-model-seed", "vary_model_seed", "Keep the split fixed and vary the model seed");
  train_cfg.Option("--workers", "workers", 1u, "Worker threads (0 = all cores)");

  CLI::App* explain = app.add_subcommand("explain", "Shapley attribution for a saved model");
  ConfigSchema explain_cfg(explain);
  explain_cfg.Option("--model", "model", std::string(), "Saved model JSON");
  explain_cfg.Option("--features", "features", std::string(), "Feature CSV");
  explain_cfg.Option("--mode", "mode", std::string("marginal"), "marginal or retrain");
  explain_cfg.Option("--rows", "rows", std::string("test"), "Rows to explain: test or all");
  explain_cfg.Option("--background-cap", "background_cap", std::size_t{256}, "Marginal-mode background rows");
  explain_cfg.Option("--background-seed", "background_seed", uint64_t{0}, "Background subsampling seed");
  explain_cfg.Option("--split-seed", "split_seed", int64_t{-1}, "Split seed (-1 = from the model)");
  explain_cfg.Option("--train-fraction", "train_fraction", 0.0, "Training share (0 = from the model)");
  explain_cfg.Option("--scatter", "scatter", std::vector<std::string>{"chi_cat", "chi_local", "chi_ads"},
                     "x, y and color features for scatter.csv");
  explain_cfg.Option("--workers", "workers", 1u, "Worker threads (0 = all cores)");

  CLI::App* sr = app.add_subcommand("sr", "Symbolic regression over the feature table");
  ConfigSchema sr_cfg(sr);
  sr_cfg.Option("--features", "features", std::string(), "Feature CSV");
  sr_cfg.Option("--columns", "columns", std::vector<std::string>{}, "Restrict input variables");
  sr_cfg.Option("--iterations", "iterations", 5000, "Generations summed over populations");
  sr_cfg.Option("--seed", "seed", uint64_t{0}, "Search seed");
  sr_cfg.Option("--populations", "populations", 15, "Number of populations");
  sr_cfg.Option("--population-size", "population_size", 33, "Individuals per population");
  sr_cfg.Option("--max-complexity", "max_complexity", 30, "Node-count limit");
  sr_cfg.Option("--tournament-size", "tournament_size", 10, "Tournament size");
  sr_cfg.Option("--migration-fraction", "migration_fraction", 0.05, "Share migrated per round");
  sr_cfg.Option("--constant-opt-interval", "constant_opt_interval", 25, "Generations between constant fits");
  sr_cfg.Option("--unary-ops", "unary_ops", std::vector<std::string>{}, "Unary operators: neg square sqrt exp log");
  sr_cfg.Option("--workers", "workers", 1u, "Worker threads (0 = all cores)");

  for (CLI::App* sub : {extract, train, explain, sr}) {
    adsorbxai::cli::AddCommonOptions(sub, inv.common);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const nlohmann::json file_cfg = adsorbxai::cli::LoadConfigFile(inv.common.config);
    if (extract->parsed()) {
      inv.resolved = extract_cfg.Resolve(file_cfg);
      return adsorbxai::cli::RunExtract(inv);
    }
    if (train->parsed()) {
      inv.resolved = train_cfg.Resolve(file_cfg);
      return adsorbxai::cli::RunTrain(inv);
    }
    if (explain->parsed()) {
      inv.resolved = explain_cfg.Resolve(file_cfg);
      return adsorbxai::cli::RunExplain(inv);
    }
    inv.resolved = sr_cfg.Resolve(file_cfg);
    return adsorbxai::cli::RunSr(inv);
  } catch (const adsorbxai::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
