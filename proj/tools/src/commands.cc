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

#include "commands.h"

#include <algorithm>
#include <iostream>
#include <map>

#include "adsorbxai/csv.h"
#include "adsorbxai/dataset.h"
#include "adsorbxai/error.h"
#include "adsorbxai/featurize.h"
#include "adsorbxai/models.h"
#include "adsorbxai/shapley.h"
#include "adsorbxai/structio.h"
#include "adsorbxai/symreg.h"

namespace adsorbxai::cli {
namespace {

namespace fs = std::filesystem;

void PrintWarnings(const Invocation& inv, const std::vector<std::string>& warnings) {
  if (!inv.common.verbose) return;
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

TabularDataset LoadFeatures(const std::string& path, RunManifest& manifest) {
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "--features is required");
  manifest.AddInput(path);
  return ParseDatasetCsv(csv::ReadFile(path));
}

RunManifest StartManifest(const Invocation& inv, const std::string& command) {
  RunManifest manifest(command, inv.argv);
  manifest.SetConfig(inv.resolved);
  fs::create_directories(inv.common.out);
  return manifest;
}

unsigned Workers(const json& cfg) { return cfg.at("workers").get<unsigned>(); }

}  // namespace

int RunExtract(const Invocation& inv) {
  const json& cfg = inv.resolved;
  RunManifest manifest = StartManifest(inv, "extract");
  const auto inputs = cfg.at("input").get<std::vector<std::string>>();
  if (inputs.empty()) throw Error(ErrorCode::kInvalidArgument, "--input is required");
  const auto rule = ParseSubsetRule(cfg.at("filter").get<std::string>());
  if (!rule) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown filter '" + cfg.at("filter").get<std::string>() + "'");
  }

  Diagnostics diag;
  std::vector<SystemRecord> records;
  for (const std::string& path : inputs) {
    manifest.AddInput(path);
    auto parsed = ParseStructureFile(path, FormatFromPath(path), &diag);
    records.insert(records.end(), std::make_move_iterator(parsed.begin()),
                   std::make_move_iterator(parsed.end()));
  }
  std::map<std::string, int> seen;
  for (const SystemRecord& r : records) {
    if (++seen[r.metadata.system_id] > 1) {
      throw Error(ErrorCode::kDuplicateSystemId,
                  "system_id '" + r.metadata.system_id + "' appears in more than one input");
    }
  }
  const std::vector<SystemRecord> kept = FilterSubset(records, *rule, &diag);
  PrintWarnings(inv, diag.warnings);
  if (kept.empty()) throw Error(ErrorCode::kEmptyDataset, "no records passed the filter");

  const FeaturizationResult result =
      FeaturizeDataset(kept, cfg.at("bond_scale").get<double>(), Workers(cfg));
  WriteArtifact(inv.common.out, "features.csv", WriteDatasetCsv(result.dataset), manifest);
  WriteArtifact(inv.common.out, "drop_report.csv", WriteDropReportCsv(result.dropped), manifest);
  manifest.extra()["records_read"] = records.size();
  manifest.extra()["records_after_filter"] = kept.size();
  manifest.extra()["rows_written"] = result.dataset.size();
  manifest.extra()["rows_dropped"] = result.dropped.size();
  manifest.extra()["degenerate_geometry_ids"] = result.degenerate_geometry_ids;
  manifest.Write(inv.common.out);
  std::cout << "kept " << result.dataset.size() << " rows, dropped " << result.dropped.size()
            << " (" << records.size() - kept.size() << " removed by filter "
            << SubsetRuleName(*rule) << ")\n";
  return 0;
}

int RunTrain(const Invocation& inv) {
  const json& cfg = inv.resolved;
  RunManifest manifest = StartManifest(inv, "train");
  const TabularDataset dataset = LoadFeatures(cfg.at("features").get<std::string>(), manifest);
  const auto seed = cfg.at("seed").get<uint64_t>();
  manifest.AddSeed("split", seed);
  manifest.AddSeed("model", seed);

  std::vector<ModelSpec> specs;
  for (const std::string& text : cfg.at("models").get<std::vector<std::string>>()) {
    specs.push_back(ModelSpec::Parse(text, seed));
  }
  if (specs.empty()) throw Error(ErrorCode::kInvalidArgument, "no models requested");

  SplitSpec split;
  split.train_fraction = cfg.at("train_fraction").get<double>();
  split.seed = seed;
  BenchmarkOptions bench;
  bench.vary_model_seed = cfg.at("vary_model_seed").get<bool>();
  bench.fit.workers = Workers(cfg);
  const std::vector<BenchmarkRow> rows =
      RunBenchmark(dataset, specs, split, cfg.at("repeats").get<int>(), bench);
  WriteArtifact(inv.common.out, "benchmark.csv", WriteBenchmarkCsv(rows), manifest);

  const auto [train, test] = Split(dataset, split);
  std::map<std::string, int> used;
  for (const ModelSpec& spec : specs) {
    TrainedModel model = Fit(spec, train, bench.fit);
    PrintWarnings(inv, model.warnings());
    const double mae = MeanAbsoluteError(model.Predict(test.rows), test.labels);
    auto& a = model.annotations();
    a["split_seed"] = std::to_string(seed);
    a["train_fraction"] = csv::FormatDouble(split.train_fraction);
    a["shuffle"] = "1";
    a["dataset_fingerprint"] = DatasetFingerprint(dataset);
    a["test_mae"] = csv::FormatDouble(mae);
    std::string name(ModelKindName(spec.kind()));
    if (const int n = ++used[name]; n > 1) name += "-" + std::to_string(n);
    WriteArtifact(inv.common.out, "models/" + name + ".json", SaveModelJson(model), manifest);
  }
  manifest.Write(inv.common.out);
  for (const BenchmarkRow& r : rows) {
    std::cout << r.model << "  MAE " << r.mean_mae << " +/- " << r.std_mae << "\n";
  }
  return 0;
}

int RunExplain(const Invocation& inv) {
  const json& cfg = inv.resolved;
  RunManifest manifest = StartManifest(inv, "explain");
  const std::string model_path = cfg.at("model").get<std::string>();
  if (model_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--model is required");
  manifest.AddInput(model_path);
  const TrainedModel model = LoadModelJson(csv::ReadFile(model_path));
  const TabularDataset dataset = LoadFeatures(cfg.at("features").get<std::string>(), manifest);
  if (dataset.feature_names != model.feature_names()) {
    throw Error(ErrorCode::kArityMismatch, "feature columns differ from the model's");
  }

  // The split defaults to the one recorded when the model was trained.
  SplitSpec split;
  const auto& notes = model.annotations();
  const int64_t split_seed = cfg.at("split_seed").get<int64_t>();
  split.seed = split_seed >= 0 ? static_cast<uint64_t>(split_seed)
               : notes.contains("split_seed") ? std::stoull(notes.at("split_seed"))
                                              : 0;
  const double fraction = cfg.at("train_fraction").get<double>();
  split.train_fraction = fraction > 0.0 ? fraction
                         : notes.contains("train_fraction") ? std::stod(notes.at("train_fraction"))
                                                            : 0.8;
  const auto [train, test] = Split(dataset, split);
  const std::string rows_choice = cfg.at("rows").get<std::string>();
  if (rows_choice != "test" && rows_choice != "all") {
    throw Error(ErrorCode::kInvalidArgument, "--rows must be test or all");
  }
  const TabularDataset& queries = rows_choice == "all" ? dataset : test;
  manifest.AddSeed("split", split.seed);

  const std::string mode = cfg.at("mode").get<std::string>();
  ShapleyReport report;
  if (mode == "marginal") {
    const auto bg_seed = cfg.at("background_seed").get<uint64_t>();
    manifest.AddSeed("background", bg_seed);
    const Eigen::MatrixXd background =
        SelectBackground(train.rows, cfg.at("background_cap").get<std::size_t>(), bg_seed);
    MarginalOptions opts;
    opts.workers = Workers(cfg);
    report = ShapleyMarginal(model, queries.rows, background, opts);
  } else if (mode == "retrain") {
    if (model.spec().seed()) manifest.AddSeed("model", *model.spec().seed());
    RetrainOptions opts;
    opts.fit.workers = Workers(cfg);
    opts.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % std::max<std::size_t>(1, total / 10) == 0) {
        std::cerr << "retrain: " << done << "/" << total << " subset fits\n";
      }
    };
    RetrainExplainer explainer(model.spec(), train, opts);
    report = explainer.Explain(queries.rows);
    manifest.extra()["subset_models"] = explainer.cached_models();
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--mode must be marginal or retrain");
  }
  report.system_ids = queries.system_ids;
  manifest.extra()["mode"] = mode;
  manifest.extra()["background_size"] = report.background_size;
  manifest.extra()["base_value"] = report.base_value;

  const std::vector<BeeswarmRow> swarm = BeeswarmExport(report, queries);
  const auto& out = inv.common.out;
  WriteArtifact(out, "attribution.csv", WriteAttributionCsv(report, swarm), manifest);
  WriteArtifact(out, "predictions.csv", WritePredictionsCsv(report), manifest);
  WriteArtifact(out, "importance.csv", WriteImportanceCsv(ComputeGlobalImportance(report)),
                manifest);
  WriteArtifact(out, "beeswarm.csv", WriteBeeswarmCsv(swarm), manifest);
  WriteArtifact(out, "correlation.csv",
                WriteCorrelationCsv(dataset.feature_names, CorrelationMatrix(dataset)), manifest);
  const auto scatter_cols = cfg.at("scatter").get<std::vector<std::string>>();
  if (scatter_cols.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "--scatter takes exactly three feature names");
  }
  WriteArtifact(out, "scatter.csv",
                WriteScatterCsv(ScatterExport(dataset, scatter_cols[0], scatter_cols[1],
                                              scatter_cols[2])),
                manifest);
  manifest.Write(out);
  std::cout << "explained " << report.size() << " rows in " << mode << " mode\n";
  return 0;
}

int RunSr(const Invocation& inv) {
  const json& cfg = inv.resolved;
  RunManifest manifest = StartManifest(inv, "sr");
  const TabularDataset full = LoadFeatures(cfg.at("features").get<std::string>(), manifest);

  TabularDataset data = full;
  const auto columns = cfg.at("columns").get<std::vector<std::string>>();
  if (!columns.empty()) {
    std::vector<std::size_t> idx;
    for (const std::string& c : columns) idx.push_back(full.RequireFeature(c));
    data = full.SelectColumns(idx);
  }

  SearchConfig sc;
  sc.iterations = cfg.at("iterations").get<int>();
  sc.populations = cfg.at("populations").get<int>();
  sc.population_size = cfg.at("population_size").get<int>();
  sc.max_complexity = cfg.at("max_complexity").get<int>();
  sc.tournament_size = cfg.at("tournament_size").get<int>();
  sc.migration_fraction = cfg.at("migration_fraction").get<double>();
  sc.constant_opt_interval = cfg.at("constant_opt_interval").get<int>();
  sc.seed = cfg.at("seed").get<uint64_t>();
  sc.workers = Workers(cfg);
  for (const std::string& name : cfg.at("unary_ops").get<std::vector<std::string>>()) {
    const auto op = ParseUnaryOp(name);
    if (!op) throw Error(ErrorCode::kInvalidArgument, "unknown unary operator '" + name + "'");
    sc.unary_ops.push_back(*op);
  }
  manifest.AddSeed("search", sc.seed);

  const SearchResult result = Search(data, sc);
  std::optional<ReferenceRow> reference;
  if (full.FeatureIndex("formation_energy") && full.FeatureIndex("chi_cat") &&
      full.FeatureIndex("chi_ads")) {
    reference = EvaluateReferenceEquation(full);
    manifest.extra()["reference_mae"] = reference->loss;
  }
  std::string telemetry;
  for (const std::string& line : result.telemetry) telemetry += line + "\n";
  WriteArtifact(inv.common.out, "front.csv", WriteFrontCsv(result.front, reference), manifest);
  WriteArtifact(inv.common.out, "telemetry.jsonl", telemetry, manifest);
  manifest.extra()["generations"] = result.generations;
  manifest.extra()["dataset_fingerprint"] = result.front.dataset_fingerprint;
  manifest.Write(inv.common.out);
  for (const FrontEntry& e : result.front.entries) {
    std::cout << e.complexity << "  " << e.loss << "  "
              << PrintExpression(e.expression, result.front.variables) << "\n";
  }
  if (reference) std::cout << "reference  " << reference->loss << "\n";
  return 0;
}

}  // namespace adsorbxai::cli
