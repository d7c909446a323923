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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>

#include "adsorbxai/csv.h"
#include "adsorbxai/digest.h"
#include "adsorbxai/models.h"
#include "adsorbxai/symreg.h"
#include "cli_support.h"
#include "test_support.h"

namespace adsorbxai {
namespace {

using nlohmann::json;
using testing::ArtifactFiles;
using testing::RunCli;
using testing::ScratchDir;
namespace fs = std::filesystem;

std::vector<std::vector<std::string>> ReadCsv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : csv::Lines(csv::ReadFile(path))) rows.push_back(csv::SplitRow(line));
  return rows;
}

fs::path WriteSyntheticFeatures(const fs::path& dir, std::size_t n = 120) {
  const fs::path path = dir / "features.csv";
  csv::WriteFile(path, WriteDatasetCsv(testing::SyntheticFeatureTable(n, 77)));
  return path;
}

#define ASSERT_CLI_OK(result) \
  ASSERT_EQ((result).exit_code, 0) << (result).out << (result).err

TEST(CliExtract, HydrogenOnMetalFilter) {
  const fs::path dir = ScratchDir("extract-h");
  const auto r = RunCli({"extract", "--input", testing::DataPath("fixtures.extxyz"), "--filter",
                         "h-metal", "--out", (dir / "a").string()});
  ASSERT_CLI_OK(r);
  const auto rows = ReadCsv(dir / "a/features.csv");
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NE(rows[i][0].find("-H-"), std::string::npos) << rows[i][0];
    EXPECT_EQ(rows[i][0].rfind("CuO", 0), std::string::npos) << rows[i][0];
    EXPECT_EQ(rows[i][2], "1");  // n_ads_atoms
  }
  EXPECT_NE(r.out.find("kept 8"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "a/drop_report.csv"));
  EXPECT_TRUE(fs::exists(dir / "a/manifest.json"));
}

TEST(CliExtract, DeterministicAndInputsUntouched) {
  const fs::path dir = ScratchDir("extract-det");
  const std::string xyz = testing::DataPath("fixtures.extxyz");
  const std::string before = Sha256File(xyz);
  ASSERT_CLI_OK(RunCli({"extract", "--input", xyz, "--out", (dir / "a").string()}));
  ASSERT_CLI_OK(RunCli({"extract", "--input", xyz, "--workers", "3", "--out",
                        (dir / "b").string()}));
  EXPECT_EQ(ArtifactFiles(dir / "a"), ArtifactFiles(dir / "b"));
  EXPECT_EQ(Sha256File(xyz), before);
  const json manifest = json::parse(csv::ReadFile(dir / "a/manifest.json"));
  EXPECT_EQ(manifest.at("command"), "extract");
  EXPECT_EQ(manifest.at("inputs")[0].at("sha256"), before);
  EXPECT_EQ(manifest.at("assets").at("elements").at("version"), "elements-2026.1");
}

TEST(CliExtract, ErrorsExitNonzero) {
  const fs::path dir = ScratchDir("extract-err");
  const auto missing = RunCli({"extract", "--input", "/no/such/file.extxyz", "--out",
                               (dir / "a").string()});
  EXPECT_NE(missing.exit_code, 0);
  EXPECT_NE(missing.err.find("error:"), std::string::npos);
  const auto bad_filter = RunCli({"extract", "--input", testing::DataPath("fixtures.json"),
                                  "--filter", "c2", "--out", (dir / "b").string()});
  EXPECT_NE(bad_filter.exit_code, 0);
  EXPECT_FALSE(fs::exists(dir / "b/manifest.json"));
}

TEST(CliTrain, SingleLassoRow) {
  const fs::path dir = ScratchDir("train-lasso");
  const fs::path features = WriteSyntheticFeatures(dir);
  ASSERT_CLI_OK(RunCli({"train", "--features", features.string(), "--models",
                        "lasso:lambda=0.01", "--repeats", "1", "--out", (dir / "a").string()}));
  const auto rows = ReadCsv(dir / "a/benchmark.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"model", "mean_mae", "std_mae", "repeats", "seed"}));
  EXPECT_EQ(rows[1][3], "1");
  EXPECT_TRUE(fs::exists(dir / "a/models/lasso.json"));
}

TEST(CliTrain, SortedTableAndReloadableModels) {
  const fs::path dir = ScratchDir("train-all");
  const fs::path features = WriteSyntheticFeatures(dir);
  const std::vector<std::string> specs = {"decision_tree:max_depth=4", "random_forest:n_estimators=8",
                                          "gradient_boosting:n_estimators=30", "kernel_ridge"};
  std::vector<std::string> args = {"train", "--features", features.string(), "--repeats", "2",
                                   "--seed", "5", "--out", (dir / "a").string(), "--models"};
  args.insert(args.end(), specs.begin(), specs.end());
  ASSERT_CLI_OK(RunCli(args));
  const auto rows = ReadCsv(dir / "a/benchmark.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_LE(std::stod(rows[i - 1][1]), std::stod(rows[i][1]));
  }
  // Refit in-process on the recorded split and compare with the saved model.
  const TabularDataset data = ParseDatasetCsv(csv::ReadFile(features));
  for (const char* name : {"decision_tree", "random_forest", "gradient_boosting", "kernel_ridge"}) {
    const auto loaded = LoadModelJson(csv::ReadFile(dir / "a/models" / (std::string(name) + ".json")));
    SplitSpec split;
    split.seed = std::stoull(loaded.annotations().at("split_seed"));
    split.train_fraction = std::stod(loaded.annotations().at("train_fraction"));
    const auto [train, test] = Split(data, split);
    const auto refit = Fit(loaded.spec(), train);
    const Eigen::VectorXd a = loaded.Predict(test.rows);
    const Eigen::VectorXd b = refit.Predict(test.rows);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12) << name;
    EXPECT_EQ(loaded.annotations().at("dataset_fingerprint"), DatasetFingerprint(data));
  }
}

class CliExplain : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(ScratchDir("explain"));
    features_ = new fs::path(WriteSyntheticFeatures(*dir_, 60));
    const auto r = RunCli({"train", "--features", features_->string(), "--models",
                           "gradient_boosting:n_estimators=20", "decision_tree:max_depth=4",
                           "--repeats", "1", "--seed", "3", "--out", (*dir_ / "train").string()});
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
    delete features_;
  }
  static std::string Model(const std::string& kind) {
    return (*dir_ / "train/models" / (kind + ".json")).string();
  }
  static fs::path* dir_;
  static fs::path* features_;
};
fs::path* CliExplain::dir_ = nullptr;
fs::path* CliExplain::features_ = nullptr;

TEST_F(CliExplain, MarginalEfficiencyFromEmittedCsv) {
  const fs::path out = *dir_ / "marginal";
  ASSERT_CLI_OK(RunCli({"explain", "--model", Model("gradient_boosting"), "--features",
                        features_->string(), "--background-cap", "16", "--out", out.string()}));
  std::map<std::string, double> sums;
  std::map<std::string, double> base;
  const auto attribution = ReadCsv(out / "attribution.csv");
  ASSERT_EQ(attribution[0], (std::vector<std::string>{"system_id", "feature", "phi",
                                                      "feature_value", "value_norm", "mode",
                                                      "base_value"}));
  for (std::size_t i = 1; i < attribution.size(); ++i) {
    sums[attribution[i][0]] += std::stod(attribution[i][2]);
    base[attribution[i][0]] = std::stod(attribution[i][6]);
    EXPECT_EQ(attribution[i][5], "marginal");
  }
  const auto predictions = ReadCsv(out / "predictions.csv");
  ASSERT_EQ(predictions.size(), 13u);  // 12 test rows of 60
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    const std::string& id = predictions[i][0];
    EXPECT_NEAR(base.at(id) + sums.at(id), std::stod(predictions[i][1]), 1e-8) << id;
  }
  EXPECT_EQ(ReadCsv(out / "importance.csv").size(), 14u);
  EXPECT_EQ(ReadCsv(out / "correlation.csv").size(), 14u);
  EXPECT_EQ(ReadCsv(out / "beeswarm.csv").size(), 1u + 13u * 12u);
  EXPECT_EQ(ReadCsv(out / "scatter.csv")[0],
            (std::vector<std::string>{"system_id", "chi_cat", "chi_local", "chi_ads"}));
}

TEST_F(CliExplain, WorkersDoNotChangeOutputs) {
  for (const char* workers : {"1", "4"}) {
    ASSERT_CLI_OK(RunCli({"explain", "--model", Model("decision_tree"), "--features",
                          features_->string(), "--background-cap", "12", "--workers", workers,
                          "--out", (*dir_ / (std::string("w") + workers)).string()}));
  }
  EXPECT_EQ(ArtifactFiles(*dir_ / "w1"), ArtifactFiles(*dir_ / "w4"));
}

TEST_F(CliExplain, RetrainAllSubsetsWithProgress) {
  const fs::path out = *dir_ / "retrain";
  const auto r = RunCli({"explain", "--model", Model("decision_tree"), "--features",
                         features_->string(), "--mode", "retrain", "--out", out.string()});
  ASSERT_CLI_OK(r);
  EXPECT_NE(r.err.find("8192/8192"), std::string::npos) << r.err;
  const json manifest = json::parse(csv::ReadFile(out / "manifest.json"));
  EXPECT_EQ(manifest.at("details").at("subset_models"), 8192);
  EXPECT_EQ(ReadCsv(out / "importance.csv").size(), 14u);
  EXPECT_EQ(ReadCsv(out / "attribution.csv")[1][5], "retrain");
}

TEST_F(CliExplain, RetrainRefusesUnseededRandomModels) {
  const TabularDataset data = ParseDatasetCsv(csv::ReadFile(*features_));
  const auto model = Fit(ModelSpec::Parse("random_forest:n_estimators=3"), data);
  const fs::path path = *dir_ / "unseeded.json";
  csv::WriteFile(path, SaveModelJson(model));
  const auto r = RunCli({"explain", "--model", path.string(), "--features", features_->string(),
                         "--mode", "retrain", "--out", (*dir_ / "refused").string()});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST(CliSr, RecoversSquareWithReferenceRow) {
  const fs::path dir = ScratchDir("sr");
  TabularDataset d = testing::SyntheticFeatureTable(150, 4);
  const std::size_t chi_cat = d.RequireFeature("chi_cat");
  for (Eigen::Index i = 0; i < d.rows.rows(); ++i) {
    d.rows(i, chi_cat) = 0.5 + 3.5 * (i + 0.5) / d.rows.rows();
    d.labels(i) = 0.0523 * d.rows(i, chi_cat) * d.rows(i, chi_cat);
  }
  const fs::path features = dir / "features.csv";
  csv::WriteFile(features, WriteDatasetCsv(d));
  for (const char* name : {"a", "b"}) {
    ASSERT_CLI_OK(RunCli({"sr", "--features", features.string(), "--columns", "chi_cat",
                          "--seed", "3", "--out", (dir / name).string()}));
  }
  EXPECT_EQ(ArtifactFiles(dir / "a"), ArtifactFiles(dir / "b"));
  const auto rows = ReadCsv(dir / "a/front.csv");
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows.back()[2], "reference");
  const std::vector<std::string> vars = {"chi_cat"};
  bool found = false;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const Expression e = ParseExpression(rows[i][3], vars);
    if (std::stod(rows[i][1]) > 1e-6) continue;
    Eigen::MatrixXd probe(2, 1);
    probe << 1.0, 2.0;
    const Eigen::ArrayXd v = Evaluate(e, probe);
    found |= std::abs(v(0) / 0.0523 - 1) <= 0.01 && std::abs(v(1) / (4 * v(0)) - 1) < 1e-6;
  }
  EXPECT_TRUE(found);
  EXPECT_FALSE(csv::ReadFile(dir / "a/telemetry.jsonl").empty());
}

TEST(CliSr, NoReferenceWithoutColumnsAndConfigErrors) {
  const fs::path dir = ScratchDir("sr-noref");
  const auto d = testing::SyntheticDataset(40, 2, 3, [](const auto& x, Rng&) { return x(0); });
  csv::WriteFile(dir / "f.csv", WriteDatasetCsv(d));
  ASSERT_CLI_OK(RunCli({"sr", "--features", (dir / "f.csv").string(), "--iterations", "60",
                        "--populations", "2", "--out", (dir / "a").string()}));
  for (const auto& row : ReadCsv(dir / "a/front.csv")) EXPECT_NE(row[2], "reference");
  EXPECT_NE(RunCli({"sr", "--features", (dir / "f.csv").string(), "--populations", "0", "--out",
                    (dir / "b").string()})
                .exit_code,
            0);
}

TEST(CliManifest, RerunFromManifestReproducesOutputs) {
  const fs::path dir = ScratchDir("manifest");
  const fs::path features = WriteSyntheticFeatures(dir, 80);
  struct Case {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Case> cases = {
      {"extract", {"extract", "--input", testing::DataPath("fixtures.json"), "--filter", "ohc1"}},
      {"train", {"train", "--features", features.string(), "--models", "random_forest:n_estimators=5",
                 "lasso", "--repeats", "2", "--seed", "9"}},
      {"sr", {"sr", "--features", features.string(), "--columns", "chi_cat", "chi_ads",
              "--iterations", "120", "--populations", "3", "--seed", "4"}},
  };
  for (const auto& c : cases) {
    auto args = c.args;
    args.push_back("--out");
    args.push_back((dir / c.name / "first").string());
    ASSERT_CLI_OK(RunCli(args));
    const fs::path manifest = dir / c.name / "first/manifest.json";
    const json m = json::parse(csv::ReadFile(manifest));
    EXPECT_EQ(m.at("command"), c.name);
    EXPECT_TRUE(m.contains("started_at"));
    EXPECT_TRUE(m.contains("seeds"));
    ASSERT_CLI_OK(RunCli({c.name, "--config", manifest.string(), "--out",
                          (dir / c.name / "second").string()}));
    EXPECT_EQ(ArtifactFiles(dir / c.name / "first"), ArtifactFiles(dir / c.name / "second"))
        << c.name;
  }
  // Flags override the config file.
  ASSERT_CLI_OK(RunCli({"train", "--config", (dir / "train/first/manifest.json").string(),
                        "--repeats", "1", "--out", (dir / "train/third").string()}));
  EXPECT_EQ(ReadCsv(dir / "train/third/benchmark.csv")[1][3], "1");
}

TEST(CliMisc, VersionAndUnknownConfigKeys) {
  const auto v = RunCli({"--version"});
  EXPECT_EQ(v.exit_code, 0);
  EXPECT_FALSE(v.out.empty());
  const fs::path dir = ScratchDir("misc");
  csv::WriteFile(dir / "bad.json", R"({"filter": "all", "colour": "red"})");
  const auto r = RunCli({"extract", "--input", testing::DataPath("fixtures.json"), "--config",
                         (dir / "bad.json").string(), "--out", (dir / "a").string()});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.err.find("colour"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace adsorbxai
