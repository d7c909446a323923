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

#include "adsorbxai/models.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "adsorbxai/csv.h"
#include "adsorbxai/error.h"
#include "adsorbxai/random.h"
#include "regressor.h"

namespace adsorbxai {
namespace {

using nlohmann::json;

constexpr std::string_view kModelFormatName = "adsorbxai-model";

const Hyperparameters& Defaults(ModelKind kind) {
  static const Hyperparameters kTree = {
      {"max_depth", -1}, {"min_samples_split", 2}, {"min_samples_leaf", 1}, {"max_features", 0}};
  static const Hyperparameters kForest = {{"max_depth", -1},       {"min_samples_split", 2},
                                          {"min_samples_leaf", 1}, {"max_features", -1},
                                          {"n_estimators", 100},   {"bootstrap", 1}};
  static const Hyperparameters kAda = {{"n_estimators", 50}, {"learning_rate", 1}};
  static const Hyperparameters kBoost = {{"n_estimators", 200},
                                         {"max_depth", 3},
                                         {"learning_rate", 0.1},
                                         {"min_samples_leaf", 1},
                                         {"subsample", 1}};
  static const Hyperparameters kKrr = {{"alpha", 1e-2}, {"gamma", 0}, {"kernel", 0}};
  static const Hyperparameters kLasso = {
      {"lambda", -1}, {"cv_folds", 5}, {"cv_grid", 20}, {"tol", 1e-10}, {"max_iter", 100000}};
  switch (kind) {
    case ModelKind::kDecisionTree: return kTree;
    case ModelKind::kRandomForest: return kForest;
    case ModelKind::kAdaBoostR2: return kAda;
    case ModelKind::kGradientBoosting: return kBoost;
    case ModelKind::kKernelRidge: return kKrr;
    case ModelKind::kLasso: return kLasso;
  }
  return kTree;
}

std::string FormatNumber(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double ParseNumber(std::string_view text, std::string_view context) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad numeric value '" + std::string(text) + "' in " + std::string(context));
  }
  return v;
}

std::vector<std::string_view> SplitOn(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Eigen::MatrixXd ToMatrix(const TabularDataset& d) { return d.rows; }

}  // namespace

// ---------------------------------------------------------------------------

void SplitSpec::Validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "train_fraction must lie in (0, 1), got " + FormatNumber(train_fraction));
  }
}

SplitIndices MakeSplit(std::size_t n, const SplitSpec& spec) {
  spec.Validate();
  if (n < 5) {
    throw Error(ErrorCode::kTooFewRows,
                "need at least 5 rows to split, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (spec.shuffle) {
    Rng rng(spec.seed, 0x5b1);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
  }
  auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

std::pair<TabularDataset, TabularDataset> Split(const TabularDataset& dataset,
                                                const SplitSpec& spec) {
  const SplitIndices idx = MakeSplit(dataset.size(), spec);
  return {dataset.SelectRows(idx.train), dataset.SelectRows(idx.test)};
}

// ---------------------------------------------------------------------------

Standardizer::Standardizer(Eigen::VectorXd means, Eigen::VectorXd std_devs)
    : means_(std::move(means)), std_devs_(std::move(std_devs)) {
  if (means_.size() != std_devs_.size()) {
    throw Error(ErrorCode::kLengthMismatch, "standardizer means and std_devs differ in length");
  }
}

Standardizer Standardizer::Fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "cannot standardize zero rows");
  Eigen::VectorXd means = rows.colwise().mean().transpose();
  Eigen::VectorXd sd(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double var = (rows.col(j).array() - means(j)).square().mean();
    sd(j) = std::max(std::sqrt(var), kStdFloor);
  }
  return Standardizer(std::move(means), std::move(sd));
}

Eigen::MatrixXd Standardizer::Transform(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != means_.size()) {
    throw Error(ErrorCode::kArityMismatch, "standardizer expects " +
                                               std::to_string(means_.size()) + " columns, got " +
                                               std::to_string(rows.cols()));
  }
  return (rows.rowwise() - means_.transpose()).array().rowwise() / std_devs_.transpose().array();
}

Eigen::MatrixXd Standardizer::InverseTransform(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != means_.size()) {
    throw Error(ErrorCode::kArityMismatch, "standardizer expects " +
                                               std::to_string(means_.size()) + " columns, got " +
                                               std::to_string(rows.cols()));
  }
  Eigen::MatrixXd out = rows.array().rowwise() * std_devs_.transpose().array();
  return out.rowwise() + means_.transpose();
}

// ---------------------------------------------------------------------------

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDecisionTree: return "decision_tree";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kAdaBoostR2: return "adaboost_r2";
    case ModelKind::kGradientBoosting: return "gradient_boosting";
    case ModelKind::kKernelRidge: return "kernel_ridge";
    case ModelKind::kLasso: return "lasso";
  }
  return "unknown";
}

std::optional<ModelKind> ParseModelKind(std::string_view name) {
  for (ModelKind k : AllModelKinds()) {
    if (ModelKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<ModelKind> AllModelKinds() {
  return {ModelKind::kDecisionTree,     ModelKind::kRandomForest, ModelKind::kAdaBoostR2,
          ModelKind::kGradientBoosting, ModelKind::kKernelRidge,  ModelKind::kLasso};
}

ModelSpec::ModelSpec(ModelKind kind, Hyperparameters hyperparameters,
                     std::optional<uint64_t> seed, std::shared_ptr<const ModelSpec> base)
    : kind_(kind),
      hyperparameters_(std::move(hyperparameters)),
      seed_(seed),
      base_(std::move(base)) {
  const Hyperparameters& defaults = Defaults(kind_);
  for (const auto& [key, value] : hyperparameters_) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::kInvalidArgument, "hyperparameter '" + key + "' is not accepted by " +
                                                   std::string(ModelKindName(kind_)));
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidArgument, "hyperparameter '" + key + "' must be finite");
    }
  }
  if (kind_ == ModelKind::kAdaBoostR2) {
    if (!base_) base_ = std::make_shared<const ModelSpec>(ModelKind::kRandomForest);
    if (base_->kind() != ModelKind::kDecisionTree && base_->kind() != ModelKind::kRandomForest) {
      throw Error(ErrorCode::kInvalidArgument,
                  "adaboost_r2 base learner must be decision_tree or random_forest");
    }
  } else if (base_) {
    throw Error(ErrorCode::kInvalidArgument, "only adaboost_r2 accepts a base learner");
  }
  if (kind_ == ModelKind::kKernelRidge) {
    const double k = Get("kernel");
    if (k != 0.0 && k != 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "kernel must be 0 (rbf) or 1 (linear)");
    }
    if (!(Get("alpha") > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  if (hyperparameters_.contains("learning_rate") && !(Get("learning_rate") > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  }
  if (hyperparameters_.contains("subsample") &&
      !(Get("subsample") > 0.0 && Get("subsample") <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "subsample must lie in (0, 1]");
  }
}

ModelSpec ModelSpec::Parse(std::string_view text, std::optional<uint64_t> seed) {
  const auto parts = SplitOn(text, ':');
  const auto kind = ParseModelKind(parts[0]);
  if (!kind) {
    throw Error(ErrorCode::kInvalidArgument, "unknown model kind '" + std::string(parts[0]) + "'");
  }
  Hyperparameters hp;
  std::optional<ModelKind> base_kind;
  Hyperparameters base_hp;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "expected key=value, got '" + std::string(parts[i]) + "'");
    }
    const std::string key(parts[i].substr(0, eq));
    const std::string_view value = parts[i].substr(eq + 1);
    if (key == "base") {
      base_kind = ParseModelKind(value);
      if (!base_kind) {
        throw Error(ErrorCode::kInvalidArgument, "unknown base learner '" + std::string(value) + "'");
      }
    } else if (key.starts_with("base.")) {
      base_hp[key.substr(5)] = ParseNumber(value, key);
    } else if (key == "kernel" && (value == "rbf" || value == "linear")) {
      hp[key] = value == "rbf" ? 0.0 : 1.0;
    } else {
      hp[key] = ParseNumber(value, key);
    }
  }
  std::shared_ptr<const ModelSpec> base;
  if (base_kind || !base_hp.empty()) {
    if (*kind != ModelKind::kAdaBoostR2) {
      throw Error(ErrorCode::kInvalidArgument, "only adaboost_r2 accepts a base learner");
    }
    base = std::make_shared<const ModelSpec>(base_kind.value_or(ModelKind::kRandomForest),
                                             std::move(base_hp));
  }
  return ModelSpec(*kind, std::move(hp), seed, std::move(base));
}

double ModelSpec::Get(const std::string& key) const {
  if (auto it = hyperparameters_.find(key); it != hyperparameters_.end()) return it->second;
  const Hyperparameters& defaults = Defaults(kind_);
  if (auto it = defaults.find(key); it != defaults.end()) return it->second;
  throw Error(ErrorCode::kInvalidArgument, "hyperparameter '" + key + "' is not defined for " +
                                               std::string(ModelKindName(kind_)));
}

ModelSpec ModelSpec::WithSeed(std::optional<uint64_t> seed) const {
  ModelSpec copy = *this;
  copy.seed_ = seed;
  return copy;
}

bool ModelSpec::IsRandomized() const {
  switch (kind_) {
    case ModelKind::kDecisionTree: return Get("max_features") > 0.0;
    case ModelKind::kRandomForest: return true;
    case ModelKind::kAdaBoostR2: return base_->IsRandomized();
    case ModelKind::kGradientBoosting: return Get("subsample") < 1.0;
    case ModelKind::kKernelRidge: return false;
    case ModelKind::kLasso: return Get("lambda") < 0.0;
  }
  return false;
}

std::string ModelSpec::ToString() const {
  std::string out(ModelKindName(kind_));
  for (const auto& [key, value] : hyperparameters_) {
    out += ':' + key + '=';
    out += key == "kernel" ? (value == 0.0 ? "rbf" : "linear") : FormatNumber(value);
  }
  if (base_) {
    out += ":base=" + std::string(ModelKindName(base_->kind()));
    for (const auto& [key, value] : base_->hyperparameters()) {
      out += ":base." + key + '=' + FormatNumber(value);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

FitResult FitRegressor(const ModelSpec& spec, const Eigen::MatrixXd& rows,
                       const Eigen::VectorXd& labels, const Eigen::VectorXd* weights,
                       const FitOptions& options) {
  if (rows.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (rows.rows() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rows and labels differ in length");
  }
  if (weights && weights->size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "weights and labels differ in length");
  }
  switch (spec.kind()) {
    case ModelKind::kDecisionTree: return FitDecisionTree(spec, rows, labels, weights);
    case ModelKind::kRandomForest: return FitRandomForest(spec, rows, labels, weights, options);
    case ModelKind::kGradientBoosting: return FitGradientBoosting(spec, rows, labels, weights);
    case ModelKind::kAdaBoostR2:
    case ModelKind::kKernelRidge:
    case ModelKind::kLasso:
      if (weights) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(ModelKindName(spec.kind())) + " does not accept sample weights");
      }
      break;
  }
  if (spec.kind() == ModelKind::kAdaBoostR2) return FitAdaBoostR2(spec, rows, labels, options);
  if (spec.kind() == ModelKind::kKernelRidge) return FitKernelRidge(spec, rows, labels);
  return FitLasso(spec, rows, labels);
}

std::shared_ptr<const Regressor> RegressorFromJson(const ModelSpec& spec, const json& state) {
  switch (spec.kind()) {
    case ModelKind::kKernelRidge: return KernelRidgeFromJson(state);
    case ModelKind::kLasso: return LassoFromJson(state);
    default: return TreeModelFromJson(spec, state);
  }
}

json EigenToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd EigenVectorFromJson(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json EigenToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Eigen::VectorXd r = m.row(i).transpose();
    rows.push_back(EigenToJson(r));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd EigenMatrixFromJson(const json& j) {
  const auto r = j.at("rows").get<Eigen::Index>();
  const auto c = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != r) {
    throw Error(ErrorCode::kMalformedFile, "matrix row count does not match data");
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::VectorXd row = EigenVectorFromJson(data[static_cast<std::size_t>(i)]);
    if (row.size() != c) throw Error(ErrorCode::kMalformedFile, "ragged matrix row");
    m.row(i) = row.transpose();
  }
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------

TrainedModel::TrainedModel(ModelSpec spec, std::vector<std::string> feature_names,
                           std::shared_ptr<const detail::Regressor> regressor,
                           std::vector<std::string> warnings)
    : spec_(std::move(spec)),
      feature_names_(std::move(feature_names)),
      regressor_(std::move(regressor)),
      warnings_(std::move(warnings)) {}

Eigen::VectorXd TrainedModel::Predict(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != feature_names_.size()) {
    throw Error(ErrorCode::kArityMismatch, "model expects " + std::to_string(feature_names_.size()) +
                                               " features, got " + std::to_string(rows.cols()));
  }
  Eigen::VectorXd out;
  regressor_->PredictBatch(rows, out);
  return out;
}

double TrainedModel::PredictRow(std::span<const double> row) const {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j) m(0, static_cast<Eigen::Index>(j)) = row[j];
  return Predict(m)(0);
}

std::optional<std::pair<Eigen::VectorXd, double>> TrainedModel::LinearCoefficients() const {
  return regressor_->Linear();
}

TrainedModel Fit(const ModelSpec& spec, const TabularDataset& train, const FitOptions& options) {
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  train.Validate();
  detail::FitResult r = detail::FitRegressor(spec, train.rows, train.labels, nullptr, options);
  return TrainedModel(spec, train.feature_names, std::move(r.regressor), std::move(r.warnings));
}

Eigen::VectorXd Predict(const TrainedModel& model, const Eigen::MatrixXd& rows) {
  return model.Predict(rows);
}

double MeanAbsoluteError(const Eigen::VectorXd& predictions, const Eigen::VectorXd& labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "predictions (" + std::to_string(predictions.size()) + ") and labels (" +
                    std::to_string(labels.size()) + ") differ in length");
  }
  if (labels.size() == 0) throw Error(ErrorCode::kLengthMismatch, "no values to compare");
  return (predictions - labels).cwiseAbs().mean();
}

// ---------------------------------------------------------------------------

std::vector<BenchmarkRow> RunBenchmark(const TabularDataset& dataset,
                                       std::span<const ModelSpec> specs, const SplitSpec& split,
                                       int repeats, const BenchmarkOptions& options) {
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be at least 1");
  std::vector<std::pair<TabularDataset, TabularDataset>> splits;
  for (int i = 0; i < repeats; ++i) {
    SplitSpec s = split;
    if (!options.vary_model_seed) s.seed = split.seed + static_cast<uint64_t>(i);
    splits.push_back(Split(dataset, s));
  }
  std::vector<BenchmarkRow> out;
  for (const ModelSpec& spec : specs) {
    std::vector<double> maes;
    for (int i = 0; i < repeats; ++i) {
      const auto& [train, test] = splits[static_cast<std::size_t>(i)];
      const uint64_t base_seed = spec.seed().value_or(split.seed);
      const ModelSpec run_spec =
          spec.WithSeed(base_seed + (options.vary_model_seed ? static_cast<uint64_t>(i) : 0));
      const TrainedModel model = Fit(run_spec, train, options.fit);
      maes.push_back(MeanAbsoluteError(model.Predict(ToMatrix(test)), test.labels));
    }
    const double mean = std::accumulate(maes.begin(), maes.end(), 0.0) / maes.size();
    double ss = 0.0;
    for (double m : maes) ss += (m - mean) * (m - mean);
    const double sd = maes.size() > 1 ? std::sqrt(ss / static_cast<double>(maes.size() - 1)) : 0.0;
    out.push_back({spec.ToString(), mean, sd, repeats, split.seed});
  }
  std::stable_sort(out.begin(), out.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.mean_mae != b.mean_mae) return a.mean_mae < b.mean_mae;
    return a.model < b.model;
  });
  return out;
}

std::string WriteBenchmarkCsv(std::span<const BenchmarkRow> rows) {
  std::string out = "model,mean_mae,std_mae,repeats,seed\n";
  for (const BenchmarkRow& r : rows) {
    out += csv::JoinRow({r.model, csv::FormatDouble(r.mean_mae), csv::FormatDouble(r.std_mae),
                         std::to_string(r.repeats), std::to_string(r.seed)});
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

json SpecToJson(const ModelSpec& spec) {
  json j = {{"kind", ModelKindName(spec.kind())}, {"hyperparameters", spec.hyperparameters()}};
  if (spec.seed()) j["seed"] = *spec.seed();
  if (spec.base()) j["base"] = SpecToJson(*spec.base());
  return j;
}

ModelSpec SpecFromJson(const json& j) {
  const auto kind = ParseModelKind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::kMalformedFile, "unknown model kind in model document");
  std::optional<uint64_t> seed;
  if (j.contains("seed")) seed = j.at("seed").get<uint64_t>();
  std::shared_ptr<const ModelSpec> base;
  if (j.contains("base")) base = std::make_shared<const ModelSpec>(SpecFromJson(j.at("base")));
  return ModelSpec(*kind, j.at("hyperparameters").get<Hyperparameters>(), seed, std::move(base));
}

}  // namespace

std::string SaveModelJson(const TrainedModel& model) {
  json doc = {{"format", kModelFormatName},
              {"version", kModelFormatVersion},
              {"spec", SpecToJson(model.spec())},
              {"feature_names", model.feature_names()},
              {"annotations", model.annotations()},
              {"warnings", model.warnings()},
              {"state", model.regressor().ToJson()}};
  return doc.dump() + "\n";
}

TrainedModel LoadModelJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("model document: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kModelFormatName) {
    throw Error(ErrorCode::kMalformedFile, "not an adsorbxai model document");
  }
  const int version = doc.value("version", -1);
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::kFormatVersion, "model format version " + std::to_string(version) +
                                               " is not supported (expected " +
                                               std::to_string(kModelFormatVersion) + ")");
  }
  try {
    ModelSpec spec = SpecFromJson(doc.at("spec"));
    auto regressor = detail::RegressorFromJson(spec, doc.at("state"));
    TrainedModel model(std::move(spec), doc.at("feature_names").get<std::vector<std::string>>(),
                       std::move(regressor), doc.value("warnings", std::vector<std::string>{}));
    if (doc.contains("annotations")) {
      model.annotations() = doc.at("annotations").get<std::map<std::string, std::string>>();
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("model document: ") + e.what());
  }
}

}  // namespace adsorbxai
