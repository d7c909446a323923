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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adsorbxai/error.h"
#include "adsorbxai/models.h"
#include "adsorbxai/random.h"
#include "adsorbxai/shapley.h"
#include "oracles.h"
#include "test_support.h"

namespace adsorbxai {
namespace {

using testing::FromModel;
using testing::PermutationOracle;
using testing::SyntheticDataset;

TabularDataset Interacting(std::size_t n, std::size_t features, uint64_t seed) {
  return SyntheticDataset(n, features, seed, [](const Eigen::RowVectorXd& x, Rng& r) {
    double y = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) y += (j + 1) * 0.3 * x(j);
    return y + x(0) * x(x.size() - 1) + 0.05 * r.Normal();
  });
}

uint64_t Factorial(uint64_t n) { return n <= 1 ? 1 : n * Factorial(n - 1); }

TEST(CoalitionWeight, Examples) {
  EXPECT_NEAR(CoalitionWeight(3, 1), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(CoalitionWeight(13, 0), 1.0 / 13.0, 1e-15);
  EXPECT_THROW(CoalitionWeight(3, 3), Error);
  EXPECT_THROW(CoalitionWeight(0, 0), Error);
}

TEST(CoalitionWeight, MatchesExactRationals) {
  for (uint64_t f = 1; f <= 13; ++f) {
    double total = 0.0;
    for (uint64_t s = 0; s < f; ++s) {
      const uint64_t num = Factorial(s) * Factorial(f - s - 1);
      const uint64_t den = Factorial(f);
      const double exact = static_cast<double>(num) / static_cast<double>(den);
      EXPECT_NEAR(CoalitionWeight(f, s), exact, 1e-13 * exact) << f << "," << s;
      const double subsets =
          static_cast<double>(Factorial(f - 1) / (Factorial(s) * Factorial(f - 1 - s)));
      total += subsets * CoalitionWeight(f, s);
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << f;
  }
}

TEST(ShapleyMarginal, LinearModelClosedForm) {
  Rng rng(1);
  const Eigen::Index f = 6;
  Eigen::VectorXd w(f);
  for (Eigen::Index j = 0; j < f; ++j) w(j) = rng.Normal();
  const double c = 0.37;
  BatchPredictor linear = [&](const Eigen::MatrixXd& rows) -> Eigen::VectorXd {
    return (rows * w).array() + c;
  };
  const Eigen::MatrixXd background = Eigen::MatrixXd::Random(40, f);
  const Eigen::MatrixXd queries = Eigen::MatrixXd::Random(5, f);
  const auto report = ShapleyMarginal(linear, queries, background);
  const Eigen::RowVectorXd means = background.colwise().mean();
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    for (Eigen::Index j = 0; j < f; ++j) {
      EXPECT_NEAR(report.phi(i, j), w(j) * (queries(i, j) - means(j)), 1e-8);
    }
  }
  EXPECT_NEAR(report.base_value, linear(background).mean(), 1e-12);
  EXPECT_EQ(report.background_size, 40u);
  EXPECT_EQ(report.mode, ShapleyMode::kMarginal);
}

TEST(ShapleyMarginal, TreeMatchesPermutationOracle) {
  for (std::size_t f : {3u, 6u}) {
    const auto d = Interacting(120, f, 2 + f);
    const auto model = Fit(ModelSpec::Parse("decision_tree:max_depth=5"), d);
    const auto predict = FromModel(model);
    const Eigen::MatrixXd background = d.rows.topRows(25);
    const Eigen::MatrixXd queries = d.rows.bottomRows(4);
    const auto report = ShapleyMarginal(model, queries, background);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      const Eigen::RowVectorXd oracle = PermutationOracle(predict, queries.row(i), background);
      for (Eigen::Index j = 0; j < oracle.size(); ++j) {
        EXPECT_NEAR(report.phi(i, j), oracle(j), 1e-10) << "F=" << f;
      }
    }
  }
}

TEST(ShapleyMarginal, EfficiencyForEveryModelKind) {
  const auto d = Interacting(80, 5, 3);
  const Eigen::MatrixXd background = d.rows.topRows(30);
  const Eigen::MatrixXd queries = d.rows.bottomRows(10);
  for (const char* text :
       {"decision_tree:max_depth=6", "random_forest:n_estimators=8",
        "adaboost_r2:n_estimators=3:base.n_estimators=4", "gradient_boosting:n_estimators=20",
        "kernel_ridge", "lasso:lambda=0.01"}) {
    const auto model = Fit(ModelSpec::Parse(text, 5), d);
    const auto report = ShapleyMarginal(model, queries, background);
    const Eigen::VectorXd predictions = model.Predict(queries);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      EXPECT_NEAR(report.base_value + report.phi.row(i).sum(), predictions(i), 1e-8) << text;
      EXPECT_NEAR(report.predictions(i), predictions(i), 1e-12) << text;
    }
  }
}

TEST(ShapleyMarginal, DummyFeatureGetsExactlyZero) {
  const auto d = Interacting(100, 3, 4);
  const auto model = Fit(ModelSpec::Parse("gradient_boosting:n_estimators=25"), d);
  // Appended fourth column is never read.
  BatchPredictor padded = [&](const Eigen::MatrixXd& rows) {
    return model.Predict(rows.leftCols(3));
  };
  Eigen::MatrixXd wide(d.size(), 4);
  Rng rng(5);
  for (Eigen::Index i = 0; i < wide.rows(); ++i) {
    wide.row(i) << d.rows.row(i), rng.Normal();
  }
  // Probe: perturbing the column never changes the output.
  const Eigen::VectorXd reference = padded(wide.topRows(10));
  for (int k = 0; k < 1000; ++k) {
    Eigen::MatrixXd probe = wide.topRows(10);
    probe.col(3).setConstant(rng.Normal() * 100);
    ASSERT_EQ(padded(probe), reference);
  }
  const auto report = ShapleyMarginal(padded, wide.bottomRows(8), wide.topRows(30));
  for (Eigen::Index i = 0; i < report.phi.rows(); ++i) EXPECT_EQ(report.phi(i, 3), 0.0);
}

TEST(ShapleyMarginal, LinearInTheModel) {
  const auto d = Interacting(90, 4, 6);
  const auto m1 = Fit(ModelSpec::Parse("decision_tree:max_depth=4"), d);
  const auto m2 = Fit(ModelSpec::Parse("kernel_ridge"), d);
  BatchPredictor sum = [&](const Eigen::MatrixXd& rows) -> Eigen::VectorXd {
    return m1.Predict(rows) + m2.Predict(rows);
  };
  const Eigen::MatrixXd background = d.rows.topRows(20);
  const Eigen::MatrixXd queries = d.rows.bottomRows(6);
  const auto a = ShapleyMarginal(m1, queries, background);
  const auto b = ShapleyMarginal(m2, queries, background);
  const auto ab = ShapleyMarginal(sum, queries, background);
  EXPECT_LT((ab.phi - a.phi - b.phi).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ShapleyMarginal, IndependentOfWorkersAndChecksInputs) {
  const auto d = Interacting(60, 5, 7);
  const auto model = Fit(ModelSpec::Parse("random_forest:n_estimators=5", 3), d);
  const auto one = ShapleyMarginal(model, d.rows.bottomRows(9), d.rows.topRows(20), {20, 1});
  const auto many = ShapleyMarginal(model, d.rows.bottomRows(9), d.rows.topRows(20), {20, 4});
  EXPECT_EQ(one.phi, many.phi);
  EXPECT_EQ(one.base_value, many.base_value);
  EXPECT_THROW(ShapleyMarginal(model, d.rows.bottomRows(2), d.rows.topRows(20), {4, 1}), Error);
  EXPECT_THROW(ShapleyMarginal(model, Eigen::MatrixXd::Zero(2, 3), d.rows.topRows(5)), Error);
  EXPECT_THROW(ShapleyMarginal(model, d.rows.topRows(2), Eigen::MatrixXd(0, 5)), Error);
  BatchPredictor flat = [](const Eigen::MatrixXd& rows) -> Eigen::VectorXd {
    return Eigen::VectorXd::Zero(rows.rows());
  };
  EXPECT_THROW(ShapleyMarginal(flat, Eigen::MatrixXd::Zero(1, 21), Eigen::MatrixXd::Zero(1, 21)),
               Error);
}

TEST(SelectBackground, CapsDeterministicallyInOrder) {
  Eigen::MatrixXd rows(300, 1);
  for (int i = 0; i < 300; ++i) rows(i, 0) = i;
  const auto a = SelectBackground(rows, 256, 9);
  EXPECT_EQ(a.rows(), 256);
  EXPECT_EQ(a, SelectBackground(rows, 256, 9));
  EXPECT_NE(a, SelectBackground(rows, 256, 10));
  for (Eigen::Index i = 1; i < a.rows(); ++i) EXPECT_LT(a(i - 1, 0), a(i, 0));
  EXPECT_EQ(SelectBackground(rows.topRows(100), 256, 9), rows.topRows(100));
}

TEST(ShapleyRetrain, SingleFeatureTelescopes) {
  const auto d = Interacting(50, 1, 8);
  const auto spec = ModelSpec::Parse("decision_tree:max_depth=3");
  const auto report = ShapleyRetrain(spec, d, d.rows.topRows(5));
  const auto full = Fit(spec, d);
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_NEAR(report.phi(i, 0), full.Predict(d.rows.row(i)).value() - d.labels.mean(), 1e-12);
  }
  EXPECT_NEAR(report.base_value, d.labels.mean(), 1e-12);
  EXPECT_EQ(report.mode, ShapleyMode::kRetrain);
}

TEST(ShapleyRetrain, TwoFeaturesMatchHandExpansion) {
  const auto d = Interacting(70, 2, 9);
  const auto spec = ModelSpec::Parse("decision_tree:max_depth=4");
  const Eigen::MatrixXd queries = d.rows.topRows(6);
  const auto report = ShapleyRetrain(spec, d, queries);
  const std::vector<std::size_t> c0 = {0}, c1 = {1};
  const auto f0 = Fit(spec, d.SelectColumns(c0));
  const auto f1 = Fit(spec, d.SelectColumns(c1));
  const auto f01 = Fit(spec, d);
  const double empty = d.labels.mean();
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const double v0 = f0.Predict(queries.row(i).leftCols(1)).value();
    const double v1 = f1.Predict(queries.row(i).rightCols(1)).value();
    const double v01 = f01.Predict(queries.row(i)).value();
    EXPECT_NEAR(report.phi(i, 0), 0.5 * ((v0 - empty) + (v01 - v1)), 1e-10);
    EXPECT_NEAR(report.phi(i, 1), 0.5 * ((v1 - empty) + (v01 - v0)), 1e-10);
    EXPECT_NEAR(empty + report.phi.row(i).sum(), v01, 1e-8);
  }
}

TEST(ShapleyRetrain, DuplicateColumnsShareCredit) {
  auto d = Interacting(60, 3, 10);
  d.rows.col(2) = d.rows.col(1);
  const auto report = ShapleyRetrain(ModelSpec::Parse("kernel_ridge"), d, d.rows.topRows(8));
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(report.phi(i, 1), report.phi(i, 2), 1e-8);
}

TEST(ShapleyRetrain, CacheDoesNotChangeResults) {
  const auto d = Interacting(60, 4, 11);
  const auto spec = ModelSpec::Parse("random_forest:n_estimators=4", 12);
  const Eigen::MatrixXd first = d.rows.topRows(3);
  const Eigen::MatrixXd second = d.rows.bottomRows(5);
  RetrainExplainer warm(spec, d);
  std::size_t calls = 0;
  RetrainOptions counting;
  counting.progress = [&](std::size_t, std::size_t) { ++calls; };
  RetrainExplainer cold(spec, d, counting);
  warm.Explain(first);
  EXPECT_EQ(warm.cached_models(), 16u);
  const auto a = warm.Explain(second);
  const auto b = cold.Explain(second);
  EXPECT_EQ(a.phi, b.phi);
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(calls, 16u);
  cold.Explain(first);
  EXPECT_EQ(calls, 16u);
  const Eigen::VectorXd full = Fit(spec, d).Predict(second);
  for (Eigen::Index i = 0; i < second.rows(); ++i) {
    EXPECT_NEAR(a.base_value + a.phi.row(i).sum(), full(i), 1e-8);
  }
}

TEST(ShapleyRetrain, RejectsUnseededRandomSpecsAndTooManyFeatures) {
  const auto d = Interacting(30, 3, 12);
  EXPECT_THROW(RetrainExplainer(ModelSpec::Parse("random_forest"), d), Error);
  const auto wide = Interacting(30, 14, 13);
  EXPECT_THROW(RetrainExplainer(ModelSpec::Parse("decision_tree"), wide), Error);
}

ShapleyReport ReportOf(Eigen::MatrixXd phi, std::vector<std::string> names) {
  ShapleyReport r;
  r.phi = std::move(phi);
  r.feature_names = std::move(names);
  r.predictions = Eigen::VectorXd::Zero(r.phi.rows());
  for (Eigen::Index i = 0; i < r.phi.rows(); ++i) r.system_ids.push_back("s" + std::to_string(i));
  return r;
}

TEST(GlobalImportance, Examples) {
  Eigen::MatrixXd phi(1, 2);
  phi << 0.5, -0.2;
  const auto imp = ComputeGlobalImportance(ReportOf(phi, {"a", "b"}));
  EXPECT_NEAR(imp.mean_abs_phi(0), 0.5, 1e-15);
  EXPECT_NEAR(imp.mean_abs_phi(1), 0.2, 1e-15);
  EXPECT_EQ(imp.ranking, (std::vector<std::size_t>{0, 1}));
  const auto zeros = ComputeGlobalImportance(ReportOf(Eigen::MatrixXd::Zero(3, 4),
                                                      {"a", "b", "c", "d"}));
  EXPECT_EQ(zeros.ranking, (std::vector<std::size_t>{0, 1, 2, 3}));
  Eigen::MatrixXd mixed(2, 3);
  mixed << 0.1, -0.4, 0.4, 0.1, 0.2, -0.2;
  const auto m = ComputeGlobalImportance(ReportOf(mixed, {"a", "b", "c"}));
  EXPECT_EQ(m.ranking, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(WriteImportanceCsv(m), "feature,mean_abs_phi,rank\nb,0.30000000000000004,1\n"
                                   "c,0.30000000000000004,2\na,0.10000000000000001,3\n");
  EXPECT_THROW(ComputeGlobalImportance(ReportOf(Eigen::MatrixXd(0, 2), {"a", "b"})), Error);
}

TEST(Beeswarm, LongFormat) {
  const auto d = testing::SyntheticFeatureTable(9, 14);
  Rng rng(3);
  Eigen::MatrixXd phi(9, 13);
  for (Eigen::Index i = 0; i < 9; ++i) {
    for (Eigen::Index j = 0; j < 13; ++j) phi(i, j) = rng.Normal();
  }
  auto data = d;
  data.rows.col(5).setConstant(2.0);
  auto report = ReportOf(phi, data.feature_names);
  report.system_ids = data.system_ids;
  const auto rows = BeeswarmExport(report, data);
  ASSERT_EQ(rows.size(), 13u * 9u);
  for (std::size_t k = 0; k < rows.size(); k += 7) {
    const auto j = static_cast<Eigen::Index>(k / 9);
    const auto i = static_cast<Eigen::Index>(k % 9);
    EXPECT_EQ(rows[k].feature, data.feature_names[j]);
    EXPECT_EQ(rows[k].system_id, data.system_ids[i]);
    EXPECT_EQ(rows[k].feature_value, data.rows(i, j));
    EXPECT_EQ(rows[k].phi, phi(i, j));
    const double lo = data.rows.col(j).minCoeff(), hi = data.rows.col(j).maxCoeff();
    const double norm = hi > lo ? (data.rows(i, j) - lo) / (hi - lo) : 0.5;
    EXPECT_NEAR(rows[k].value_norm, norm, 1e-15);
  }
  for (std::size_t k = 5 * 9; k < 6 * 9; ++k) EXPECT_EQ(rows[k].value_norm, 0.5);
  EXPECT_THROW(BeeswarmExport(report, data.SelectRows(std::vector<std::size_t>{0, 1})), Error);

  const auto tiny = ReportOf(Eigen::MatrixXd::Ones(1, 2), {"a", "b"});
  TabularDataset one;
  one.feature_names = {"a", "b"};
  one.rows = Eigen::MatrixXd::Ones(1, 2);
  one.labels = Eigen::VectorXd::Zero(1);
  one.system_ids = {"s0"};
  EXPECT_EQ(BeeswarmExport(tiny, one).size(), 2u);
  const auto bee = BeeswarmExport(report, data);
  const std::string attribution = WriteAttributionCsv(report, bee);
  EXPECT_EQ(attribution.substr(0, attribution.find('\n')),
            "system_id,feature,phi,feature_value,value_norm,mode,base_value");
}

TEST(Correlation, Conventions) {
  const auto d = testing::SyntheticFeatureTable(50, 15);
  auto data = d;
  data.rows.col(1) = -data.rows.col(0);
  data.rows.col(3).setConstant(4.0);
  const Eigen::MatrixXd c = CorrelationMatrix(data);
  EXPECT_NEAR(c(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(c(0, 1), -1.0, 1e-12);
  EXPECT_EQ(c(3, 3), 1.0);
  for (Eigen::Index j = 0; j < 13; ++j) {
    if (j != 3) EXPECT_EQ(c(3, j), 0.0);
  }
  EXPECT_EQ(c, c.transpose());
  EXPECT_LE(c.maxCoeff(), 1.0);
  EXPECT_GE(c.minCoeff(), -1.0);
  EXPECT_THROW(CorrelationMatrix(d.SelectRows(std::vector<std::size_t>{0})), Error);
}

TEST(Correlation, MatchesTwoPassOracle) {
  const auto d = testing::SyntheticFeatureTable(50, 16);
  const Eigen::MatrixXd c = CorrelationMatrix(d);
  const Eigen::Index n = d.rows.rows();
  for (Eigen::Index a = 0; a < 13; ++a) {
    for (Eigen::Index b = 0; b < 13; ++b) {
      long double ma = 0, mb = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        ma += d.rows(i, a);
        mb += d.rows(i, b);
      }
      ma /= n;
      mb /= n;
      long double sab = 0, saa = 0, sbb = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        sab += (d.rows(i, a) - ma) * (d.rows(i, b) - mb);
        saa += (d.rows(i, a) - ma) * (d.rows(i, a) - ma);
        sbb += (d.rows(i, b) - mb) * (d.rows(i, b) - mb);
      }
      EXPECT_NEAR(c(a, b), static_cast<double>(sab / std::sqrt(saa * sbb)), 1e-10);
    }
  }
  const std::string csv = WriteCorrelationCsv(d.feature_names, c);
  EXPECT_EQ(csv.substr(0, 16), "feature,chi_ads,");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 14);
}

TEST(Scatter, ProjectionMatchesColumns) {
  const auto d = testing::SyntheticFeatureTable(30, 17);
  const auto t = ScatterExport(d, "chi_cat", "chi_local", "chi_ads");
  EXPECT_EQ(t.system_ids, d.system_ids);
  EXPECT_EQ(t.values.col(0), d.rows.col(4));
  EXPECT_EQ(t.values.col(1), d.rows.col(6));
  EXPECT_EQ(t.values.col(2), d.rows.col(0));
  EXPECT_EQ(WriteScatterCsv(t).substr(0, 35), "system_id,chi_cat,chi_local,chi_ads");
  EXPECT_THROW(ScatterExport(d, "chi_cat", "nope", "chi_ads"), Error);
}

}  // namespace
}  // namespace adsorbxai
