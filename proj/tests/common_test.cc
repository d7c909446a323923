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

#include <atomic>
#include <filesystem>

#include "adsorbxai/csv.h"
#include "adsorbxai/dataset.h"
#include "adsorbxai/digest.h"
#include "adsorbxai/error.h"
#include "adsorbxai/parallel.h"
#include "adsorbxai/random.h"
#include "test_support.h"

namespace adsorbxai {
namespace {

TEST(Csv, EscapeAndSplitRoundTrip) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "", "x"};
  const std::string row = csv::JoinRow(fields);
  EXPECT_EQ(row, "plain,\"with,comma\",\"with \"\"quote\"\"\",,x");
  EXPECT_EQ(csv::SplitRow(row), fields);
  EXPECT_EQ(csv::Lines("a\r\nb\n"), (std::vector<std::string>{"a", "b"}));
}

TEST(Csv, DoublesRoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.Normal() * std::pow(10.0, rng.Uniform(-30, 30));
    EXPECT_EQ(std::stod(csv::FormatDouble(v)), v);
  }
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(Sha256File("/nonexistent/file"), Error);
}

TEST(Dataset, CsvRoundTripAndFingerprint) {
  const TabularDataset d = testing::SyntheticFeatureTable(17, 5);
  const std::string text = WriteDatasetCsv(d);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "system_id,chi_ads,n_ads_atoms,z_ads_sum,cn_ads_center,chi_cat,cn_cat_eff,chi_local,"
            "site_type,density,band_gap,space_group,miller_packed,formation_energy,label");
  const TabularDataset back = ParseDatasetCsv(text);
  EXPECT_EQ(back.feature_names, d.feature_names);
  EXPECT_EQ(back.system_ids, d.system_ids);
  EXPECT_EQ(back.rows, d.rows);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(DatasetFingerprint(back), DatasetFingerprint(d));
  TabularDataset changed = d;
  changed.labels(3) += 1e-9;
  EXPECT_NE(DatasetFingerprint(changed), DatasetFingerprint(d));
}

TEST(Dataset, MalformedCsvReportsLine) {
  const std::string text = "system_id,a,label\nx,1,2\ny,oops,3\n";
  try {
    ParseDatasetCsv(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedFile);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Dataset, SelectAndValidate) {
  TabularDataset d = testing::SyntheticDataset(10, 3, 1, [](const auto& x, Rng&) { return x(0); });
  const std::vector<std::size_t> rows = {7, 2};
  const auto sub = d.SelectRows(rows);
  EXPECT_EQ(sub.system_ids, (std::vector<std::string>{"s7", "s2"}));
  EXPECT_EQ(sub.rows.row(0), d.rows.row(7));
  const std::vector<std::size_t> cols = {2, 0};
  const auto sc = d.SelectColumns(cols);
  EXPECT_EQ(sc.feature_names, (std::vector<std::string>{"x2", "x0"}));
  EXPECT_EQ(sc.rows.col(0), d.rows.col(2));
  EXPECT_EQ(d.RequireFeature("x1"), 1u);
  EXPECT_THROW(d.RequireFeature("nope"), Error);
  d.rows(4, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(d.Validate(), Error);
}

TEST(Parallel, EveryIndexOnceAndErrorsPropagate) {
  for (unsigned workers : {1u, 2u, 7u}) {
    std::vector<std::atomic<int>> hits(257);
    ParallelFor(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(ParallelFor(50, workers,
                             [](std::size_t i) {
                               if (i == 31) throw Error(ErrorCode::kInvalidArgument, "x");
                             }),
                 Error);
  }
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42, 1), b(42, 1), c(42, 2);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.NextBits();
    EXPECT_EQ(x, b.NextBits());
    differs |= x != c.NextBits();
  }
  EXPECT_TRUE(differs);
  Rng u(5);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const uint64_t k = u.Below(7);
    ASSERT_LT(k, 7u);
    mean += u.Normal();
  }
  EXPECT_NEAR(mean / 20000, 0.0, 0.03);
}

}  // namespace
}  // namespace adsorbxai
