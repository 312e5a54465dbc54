// Copyright 2026 The FedZip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "fedzip/data.hpp"

namespace fedzip {
namespace {

std::vector<float> sorted_first_column(const std::vector<ClientShard>& shards) {
  std::vector<float> out;
  for (const auto& s : shards) {
    for (Eigen::Index i = 0; i < s.data.features.rows(); ++i) out.push_back(s.data.features(i, 0));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<float> sorted_first_column(const LabeledDataset& d) {
  std::vector<float> out(d.features.col(0).begin(), d.features.col(0).end());
  std::sort(out.begin(), out.end());
  return out;
}

double accuracy_after_training(const LabeledDataset& data, const std::vector<int>& hidden,
                               int epochs) {
  const auto [train, test] = split_holdout(data, 0.25, 3);
  TrainOptions o;
  o.epochs = epochs;
  o.lr = 0.1f;
  const auto p = train_local(init_random(make_architecture(data.dim(), hidden, data.num_classes), 1),
                             train, o);
  return forward_loss(p, test).accuracy;
}

TEST(Synthetic, SameSeedIdenticalDataset) {
  const auto a = generate_synthetic(10, 20, 500, 3.0, 5);
  const auto b = generate_synthetic(10, 20, 500, 3.0, 5);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(generate_synthetic(10, 20, 500, 3.0, 6).features, a.features);
}

TEST(Synthetic, LabelsBalanced) {
  const auto d = generate_synthetic(7, 5, 701, 1.0, 1);
  std::vector<int> count(7, 0);
  for (int l : d.labels) ++count[l];
  EXPECT_EQ(*std::max_element(count.begin(), count.end()) - *std::min_element(count.begin(), count.end()), 1);
}

TEST(Synthetic, ClassMeansAreSeparationApart) {
  const double sep = 4.0;
  const auto d = generate_synthetic(3, 6, 30000, sep, 2);
  std::vector<Eigen::VectorXd> mean(3, Eigen::VectorXd::Zero(6));
  std::vector<int> n(3, 0);
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    mean[d.labels[i]] += d.features.row(i).transpose().cast<double>();
    ++n[d.labels[i]];
  }
  for (int c = 0; c < 3; ++c) mean[c] /= n[c];
  EXPECT_NEAR((mean[0] - mean[1]).norm(), sep, 0.1);
  EXPECT_NEAR((mean[1] - mean[2]).norm(), sep, 0.1);
}

TEST(Synthetic, ZeroSeparationIsChance) {
  const auto d = generate_synthetic(10, 20, 4000, 0.0, 3);
  EXPECT_NEAR(accuracy_after_training(d, {32}, 5), 0.1, 0.04);
}

TEST(Synthetic, SixSigmaSeparationIsLinearlySeparable) {
  const auto d = generate_synthetic(10, 20, 4000, 6.0, 4);
  EXPECT_GT(accuracy_after_training(d, {}, 10), 0.95);
}

TEST(Synthetic, RejectsInvalidSizes) {
  EXPECT_THROW(generate_synthetic(1, 5, 10, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(generate_synthetic(3, 5, 2, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(generate_synthetic(3, 5, 10, -1.0, 1), std::invalid_argument);
}

TEST(SplitHoldout, DisjointAndComplete) {
  const auto d = generate_synthetic(4, 3, 100, 1.0, 1);
  const auto [train, test] = split_holdout(d, 0.2, 9);
  EXPECT_EQ(test.size(), 20);
  EXPECT_EQ(train.size(), 80);
  const auto all = concatenate({&train, &test});
  EXPECT_EQ(sorted_first_column(all), sorted_first_column(d));
}

TEST(PartitionNoniid, ClientsHoldFewLabels) {
  const auto d = generate_synthetic(10, 4, 6000, 1.0, 1);
  const auto shards = partition_noniid(d, 50, 2, 7);
  ASSERT_EQ(shards.size(), 50u);
  for (const auto& s : shards) {
    const std::set<int> labels(s.data.labels.begin(), s.data.labels.end());
    EXPECT_LE(labels.size(), 3u) << "client " << s.client_id;
    EXPECT_GE(s.n(), 1);
  }
  EXPECT_EQ(sorted_first_column(shards), sorted_first_column(d));
}

TEST(PartitionNoniid, SingleClientHoldsEverything) {
  const auto d = generate_synthetic(5, 3, 300, 1.0, 2);
  const auto shards = partition_noniid(d, 1, 2, 3);
  ASSERT_EQ(shards.size(), 1u);
  EXPECT_EQ(shards[0].n(), d.size());
  EXPECT_EQ(sorted_first_column(shards), sorted_first_column(d));
}

TEST(PartitionNoniid, DeterministicAndRejectsInfeasible) {
  const auto d = generate_synthetic(5, 3, 300, 1.0, 2);
  const auto a = partition_noniid(d, 10, 2, 3);
  const auto b = partition_noniid(d, 10, 2, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].data.features, b[i].data.features);
  EXPECT_THROW(partition_noniid(d, 200, 2, 3), std::invalid_argument);
}

TEST(LognormalSizes, SumExactlyAndPositive) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sizes = lognormal_sizes(1000, 37, 1.5, seed);
    EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}), 1000);
    EXPECT_GE(*std::min_element(sizes.begin(), sizes.end()), 1);
  }
  EXPECT_THROW(lognormal_sizes(10, 11, 1.0, 1), std::invalid_argument);
}

TEST(LognormalSizes, ZeroSkewIsNearlyEqual) {
  const auto sizes = lognormal_sizes(1003, 10, 0.0, 1);
  const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  EXPECT_LE(double(*mx) / double(*mn), 2.0);
}

TEST(LognormalSizes, UnitSkewIsDispersed) {
  double mean_cv = 0.0;
  const int draws = 20;
  for (int s = 0; s < draws; ++s) {
    const auto sizes = lognormal_sizes(100000, 50, 1.0, static_cast<std::uint64_t>(s));
    double m = 0, v = 0;
    for (auto x : sizes) m += double(x);
    m /= double(sizes.size());
    for (auto x : sizes) v += (double(x) - m) * (double(x) - m);
    mean_cv += std::sqrt(v / double(sizes.size())) / m;
  }
  EXPECT_GT(mean_cv / draws, 0.5);
}

TEST(PartitionUnbalanced, ExactAndDeterministic) {
  const auto d = generate_synthetic(4, 3, 1000, 1.0, 1);
  for (const auto& shards : {partition_unbalanced(d, 20, 1.0, 5), partition_noniid_unbalanced(d, 20, 1.0, 5)}) {
    ASSERT_EQ(shards.size(), 20u);
    std::int64_t total = 0;
    for (const auto& s : shards) {
      EXPECT_GE(s.n(), 1);
      total += s.n();
    }
    EXPECT_EQ(total, d.size());
    EXPECT_EQ(sorted_first_column(shards), sorted_first_column(d));
  }
  EXPECT_EQ(partition_unbalanced(d, 20, 1.0, 5)[3].data.labels,
            partition_unbalanced(d, 20, 1.0, 5)[3].data.labels);
}

TEST(LoadCsv, ParsesHeaderAndLabels) {
  const auto path = std::filesystem::temp_directory_path() / "fedzip_test_load.csv";
  {
    std::ofstream out(path);
    out << "x0,x1,label\n1.5,2,0\n-1,0.25,2\n3,4,1\n";
  }
  const auto d = load_csv(path.string());
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 2, 1}));
  EXPECT_FLOAT_EQ(d.features(1, 1), 0.25f);
  std::filesystem::remove(path);
  EXPECT_THROW(load_csv(path.string()), std::runtime_error);
}

TEST(LoadCsv, RejectsBadLabel) {
  const auto path = std::filesystem::temp_directory_path() / "fedzip_test_bad.csv";
  {
    std::ofstream out(path);
    out << "1,2,-1\n";
  }
  EXPECT_ANY_THROW(load_csv(path.string()));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fedzip
