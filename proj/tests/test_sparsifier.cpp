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

#include <cmath>
#include <random>

#include "fedzip/sparsifier.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fedzip {
namespace {

Tensor make(std::vector<float> v) {
  Tensor t("layer0.weight", {static_cast<std::int64_t>(v.size())}, TensorKind::weight);
  for (std::size_t i = 0; i < v.size(); ++i) t.values[static_cast<Eigen::Index>(i)] = v[i];
  return t;
}

std::vector<float> to_vec(const Tensor& t) { return {t.values.begin(), t.values.end()}; }

TEST(TopZ, KeepsTheLargestMagnitudes) {
  EXPECT_EQ(to_vec(top_z(make({3, -5, 1, 0.5f, -2}), 0.4)), (std::vector<float>{3, -5, 0, 0, 0}));
}

TEST(TopZ, FullKeepIsIdentity) {
  const auto t = testing::random_tensor(1000, 3);
  EXPECT_EQ(top_z(t, 1.0), t);
}

TEST(TopZ, TiesGoToLowerIndex) {
  EXPECT_EQ(to_vec(top_z(make({1, -2, 2, -2, 1}), 0.4)), (std::vector<float>{0, -2, 2, 0, 0}));
}

TEST(TopZ, CountIsCeilOfFraction) {
  EXPECT_EQ(top_z_count(10, 0.1), 1);
  EXPECT_EQ(top_z_count(10, 0.11), 2);
  EXPECT_EQ(top_z_count(3, 0.01), 1);
  EXPECT_EQ(top_z_count(100, 0.3), 30);
  EXPECT_EQ(count_nonzero(top_z(testing::random_tensor(997, 1), 0.1)), 100);
}

TEST(TopZ, RejectsBadInput) {
  EXPECT_THROW(top_z(make({1, 2}), 0.0), std::invalid_argument);
  EXPECT_THROW(top_z(make({1, 2}), 1.5), std::invalid_argument);
  EXPECT_THROW(top_z(Tensor{}, 0.5), std::invalid_argument);
}

TEST(TopZ, MatchesSortOracleWithDuplicates) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::int64_t>(1 + rng() % 400);
    std::vector<float> v(static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> small(-4, 4);
    for (auto& x : v) x = trial % 2 ? float(small(rng)) : std::ldexp(float(small(rng)), -3);
    const double z = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    EXPECT_EQ(to_vec(top_z(make(v), z)), oracle::top_z(v, top_z_count(n, z))) << "trial " << trial;
  }
}

TEST(TopZ, IdempotentAndEnergyNonIncreasing) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto t = testing::random_tensor(500, s);
    const auto once = top_z(t, 0.2);
    EXPECT_EQ(top_z(once, 0.2), once);
    EXPECT_LE(once.values.squaredNorm(), t.values.squaredNorm());
    for (Eigen::Index i = 0; i < t.numel(); ++i) {
      if (once.values[i] != 0.0f) EXPECT_EQ(once.values[i], t.values[i]);
    }
  }
}

TEST(Sparsify, UsesKindSpecificFractions) {
  Tensor w = testing::random_tensor(100, 1);
  Tensor b = testing::random_tensor(100, 2);
  b.kind = TensorKind::bias;
  SparsityConfig cfg;
  cfg.weight_keep_fraction = 0.1;
  cfg.bias_keep_fraction = 0.5;
  const auto out = sparsify({w, b}, cfg);
  EXPECT_EQ(count_nonzero(out[0]), 10);
  EXPECT_EQ(count_nonzero(out[1]), 50);
  cfg.bias_keep_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace fedzip
