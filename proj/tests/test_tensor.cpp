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
#include <limits>
#include <random>

#include "fedzip/tensor.hpp"

namespace fedzip {
namespace {

Tensor make(std::vector<float> v, TensorKind kind = TensorKind::weight) {
  Tensor::Vector values = Eigen::Map<Eigen::VectorXf>(v.data(), static_cast<Eigen::Index>(v.size()));
  return Tensor("layer0.weight", {static_cast<std::int64_t>(v.size())}, kind, values);
}

TEST(Tensor, ConstructorRejectsBadShapes) {
  EXPECT_THROW(Tensor("t", {0, 3}, TensorKind::weight), std::invalid_argument);
  EXPECT_THROW(Tensor("t", {2, 2}, TensorKind::weight, Eigen::VectorXf::Zero(3)),
               std::invalid_argument);
  const Tensor t("t", {2, 3}, TensorKind::bias);
  EXPECT_EQ(t.numel(), 6);
  EXPECT_EQ(count_nonzero(t), 0);
}

TEST(Tensor, NamesFollowLayerAndKind) {
  EXPECT_EQ(tensor_name(0, TensorKind::weight), "layer0.weight");
  EXPECT_EQ(tensor_name(3, TensorKind::bias), "layer3.bias");
  EXPECT_EQ(shape_to_string({4, 8}), "(4,8)");
}

TEST(Subtract, Examples) {
  EXPECT_EQ(subtract(make({1, 2}), make({1, 2})).values, Eigen::Vector2f(0, 0));
  const auto d = subtract(make({3, -1}), make({1, 1}));
  EXPECT_EQ(d.values, Eigen::Vector2f(2, -2));
  EXPECT_EQ(d.name, "layer0.weight");
}

TEST(Subtract, RejectsShapeMismatch) {
  EXPECT_THROW(subtract(make({1, 2}), make({1, 2, 3})), std::invalid_argument);
}

TEST(Subtract, RejectsNonFiniteResult) {
  const float big = std::numeric_limits<float>::max();
  EXPECT_THROW(subtract(make({big}), make({-big})), std::domain_error);
}

TEST(AddScaled, Examples) {
  EXPECT_EQ(add_scaled(make({1, 1}), make({0, 0}), 0.25f).values, Eigen::Vector2f(1, 1));
  EXPECT_EQ(add_scaled(make({1, 1}), make({4, -4}), 0.25f).values, Eigen::Vector2f(0, 2));
  EXPECT_THROW(add_scaled(make({1}), make({1, 1}), 1.0f), std::invalid_argument);
}

TEST(CountNonzero, Examples) {
  EXPECT_EQ(count_nonzero(make({0, 0, 0})), 0);
  EXPECT_EQ(count_nonzero(make({0, 1.5f, 0, -2})), 2);
}

// For b/2 <= a <= 2b both a - b and a - (a - b) are exact in binary floating point.
TEST(AddScaled, UndoesSubtractExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> mag(1e-3f, 1e3f), ratio(0.5f, 2.0f);
  std::bernoulli_distribution sign(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> a(50), b(50);
    for (int i = 0; i < 50; ++i) {
      b[i] = mag(rng) * (sign(rng) ? 1.0f : -1.0f);
      a[i] = b[i] * ratio(rng);
    }
    const auto ta = make(a), tb = make(b);
    EXPECT_EQ(add_scaled(ta, subtract(ta, tb), 1.0f), tb);
  }
}

TEST(Tensor, CastRoundTrip) {
  const auto t = make({0.1f, -3.5f, 7.0f});
  EXPECT_EQ(t.cast<double>().cast<float>(), t);
}

}  // namespace
}  // namespace fedzip
