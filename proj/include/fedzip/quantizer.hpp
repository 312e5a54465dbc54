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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedzip/tensor.hpp"

namespace fedzip {

using ClusterLabel = std::uint8_t;
inline constexpr int kMaxClusters = 255;

struct KMeansOptions {
  int max_iter = 100;
  /// Convergence when every centroid moves less than tol * max|value|.
  double tol = 1e-6;
  /// Record the distortion after every iteration in KMeansResult::distortion_history.
  bool track_distortion = false;
};

struct KMeansResult {
  std::vector<float> centroids;  // ascending
  std::vector<ClusterLabel> labels;
  int iterations = 0;
  double distortion = 0.0;  // sum of squared distances to the assigned centroid
  std::vector<double> distortion_history;
};

/// Lloyd's algorithm on scalars. Centroids start at evenly spaced percentiles
/// between the 10th and 90th ({10, 50, 90} for k = 3); duplicate starts are
/// replaced by the value farthest from every chosen centroid. With at most k
/// distinct values the distinct values themselves are returned. Each value is
/// labelled with its nearest centroid, ties going to the lower centroid.
KMeansResult kmeans_1d(std::span<const float> values, int k, const KMeansOptions& options = {});

/// Nearest-centroid labels for ascending `centroids`, ties to the lower one.
std::vector<ClusterLabel> assign_nearest(std::span<const float> values,
                                         std::span<const float> centroids);

/// Exact mean silhouette coefficient of a labelled 1-D clustering. Points in
/// singleton clusters score 0. Returns 0 when fewer than two clusters are used.
double silhouette_score(std::span<const float> values, std::span<const ClusterLabel> labels);

/// silhouette_score on a uniform subsample (without replacement) of at most
/// `sample_cap` points.
double sampled_silhouette(std::span<const float> values, std::span<const ClusterLabel> labels,
                          std::int64_t sample_cap, std::uint64_t seed);

struct KRange {
  int min = 2;
  int max = 8;
};

/// k in `range` maximizing the sampled silhouette of kmeans_1d, ties to the
/// smaller k. All-equal input returns range.min.
int silhouette_select_k(std::span<const float> values, KRange range, std::int64_t sample_cap,
                        std::uint64_t seed);

struct QuantizedTensor {
  std::string name;
  Shape shape;
  TensorKind kind = TensorKind::weight;
  std::vector<ClusterLabel> labels;
  std::vector<float> centroids;
  /// Cluster ids by descending frequency, equal counts by ascending id.
  std::vector<ClusterLabel> frequency_order;

  int k() const { return static_cast<int>(centroids.size()); }
  std::int64_t numel() const { return static_cast<std::int64_t>(labels.size()); }
  std::vector<std::int64_t> counts() const;

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

std::vector<ClusterLabel> frequency_order_of(std::span<const std::int64_t> counts);

/// k-means over every value of `t`, zeros included.
QuantizedTensor quantize(const Tensor& t, int k, const KMeansOptions& options = {});

Tensor dequantize(const QuantizedTensor& q);

/// Appends unused clusters (count 0, value = last centroid) until q has k.
QuantizedTensor pad_clusters(QuantizedTensor q, int k);

}  // namespace fedzip
