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

#include "fedzip/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "fedzip/random.hpp"

namespace fedzip {

namespace {

/// Start index of each cluster's run in `sorted` given ascending centroids.
/// Values at an exact midpoint go to the lower cluster.
std::vector<std::size_t> segment_starts(const std::vector<float>& sorted,
                                        const std::vector<double>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> starts(k + 1, 0);
  starts[k] = sorted.size();
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double mid = 0.5 * (centroids[j] + centroids[j + 1]);
    starts[j + 1] = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), mid,
                         [](double m, float v) { return m < static_cast<double>(v); }) -
        sorted.begin());
    starts[j + 1] = std::max(starts[j + 1], starts[j]);
  }
  return starts;
}

double segment_distortion(const std::vector<float>& sorted, std::size_t lo, std::size_t hi,
                          double c) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = static_cast<double>(sorted[i]) - c;
    s += d * d;
  }
  return s;
}

double total_distortion(const std::vector<float>& sorted, const std::vector<double>& centroids) {
  const auto starts = segment_starts(sorted, centroids);
  double s = 0.0;
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    s += segment_distortion(sorted, starts[j], starts[j + 1], centroids[j]);
  }
  return s;
}

/// Sorted value whose distance to the nearest centroid is largest; ties to
/// the smaller value.
double farthest_value(const std::vector<float>& sorted, std::vector<double> centroids) {
  std::sort(centroids.begin(), centroids.end());
  double best = sorted.front();
  double best_d = -1.0;
  std::size_t j = 0;
  for (float fv : sorted) {
    const double v = fv;
    while (j + 1 < centroids.size() && std::abs(centroids[j + 1] - v) <= std::abs(centroids[j] - v)) {
      ++j;
    }
    const double d = std::abs(centroids[j] - v);
    if (d > best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

}  // namespace

std::vector<ClusterLabel> assign_nearest(std::span<const float> values,
                                         std::span<const float> centroids) {
  std::vector<double> mids;
  for (std::size_t j = 0; j + 1 < centroids.size(); ++j) {
    mids.push_back(0.5 * (static_cast<double>(centroids[j]) + centroids[j + 1]));
  }
  std::vector<ClusterLabel> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    labels[i] = static_cast<ClusterLabel>(std::lower_bound(mids.begin(), mids.end(), v) -
                                          mids.begin());
  }
  return labels;
}

KMeansResult kmeans_1d(std::span<const float> values, int k, const KMeansOptions& options) {
  if (values.empty()) throw std::invalid_argument("kmeans_1d: empty input");
  if (k < 1 || k > kMaxClusters) {
    throw std::invalid_argument("kmeans_1d: k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(kMaxClusters) + "]");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("kmeans_1d: non-finite input value");
  }

  std::vector<float> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<float> distinct;
  for (float v : sorted) {
    if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
    if (distinct.size() > static_cast<std::size_t>(k)) break;
  }

  KMeansResult result;
  if (distinct.size() <= static_cast<std::size_t>(k)) {
    result.centroids = distinct;
    result.labels = assign_nearest(values, result.centroids);
    return result;
  }

  const std::size_t n = sorted.size();
  std::vector<double> centroids;
  for (int i = 0; i < k; ++i) {
    const double pct = k == 1 ? 50.0 : 10.0 + 80.0 * i / (k - 1);
    const auto idx = static_cast<std::size_t>(std::floor(pct / 100.0 * static_cast<double>(n - 1)));
    const double c = sorted[idx];
    if (std::find(centroids.begin(), centroids.end(), c) == centroids.end()) centroids.push_back(c);
  }
  while (centroids.size() < static_cast<std::size_t>(k)) {
    centroids.push_back(farthest_value(sorted, centroids));
  }
  std::sort(centroids.begin(), centroids.end());

  const double scale = std::max(std::abs(static_cast<double>(sorted.front())),
                                std::abs(static_cast<double>(sorted.back())));
  const double threshold = options.tol * scale;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const auto starts = segment_starts(sorted, centroids);
    std::vector<double> next(centroids.size());
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      const std::size_t lo = starts[j];
      const std::size_t hi = starts[j + 1];
      if (hi > lo) {
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += sorted[i];
        next[j] = sum / static_cast<double>(hi - lo);
      } else {
        next[j] = std::numeric_limits<double>::quiet_NaN();
      }
    }
    // Empty clusters restart at the worst-served value.
    for (auto& c : next) {
      if (std::isnan(c)) {
        std::vector<double> live;
        for (double x : next) {
          if (!std::isnan(x)) live.push_back(x);
        }
        c = farthest_value(sorted, live);
      }
    }
    std::sort(next.begin(), next.end());
    double moved = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) {
      moved = std::max(moved, std::abs(next[j] - centroids[j]));
    }
    centroids = std::move(next);
    result.iterations = iter + 1;
    if (options.track_distortion) {
      result.distortion_history.push_back(total_distortion(sorted, centroids));
    }
    if (moved < threshold) break;
  }

  result.centroids.assign(centroids.begin(), centroids.end());
  std::sort(result.centroids.begin(), result.centroids.end());
  result.labels = assign_nearest(values, result.centroids);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = static_cast<double>(values[i]) - result.centroids[result.labels[i]];
    result.distortion += d * d;
  }
  return result;
}

double silhouette_score(std::span<const float> values, std::span<const ClusterLabel> labels) {
  if (values.size() != labels.size()) {
    throw std::invalid_argument("silhouette_score: values and labels differ in length");
  }
  const int k = values.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<double>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < values.size(); ++i) groups[labels[i]].push_back(values[i]);
  std::vector<std::vector<double>> prefix(groups.size());
  int used = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::sort(groups[g].begin(), groups[g].end());
    prefix[g].assign(groups[g].size() + 1, 0.0);
    for (std::size_t i = 0; i < groups[g].size(); ++i) prefix[g][i + 1] = prefix[g][i] + groups[g][i];
    if (!groups[g].empty()) ++used;
  }
  if (used < 2) return 0.0;

  // Sum of |x - y| over y in group g, via the sorted prefix sums.
  auto abs_sum = [&](std::size_t g, double x) {
    const auto& grp = groups[g];
    const auto le = static_cast<std::size_t>(std::upper_bound(grp.begin(), grp.end(), x) - grp.begin());
    const double below = x * static_cast<double>(le) - prefix[g][le];
    const double above = (prefix[g].back() - prefix[g][le]) - x * static_cast<double>(grp.size() - le);
    return below + above;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t own = labels[i];
    const double x = values[i];
    if (groups[own].size() < 2) continue;  // singleton scores 0
    const double a = abs_sum(own, x) / static_cast<double>(groups[own].size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g == own || groups[g].empty()) continue;
      b = std::min(b, abs_sum(g, x) / static_cast<double>(groups[g].size()));
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<double>(values.size());
}

double sampled_silhouette(std::span<const float> values, std::span<const ClusterLabel> labels,
                          std::int64_t sample_cap, std::uint64_t seed) {
  const auto n = static_cast<std::int64_t>(values.size());
  if (sample_cap < 1) throw std::invalid_argument("sampled_silhouette: sample_cap must be >= 1");
  if (n <= sample_cap) return silhouette_score(values, labels);

  // Floyd's algorithm: sample_cap distinct indices in O(sample_cap).
  Rng rng(seed);
  std::unordered_set<std::int64_t> chosen;
  for (std::int64_t j = n - sample_cap; j < n; ++j) {
    const auto t = static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(j + 1)));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::int64_t> idx(chosen.begin(), chosen.end());
  std::sort(idx.begin(), idx.end());
  std::vector<float> sv;
  std::vector<ClusterLabel> sl;
  for (auto i : idx) {
    sv.push_back(values[static_cast<std::size_t>(i)]);
    sl.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return silhouette_score(sv, sl);
}

int silhouette_select_k(std::span<const float> values, KRange range, std::int64_t sample_cap,
                        std::uint64_t seed) {
  if (range.min < 2 || range.max > 8 || range.min > range.max) {
    throw std::invalid_argument("silhouette_select_k: k range must lie within [2, 8]");
  }
  if (sample_cap < 100) throw std::invalid_argument("silhouette_select_k: sample_cap must be >= 100");
  if (values.empty()) throw std::invalid_argument("silhouette_select_k: empty input");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return range.min;

  int best_k = range.min;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = range.min; k <= range.max; ++k) {
    const auto km = kmeans_1d(values, k);
    if (km.centroids.size() < static_cast<std::size_t>(k)) break;  // fewer distinct values than k
    const double s = sampled_silhouette(values, km.labels, sample_cap, seed);
    if (s > best) {
      best = s;
      best_k = k;
    }
  }
  return best_k;
}

std::vector<std::int64_t> QuantizedTensor::counts() const {
  std::vector<std::int64_t> c(centroids.size(), 0);
  for (auto l : labels) ++c[l];
  return c;
}

std::vector<ClusterLabel> frequency_order_of(std::span<const std::int64_t> counts) {
  std::vector<ClusterLabel> order(counts.size());
  std::iota(order.begin(), order.end(), ClusterLabel{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ClusterLabel a, ClusterLabel b) { return counts[a] > counts[b]; });
  return order;
}

QuantizedTensor quantize(const Tensor& t, int k, const KMeansOptions& options) {
  if (t.numel() == 0) throw std::invalid_argument("quantize: empty tensor '" + t.name + "'");
  auto km = kmeans_1d(std::span<const float>(t.values.data(), static_cast<std::size_t>(t.numel())),
                      k, options);
  QuantizedTensor q;
  q.name = t.name;
  q.shape = t.shape;
  q.kind = t.kind;
  q.labels = std::move(km.labels);
  q.centroids = std::move(km.centroids);
  const auto c = q.counts();
  q.frequency_order = frequency_order_of(c);
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  Tensor out(q.name, q.shape, q.kind);
  if (out.numel() != q.numel()) {
    throw std::invalid_argument("dequantize: label count does not match shape of '" + q.name + "'");
  }
  for (std::int64_t i = 0; i < q.numel(); ++i) {
    const auto l = q.labels[static_cast<std::size_t>(i)];
    if (l >= q.centroids.size()) {
      throw std::invalid_argument("dequantize: label out of range in '" + q.name + "'");
    }
    out.values(i) = q.centroids[l];
  }
  return out;
}

QuantizedTensor pad_clusters(QuantizedTensor q, int k) {
  if (k > kMaxClusters) throw std::invalid_argument("pad_clusters: k too large");
  if (q.centroids.empty()) throw std::invalid_argument("pad_clusters: no centroids");
  while (q.k() < k) q.centroids.push_back(q.centroids.back());
  q.frequency_order = frequency_order_of(q.counts());
  return q;
}

}  // namespace fedzip
