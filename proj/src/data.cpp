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

#include "fedzip/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fedzip/random.hpp"

namespace fedzip {

LabeledDataset generate_synthetic(int num_classes, int dim, std::int64_t n,
                                  double class_separation, std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("generate_synthetic: num_classes must be >= 2");
  if (dim < 2) throw std::invalid_argument("generate_synthetic: dim must be >= 2");
  if (n < num_classes) throw std::invalid_argument("generate_synthetic: n must be >= num_classes");
  if (class_separation < 0) {
    throw std::invalid_argument("generate_synthetic: class_separation must be >= 0");
  }

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(num_classes, dim);
  const double radius = class_separation / std::sqrt(2.0);
  if (num_classes <= dim) {
    for (int c = 0; c < num_classes; ++c) means(c, c) = radius;
  } else {
    for (int c = 0; c < num_classes; ++c) {
      Eigen::VectorXd dir(dim);
      for (int j = 0; j < dim; ++j) dir(j) = normal(rng);
      means.row(c) = radius * dir.normalized().transpose();
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % num_classes);
  shuffle_in_place(labels, rng);

  LabeledDataset out;
  out.num_classes = num_classes;
  out.features.resize(n, dim);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      out.features(i, j) = static_cast<float>(means(labels[i], j) + normal(rng));
    }
  }
  out.labels = std::move(labels);
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& data,
                                                        double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0 || test_fraction >= 1) {
    throw std::invalid_argument("split_holdout: test_fraction must be in (0, 1)");
  }
  std::vector<std::int64_t> idx(static_cast<std::size_t>(data.size()));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  shuffle_in_place(idx, rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * data.size()));
  if (n_test == 0 || n_test >= idx.size()) {
    throw std::invalid_argument("split_holdout: split leaves an empty side");
  }
  std::vector<std::int64_t> test(idx.begin(), idx.begin() + n_test);
  std::vector<std::int64_t> train(idx.begin() + n_test, idx.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.subset(train), data.subset(test)};
}

namespace {

std::vector<std::int64_t> label_sorted_order(const LabeledDataset& data) {
  std::vector<std::int64_t> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return data.labels[a] < data.labels[b]; });
  return order;
}

/// Cuts `order` into consecutive blocks of the given sizes.
std::vector<ClientShard> cut_blocks(const LabeledDataset& data,
                                    const std::vector<std::int64_t>& order,
                                    const std::vector<std::int64_t>& sizes) {
  std::vector<ClientShard> shards;
  std::size_t at = 0;
  for (std::size_t m = 0; m < sizes.size(); ++m) {
    std::vector<std::int64_t> rows(order.begin() + at, order.begin() + at + sizes[m]);
    at += sizes[m];
    shards.push_back({static_cast<int>(m), data.subset(rows)});
  }
  return shards;
}

}  // namespace

std::vector<ClientShard> partition_noniid(const LabeledDataset& data, int num_clients,
                                          int shards_per_client, std::uint64_t seed) {
  if (num_clients < 1 || shards_per_client < 1) {
    throw std::invalid_argument("partition_noniid: clients and shards per client must be >= 1");
  }
  const std::int64_t n = data.size();
  const std::int64_t num_shards = std::int64_t{num_clients} * shards_per_client;
  if (num_shards > n) {
    throw std::invalid_argument("partition_noniid: " + std::to_string(num_shards) +
                                " shards requested from " + std::to_string(n) + " points");
  }
  const auto order = label_sorted_order(data);

  // Shard s covers [s*n/S, (s+1)*n/S).
  std::vector<std::int64_t> shard_ids(static_cast<std::size_t>(num_shards));
  std::iota(shard_ids.begin(), shard_ids.end(), 0);
  Rng rng(seed);
  shuffle_in_place(shard_ids, rng);

  std::vector<ClientShard> out;
  for (int m = 0; m < num_clients; ++m) {
    std::vector<std::int64_t> mine(shard_ids.begin() + std::int64_t{m} * shards_per_client,
                                   shard_ids.begin() + std::int64_t{m + 1} * shards_per_client);
    std::sort(mine.begin(), mine.end());
    std::vector<std::int64_t> rows;
    for (auto s : mine) {
      const std::int64_t lo = s * n / num_shards;
      const std::int64_t hi = (s + 1) * n / num_shards;
      rows.insert(rows.end(), order.begin() + lo, order.begin() + hi);
    }
    out.push_back({m, data.subset(rows)});
  }
  return out;
}

std::vector<std::int64_t> lognormal_sizes(std::int64_t n, int num_clients, double skew,
                                          std::uint64_t seed) {
  if (num_clients < 1) throw std::invalid_argument("partition: num_clients must be >= 1");
  if (skew < 0) throw std::invalid_argument("partition: skew must be >= 0");
  if (num_clients > n) {
    throw std::invalid_argument("partition: " + std::to_string(num_clients) + " clients for " +
                                std::to_string(n) + " points");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> weight(static_cast<std::size_t>(num_clients));
  for (auto& w : weight) w = std::exp(skew * normal(rng));
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);

  // One point reserved per client, the rest split by largest remainder.
  const std::int64_t spare = n - num_clients;
  std::vector<std::int64_t> sizes(weight.size(), 1);
  std::vector<std::pair<double, std::size_t>> remainder;
  std::int64_t assigned = 0;
  for (std::size_t m = 0; m < weight.size(); ++m) {
    const double exact = static_cast<double>(spare) * weight[m] / total;
    const auto whole = static_cast<std::int64_t>(std::floor(exact));
    sizes[m] += whole;
    assigned += whole;
    remainder.emplace_back(exact - static_cast<double>(whole), m);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t i = 0; i < spare - assigned; ++i) {
    ++sizes[remainder[static_cast<std::size_t>(i) % remainder.size()].second];
  }
  return sizes;
}

std::vector<ClientShard> partition_unbalanced(const LabeledDataset& data, int num_clients,
                                              double skew, std::uint64_t seed) {
  const auto sizes = lognormal_sizes(data.size(), num_clients, skew, seed);
  std::vector<std::int64_t> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {1}));
  shuffle_in_place(order, rng);
  return cut_blocks(data, order, sizes);
}

std::vector<ClientShard> partition_noniid_unbalanced(const LabeledDataset& data, int num_clients,
                                                     double skew, std::uint64_t seed) {
  const auto sizes = lognormal_sizes(data.size(), num_clients, skew, seed);
  return cut_blocks(data, label_sorted_order(data), sizes);
}

namespace {

bool parse_double(const std::string& field, double& out) {
  std::istringstream is(field);
  is >> out;
  if (is.fail()) return false;
  is >> std::ws;
  return is.eof();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

LabeledDataset load_csv(const std::string& path, int label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t width = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    double probe = 0;
    if (rows.empty() && labels.empty() && !parse_double(fields.front(), probe)) continue;
    if (width == 0) width = fields.size();
    if (fields.size() != width || width < 2) {
      throw std::runtime_error("load_csv: '" + path + "' line " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width));
    }
    const int lc = label_column < 0 ? static_cast<int>(width) + label_column : label_column;
    if (lc < 0 || lc >= static_cast<int>(width)) {
      throw std::invalid_argument("load_csv: label column out of range");
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < width; ++j) {
      double v = 0;
      if (!parse_double(fields[j], v)) {
        throw std::runtime_error("load_csv: '" + path + "' line " + std::to_string(line_no) +
                                 ": non-numeric field '" + fields[j] + "'");
      }
      if (static_cast<int>(j) == lc) {
        if (v < 0 || v != std::floor(v)) {
          throw std::runtime_error("load_csv: '" + path + "' line " + std::to_string(line_no) +
                                   ": label must be a non-negative integer");
        }
        labels.push_back(static_cast<int>(v));
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: '" + path + "' contains no data rows");

  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<float>(rows[i][j]);
    }
  }
  out.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  out.labels = std::move(labels);
  return out;
}

}  // namespace fedzip
