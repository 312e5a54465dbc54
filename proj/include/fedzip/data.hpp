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
#include <string>
#include <utility>
#include <vector>

#include "fedzip/model.hpp"

namespace fedzip {

struct ClientShard {
  int client_id = 0;
  LabeledDataset data;

  std::int64_t n() const { return data.size(); }
};

/// Gaussian blobs with unit variance. Class means sit on scaled coordinate
/// axes so that any two means are exactly `class_separation` apart (random
/// directions when num_classes > dim). Labels are balanced up to one point.
LabeledDataset generate_synthetic(int num_classes, int dim, std::int64_t n,
                                  double class_separation, std::uint64_t seed);

/// Random split into (train, test) with round(test_fraction * n) test rows.
std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& data,
                                                        double test_fraction, std::uint64_t seed);

/// Label-sorted shard partition: the data is stably sorted by label, cut into
/// M * shards_per_client contiguous shards, and every client draws
/// shards_per_client of them at random.
std::vector<ClientShard> partition_noniid(const LabeledDataset& data, int num_clients,
                                          int shards_per_client, std::uint64_t seed);

/// IID partition with client sizes proportional to lognormal(0, skew) draws,
/// at least one point per client.
std::vector<ClientShard> partition_unbalanced(const LabeledDataset& data, int num_clients,
                                              double skew, std::uint64_t seed);

/// Non-iid and unbalanced: label-sorted data cut into contiguous client
/// blocks whose sizes follow the lognormal scheme of partition_unbalanced.
std::vector<ClientShard> partition_noniid_unbalanced(const LabeledDataset& data, int num_clients,
                                                     double skew, std::uint64_t seed);

/// Client sizes summing to `n`, proportional to lognormal(0, skew), each >= 1.
std::vector<std::int64_t> lognormal_sizes(std::int64_t n, int num_clients, double skew,
                                          std::uint64_t seed);

/// CSV with numeric feature columns and an integer label column. A header
/// row is skipped when its first field is not numeric. label_column < 0
/// counts from the end (-1 = last column).
LabeledDataset load_csv(const std::string& path, int label_column = -1);

}  // namespace fedzip
