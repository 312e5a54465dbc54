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
#include <vector>

#include "fedzip/codec.hpp"
#include "fedzip/config.hpp"
#include "fedzip/data.hpp"
#include "fedzip/metrics.hpp"
#include "fedzip/model.hpp"

namespace fedzip {

/// max(round(C * M), 1) distinct client ids drawn uniformly for round t,
/// returned in ascending order.
std::vector<int> sample_clients(int num_clients, double client_fraction, std::uint64_t seed,
                                int round);

struct ClientDelta {
  std::vector<Tensor> delta;  // canonical tensor order
  std::int64_t n_m = 0;
};

/// w_t - eta * sum_m (n_m / sum n) * delta_m per tensor, accumulated in
/// double, rounded to float.
ModelParams aggregate(std::span<const ClientDelta> deltas, const ModelParams& w_t, double eta);

/// Δw = w_t - w_{t+1,m} for every tensor.
std::vector<Tensor> model_delta(const ModelParams& w_t, const ModelParams& w_local);

/// Client side of FedZip: top-z, k-means, then the configured encoder.
EncodedUpdate encode_update(std::span<const Tensor> delta, const FedConfig& config,
                            std::uint32_t client_id, std::uint64_t n_m, std::uint32_t round);

/// Server side: decode every tensor and replace labels by centroids.
std::vector<Tensor> decode_update(const EncodedUpdate& update);

struct ClientUpload {
  ClientDelta delta;  // as reconstructed by the server
  std::uint64_t uploaded_bits = 0;
};

/// Local training from the broadcast model followed by the upload path of
/// the configured mode. Uncompressed modes upload 32 bits per parameter.
ClientUpload client_update(const FedConfig& config, const ModelParams& global,
                           const ClientShard& shard, int round);

struct Experiment {
  std::vector<ClientShard> shards;
  LabeledDataset test;
};

/// Dataset (synthetic or CSV), holdout split and client partition described
/// by `config.data`, all seeded from `config.fed.seed`.
Experiment make_experiment(const RunConfig& config);

/// Runs `config.rounds` synchronous rounds starting from `initial`.
RunLog run(const FedConfig& config, std::span<const ClientShard> shards,
           const LabeledDataset& test, const ModelParams& initial);

/// As above, with He-initialised parameters drawn from the config seed.
RunLog run(const FedConfig& config, std::span<const ClientShard> shards,
           const LabeledDataset& test);

/// make_experiment followed by run; the log records the full configuration.
RunLog run(const RunConfig& config);

}  // namespace fedzip
