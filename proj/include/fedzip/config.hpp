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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedzip/codec.hpp"
#include "fedzip/sparsifier.hpp"

namespace fedzip {

enum class Mode { fedavg, fedsgd, fedzip };

const char* to_string(Mode m);
Mode parse_mode(const std::string& name);

struct FedConfig {
  int num_clients = 50;          // M
  double client_fraction = 1.0;  // C
  int local_epochs = 1;          // E
  std::optional<std::int64_t> batch_size = 32;  // B, nullopt = infinity
  double eta = 0.25;             // global learning rate
  float local_lr = 0.05f;
  int rounds = 20;               // N
  Mode mode = Mode::fedavg;
  Encoder encoder = Encoder::doap;  // θ
  SparsityConfig sparsity;
  int k = 3;
  std::uint64_t seed = 1;
  std::vector<int> hidden = {64};
  /// Concurrent client trainers per round; results are reduced in client order.
  int workers = 1;

  /// fedsgd pins E = 1 and B = infinity.
  FedConfig effective() const;
  void validate() const;

  friend bool operator==(const FedConfig&, const FedConfig&) = default;
};

/// Synthetic task and partition used by the `run` command.
struct DataConfig {
  int num_classes = 10;
  int dim = 20;
  std::int64_t samples = 30000;
  double class_separation = 7.0;
  double test_fraction = 0.2;
  /// "noniid", "iid", "unbalanced" or "noniid-unbalanced".
  std::string partition = "noniid";
  int shards_per_client = 2;
  double skew = 1.0;
  /// When set, features/labels come from this CSV instead of the generator.
  std::string csv_path;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct RunConfig {
  FedConfig fed;
  DataConfig data;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Global learning rate used when none is configured: 0.6 for fedsgd, else 0.25.
double default_eta(Mode m);

/// `key = value` lines, '#' comments; later keys override earlier ones.
/// Keys: see docs/config.md.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
/// Applies one key; throws std::invalid_argument for unknown keys or values.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);
std::map<std::string, std::string> to_key_values(const RunConfig& cfg);
std::string format_run_config(const RunConfig& cfg);

}  // namespace fedzip
