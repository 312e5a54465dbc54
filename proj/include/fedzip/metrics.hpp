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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedzip/config.hpp"
#include "fedzip/model.hpp"

namespace fedzip {

struct RoundResult {
  int round = 0;  // 1-based
  ModelParams params;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::vector<int> clients;  // sampled ids, ascending
  std::vector<std::uint64_t> uploaded_bits;
  std::vector<double> compression_rate;

  std::uint64_t round_bits() const;
  double mean_compression_rate() const;

  friend bool operator==(const RoundResult&, const RoundResult&) = default;
};

struct UpdateRecord {
  int round = 0;
  int client = 0;
  std::uint64_t bits = 0;

  friend bool operator==(const UpdateRecord&, const UpdateRecord&) = default;
};

struct RunLog {
  RunConfig config;
  std::int64_t parameter_count = 0;
  double initial_test_accuracy = 0.0;
  std::vector<RoundResult> rounds;
  std::vector<UpdateRecord> updates;
  std::uint64_t b_total = 0;

  friend bool operator==(const RunLog& a, const RunLog& b) {
    return a.config.fed == b.config.fed && a.config.data == b.config.data &&
           a.parameter_count == b.parameter_count &&
           a.initial_test_accuracy == b.initial_test_accuracy && a.rounds == b.rounds &&
           a.updates == b.updates && a.b_total == b.b_total;
  }
};

/// baseline_bits / encoded_bits; baseline is 32 bits per parameter.
double compression_rate(std::uint64_t baseline_bits, std::uint64_t encoded_bits);

/// FNV-1a over the IEEE bit patterns of every parameter, in tensor order.
std::uint64_t params_digest(const ModelParams& params);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::uint64_t> counts;
};

/// Equal-width bins over [min, max] of the observed sizes; the last bin is
/// closed on the right. Empty input yields no bins.
Histogram size_histogram(std::span<const std::uint64_t> sizes, int bins = 32);

nlohmann::json to_json(const RunLog& log);
RunLog run_log_from_json(const nlohmann::json& j);

/// Writes run.json, rounds.csv and sizes_histogram.csv into `out_dir`.
void emit_run(const RunLog& log, const std::filesystem::path& out_dir);
RunLog load_run(const std::filesystem::path& run_dir);

/// First round whose test accuracy reaches `threshold`.
std::optional<int> rounds_to_accuracy(const RunLog& log, double threshold);

struct ComparisonRow {
  std::string label;
  double final_train_accuracy = 0.0;
  double final_test_accuracy = 0.0;
  double final_test_loss = 0.0;
  double mean_cr = 0.0;
  double max_cr = 0.0;
  std::optional<int> rounds_to_95;  // of this run's own final accuracy
  int rounds = 0;
  double test_accuracy_delta = 0.0;  // vs. baseline row, in accuracy units
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::size_t baseline = 0;  // first fedavg run, else the first run
  std::vector<std::string> warnings;
};

ComparisonReport compare_runs(std::span<const RunLog> logs);
std::string format_report(const ComparisonReport& report);

}  // namespace fedzip
