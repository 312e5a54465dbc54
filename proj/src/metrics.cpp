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

#include "fedzip/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fedzip {

using nlohmann::json;

std::uint64_t RoundResult::round_bits() const {
  return std::accumulate(uploaded_bits.begin(), uploaded_bits.end(), std::uint64_t{0});
}

double RoundResult::mean_compression_rate() const {
  if (compression_rate.empty()) return 0.0;
  return std::accumulate(compression_rate.begin(), compression_rate.end(), 0.0) /
         static_cast<double>(compression_rate.size());
}

double compression_rate(std::uint64_t baseline_bits, std::uint64_t encoded_bits) {
  if (encoded_bits == 0) throw std::invalid_argument("compression_rate: zero encoded bits");
  return static_cast<double>(baseline_bits) / static_cast<double>(encoded_bits);
}

std::uint64_t params_digest(const ModelParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t t = 0; t < params.tensor_count(); ++t) {
    for (float v : params.tensor(t).values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) {
        h ^= (bits >> (8 * b)) & 0xFFU;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

Histogram size_histogram(std::span<const std::uint64_t> sizes, int bins) {
  if (bins < 1) throw std::invalid_argument("size_histogram: bins must be >= 1");
  Histogram h;
  if (sizes.empty()) return h;
  const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  const double lo = static_cast<double>(*mn);
  double hi = static_cast<double>(*mx);
  if (hi == lo) hi = lo + 1.0;
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + width * b);
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (auto s : sizes) {
    auto b = static_cast<int>((static_cast<double>(s) - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

namespace {

json params_to_json(const ModelParams& p) {
  json tensors = json::array();
  for (std::size_t t = 0; t < p.tensor_count(); ++t) {
    const auto& x = p.tensor(t);
    tensors.push_back({{"name", x.name},
                       {"kind", to_string(x.kind)},
                       {"shape", x.shape},
                       {"values", std::vector<float>(x.values.begin(), x.values.end())}});
  }
  return {{"arch", p.arch.sizes}, {"tensors", tensors}};
}

ModelParams params_from_json(const json& j) {
  Architecture arch{j.at("arch").get<std::vector<int>>()};
  auto p = ModelParams::zeros(arch);
  const auto& tensors = j.at("tensors");
  if (tensors.size() != p.tensor_count()) throw std::runtime_error("params: tensor count mismatch");
  for (std::size_t t = 0; t < p.tensor_count(); ++t) {
    const auto values = tensors[t].at("values").get<std::vector<float>>();
    auto& x = p.tensor(t);
    if (static_cast<std::int64_t>(values.size()) != x.numel()) {
      throw std::runtime_error("params: value count mismatch in " + x.name);
    }
    x.values = Eigen::Map<const Eigen::VectorXf>(values.data(), x.numel());
  }
  return p;
}

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

json to_json(const RunLog& log) {
  json config = json::object();
  for (const auto& [k, v] : to_key_values(log.config)) config[k] = v;
  json rounds = json::array();
  for (const auto& r : log.rounds) {
    rounds.push_back({{"round", r.round},
                      {"train_loss", r.train_loss},
                      {"train_accuracy", r.train_accuracy},
                      {"test_loss", r.test_loss},
                      {"test_accuracy", r.test_accuracy},
                      {"clients", r.clients},
                      {"uploaded_bits", r.uploaded_bits},
                      {"compression_rate", r.compression_rate},
                      {"params_digest", params_digest(r.params)}});
  }
  json updates = json::array();
  for (const auto& u : log.updates) updates.push_back({u.round, u.client, u.bits});
  json j = {{"config", config},
            {"parameter_count", log.parameter_count},
            {"initial_test_accuracy", log.initial_test_accuracy},
            {"b_total", log.b_total},
            {"rounds", rounds},
            {"updates", updates}};
  if (!log.rounds.empty()) j["final_params"] = params_to_json(log.rounds.back().params);
  return j;
}

RunLog run_log_from_json(const json& j) {
  RunLog log;
  for (const auto& [k, v] : j.at("config").items()) {
    if (k == "csv" && v.get<std::string>().empty()) continue;
    apply_config_key(log.config, k, v.get<std::string>());
  }
  log.parameter_count = j.at("parameter_count").get<std::int64_t>();
  log.initial_test_accuracy = j.value("initial_test_accuracy", 0.0);
  log.b_total = j.at("b_total").get<std::uint64_t>();
  for (const auto& r : j.at("rounds")) {
    RoundResult rr;
    rr.round = r.at("round").get<int>();
    rr.train_loss = r.at("train_loss").get<double>();
    rr.train_accuracy = r.at("train_accuracy").get<double>();
    rr.test_loss = r.at("test_loss").get<double>();
    rr.test_accuracy = r.at("test_accuracy").get<double>();
    rr.clients = r.at("clients").get<std::vector<int>>();
    rr.uploaded_bits = r.at("uploaded_bits").get<std::vector<std::uint64_t>>();
    rr.compression_rate = r.at("compression_rate").get<std::vector<double>>();
    log.rounds.push_back(std::move(rr));
  }
  if (j.contains("final_params") && !log.rounds.empty()) {
    log.rounds.back().params = params_from_json(j.at("final_params"));
  }
  for (const auto& u : j.at("updates")) {
    log.updates.push_back({u.at(0).get<int>(), u.at(1).get<int>(), u.at(2).get<std::uint64_t>()});
  }
  return log;
}

void emit_run(const RunLog& log, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());

  write_text(out_dir / "run.json", to_json(log).dump(2) + "\n");

  std::ostringstream rounds;
  rounds << "round,train_loss,train_accuracy,test_loss,test_accuracy,uploaded_bits,mean_cr\n";
  for (const auto& r : log.rounds) {
    rounds << r.round << ',' << csv_double(r.train_loss) << ',' << csv_double(r.train_accuracy)
           << ',' << csv_double(r.test_loss) << ',' << csv_double(r.test_accuracy) << ','
           << r.round_bits() << ',' << csv_double(r.mean_compression_rate()) << '\n';
  }
  write_text(out_dir / "rounds.csv", rounds.str());

  std::vector<std::uint64_t> sizes;
  for (const auto& u : log.updates) sizes.push_back(u.bits);
  const auto h = size_histogram(sizes);
  std::ostringstream hist;
  hist << "bin,lower_bits,upper_bits,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    hist << b << ',' << csv_double(h.edges[b]) << ',' << csv_double(h.edges[b + 1]) << ','
         << h.counts[b] << '\n';
  }
  write_text(out_dir / "sizes_histogram.csv", hist.str());
}

RunLog load_run(const std::filesystem::path& run_dir) {
  const auto path = std::filesystem::is_directory(run_dir) ? run_dir / "run.json" : run_dir;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return run_log_from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
}

std::optional<int> rounds_to_accuracy(const RunLog& log, double threshold) {
  for (const auto& r : log.rounds) {
    if (r.test_accuracy >= threshold) return r.round;
  }
  return std::nullopt;
}

ComparisonReport compare_runs(std::span<const RunLog> logs) {
  if (logs.size() < 2) throw std::invalid_argument("compare_runs: need at least two runs");
  ComparisonReport report;
  report.baseline = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (logs[i].config.fed.mode == Mode::fedavg) {
      report.baseline = i;
      break;
    }
  }
  const auto& base = logs[report.baseline];
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    ComparisonRow row;
    row.label = std::string(to_string(log.config.fed.mode));
    if (log.config.fed.mode == Mode::fedzip) row.label += std::string("/") + to_string(log.config.fed.encoder);
    row.rounds = static_cast<int>(log.rounds.size());
    if (!log.rounds.empty()) {
      const auto& last = log.rounds.back();
      row.final_train_accuracy = last.train_accuracy;
      row.final_test_accuracy = last.test_accuracy;
      row.final_test_loss = last.test_loss;
      row.rounds_to_95 = rounds_to_accuracy(log, 0.95 * last.test_accuracy);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.rounds) {
      for (double cr : r.compression_rate) {
        sum += cr;
        row.max_cr = std::max(row.max_cr, cr);
        ++n;
      }
    }
    row.mean_cr = n ? sum / static_cast<double>(n) : 0.0;
    if (!base.rounds.empty()) {
      row.test_accuracy_delta = row.final_test_accuracy - base.rounds.back().test_accuracy;
    }
    report.rows.push_back(row);

    if (i != report.baseline) {
      const auto& a = base.config;
      const auto& b = log.config;
      if (!(a.data == b.data) || a.fed.seed != b.fed.seed || a.fed.num_clients != b.fed.num_clients) {
        report.warnings.push_back("run " + std::to_string(i) + " (" + row.label +
                                  ") differs from the baseline in data, seed or client count");
      }
    }
  }
  return report;
}

std::string format_report(const ComparisonReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %6s %9s %9s %9s %10s %10s %8s %9s\n", "run", "rounds",
                "train_acc", "test_acc", "test_loss", "mean_cr", "max_cr", "r@95%", "d_acc_pp");
  os << line;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const std::string r95 = r.rounds_to_95 ? std::to_string(*r.rounds_to_95) : "-";
    std::snprintf(line, sizeof line, "%-14s %6d %9.4f %9.4f %9.4f %10.2f %10.2f %8s %+9.2f%s\n",
                  r.label.c_str(), r.rounds, r.final_train_accuracy, r.final_test_accuracy,
                  r.final_test_loss, r.mean_cr, r.max_cr, r95.c_str(),
                  100.0 * r.test_accuracy_delta, i == report.baseline ? "  (baseline)" : "");
    os << line;
  }
  for (const auto& w : report.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace fedzip
