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

#include "fedzip/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fedzip {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::fedavg: return "fedavg";
    case Mode::fedsgd: return "fedsgd";
    case Mode::fedzip: return "fedzip";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "fedavg") return Mode::fedavg;
  if (name == "fedsgd") return Mode::fedsgd;
  if (name == "fedzip") return Mode::fedzip;
  throw std::invalid_argument("unknown mode '" + name + "' (expected fedavg, fedsgd or fedzip)");
}

FedConfig FedConfig::effective() const {
  FedConfig c = *this;
  if (c.mode == Mode::fedsgd) {
    c.local_epochs = 1;
    c.batch_size.reset();
  }
  return c;
}

void FedConfig::validate() const {
  if (num_clients < 1) throw std::invalid_argument("config: clients must be >= 1");
  if (client_fraction < 0 || client_fraction > 1) {
    throw std::invalid_argument("config: client fraction must be in [0, 1]");
  }
  if (local_epochs < 1) throw std::invalid_argument("config: local epochs must be >= 1");
  if (batch_size && *batch_size < 1) throw std::invalid_argument("config: batch size must be >= 1");
  if (rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
  if (k < 1 || k > kMaxClusters) throw std::invalid_argument("config: k must be in [1, 255]");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (!(eta > 0)) throw std::invalid_argument("config: eta must be > 0");
  sparsity.validate();
  if (mode == Mode::fedzip && encoder != Encoder::huffman && k != 3) {
    throw std::invalid_argument(std::string("config: ") + to_string(encoder) +
                                " encoding requires k = 3");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (is.fail() || !(is >> std::ws).eof()) {
    throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream is(value);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<int>(key, item));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& f = cfg.fed;
  auto& d = cfg.data;
  if (key == "clients") f.num_clients = parse_number<int>(key, value);
  else if (key == "client_fraction") f.client_fraction = parse_number<double>(key, value);
  else if (key == "local_epochs") f.local_epochs = parse_number<int>(key, value);
  else if (key == "batch_size") {
    if (value == "inf" || value == "infinity" || value == "full") f.batch_size.reset();
    else f.batch_size = parse_number<std::int64_t>(key, value);
  } else if (key == "eta") f.eta = parse_number<double>(key, value);
  else if (key == "local_lr") f.local_lr = parse_number<float>(key, value);
  else if (key == "rounds") f.rounds = parse_number<int>(key, value);
  else if (key == "mode") f.mode = parse_mode(value);
  else if (key == "encoder") f.encoder = parse_encoder(value);
  else if (key == "keep_fraction") f.sparsity.weight_keep_fraction = parse_number<double>(key, value);
  else if (key == "bias_keep_fraction") f.sparsity.bias_keep_fraction = parse_number<double>(key, value);
  else if (key == "k") f.k = parse_number<int>(key, value);
  else if (key == "seed") f.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "hidden") f.hidden = parse_int_list(key, value);
  else if (key == "workers") f.workers = parse_number<int>(key, value);
  else if (key == "num_classes") d.num_classes = parse_number<int>(key, value);
  else if (key == "dim") d.dim = parse_number<int>(key, value);
  else if (key == "samples") d.samples = parse_number<std::int64_t>(key, value);
  else if (key == "class_separation") d.class_separation = parse_number<double>(key, value);
  else if (key == "test_fraction") d.test_fraction = parse_number<double>(key, value);
  else if (key == "partition") {
    if (value != "noniid" && value != "iid" && value != "unbalanced" && value != "noniid-unbalanced") {
      throw std::invalid_argument("config: unknown partition '" + value + "'");
    }
    d.partition = value;
  } else if (key == "shards_per_client") d.shards_per_client = parse_number<int>(key, value);
  else if (key == "skew") d.skew = parse_number<double>(key, value);
  else if (key == "csv") d.csv_path = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

double default_eta(Mode m) { return m == Mode::fedsgd ? 0.6 : 0.25; }

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  bool eta_given = false;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    eta_given = eta_given || key == "eta";
    try {
      apply_config_key(cfg, key, trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!eta_given) cfg.fed.eta = default_eta(cfg.fed.mode);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::map<std::string, std::string> to_key_values(const RunConfig& cfg) {
  const auto& f = cfg.fed;
  const auto& d = cfg.data;
  return {
      {"clients", std::to_string(f.num_clients)},
      {"client_fraction", num(f.client_fraction)},
      {"local_epochs", std::to_string(f.local_epochs)},
      {"batch_size", f.batch_size ? std::to_string(*f.batch_size) : "inf"},
      {"eta", num(f.eta)},
      {"local_lr", num(f.local_lr)},
      {"rounds", std::to_string(f.rounds)},
      {"mode", to_string(f.mode)},
      {"encoder", to_string(f.encoder)},
      {"keep_fraction", num(f.sparsity.weight_keep_fraction)},
      {"bias_keep_fraction", num(f.sparsity.bias_keep_fraction)},
      {"k", std::to_string(f.k)},
      {"seed", std::to_string(f.seed)},
      {"hidden", join(f.hidden)},
      {"workers", std::to_string(f.workers)},
      {"num_classes", std::to_string(d.num_classes)},
      {"dim", std::to_string(d.dim)},
      {"samples", std::to_string(d.samples)},
      {"class_separation", num(d.class_separation)},
      {"test_fraction", num(d.test_fraction)},
      {"partition", d.partition},
      {"shards_per_client", std::to_string(d.shards_per_client)},
      {"skew", num(d.skew)},
      {"csv", d.csv_path},
  };
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) {
    if (k == "csv" && v.empty()) continue;
    out += k + " = " + v + "\n";
  }
  return out;
}

}  // namespace fedzip
