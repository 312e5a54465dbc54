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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <list>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedzip/codec.hpp"
#include "fedzip/config.hpp"
#include "fedzip/metrics.hpp"
#include "fedzip/orchestrator.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fedzip::TensorKind parse_kind(const std::string& s) {
  if (s == "weight") return fedzip::TensorKind::weight;
  if (s == "bias") return fedzip::TensorKind::bias;
  throw std::invalid_argument("unknown tensor kind '" + s + "'");
}

// {"tensors": [{"name", "kind", "shape", "values"}, ...]}
std::vector<fedzip::Tensor> tensors_from_json(const json& j) {
  std::vector<fedzip::Tensor> out;
  for (const auto& t : j.at("tensors")) {
    const auto values = t.at("values").get<std::vector<float>>();
    fedzip::Tensor::Vector v = Eigen::Map<const Eigen::VectorXf>(values.data(),
                                                                 static_cast<Eigen::Index>(values.size()));
    out.emplace_back(t.at("name").get<std::string>(), t.at("shape").get<fedzip::Shape>(),
                     parse_kind(t.value("kind", std::string("weight"))), std::move(v));
  }
  return out;
}

json tensors_to_json(const std::vector<fedzip::Tensor>& ts) {
  json arr = json::array();
  for (const auto& t : ts) {
    arr.push_back({{"name", t.name},
                   {"kind", fedzip::to_string(t.kind)},
                   {"shape", t.shape},
                   {"values", std::vector<float>(t.values.begin(), t.values.end())}});
  }
  return {{"tensors", arr}};
}

void print_info(const fedzip::EncodedUpdate& u) {
  std::printf("client %u  n_m %llu  round %u  tensors %zu\n", u.client_id,
              static_cast<unsigned long long>(u.n_m), u.round, u.tensors.size());
  std::printf("%-16s %-12s %-8s %3s %12s %10s %10s %10s\n", "tensor", "shape", "encoder", "k",
              "payload_b", "header_b", "cr_payload", "cr_total");
  std::uint64_t elems = 0;
  for (const auto& t : u.tensors) {
    const auto& h = t.header;
    const auto payload = fedzip::encoded_size_bits(t, false);
    const auto numel = fedzip::shape_numel(h.shape);
    elems += static_cast<std::uint64_t>(numel);
    const double cr_payload = payload ? 32.0 * numel / static_cast<double>(payload) : 0.0;
    std::printf("%-16s %-12s %-8s %3d %12llu %10llu %10.2f %10.2f\n", h.name.c_str(),
                fedzip::shape_to_string(h.shape).c_str(), fedzip::to_string(h.encoder), h.k(),
                static_cast<unsigned long long>(payload),
                static_cast<unsigned long long>(fedzip::header_bits(h)), cr_payload,
                fedzip::tensor_compression_rate(t, true));
  }
  const auto total = fedzip::update_size_bits(u);
  std::printf("update: %llu bits (%llu bytes), CR %.2f\n", static_cast<unsigned long long>(total),
              static_cast<unsigned long long>((total + 7) / 8),
              fedzip::compression_rate(32 * elems, 8 * ((total + 7) / 8)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedZip federated learning simulator and update codec"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a federated training experiment");
  std::string config_path, out_dir = "run_out";
  // Flag values are appended to the config text as `key = value` lines.
  std::list<std::pair<std::string, std::string>> overrides;
  auto add_override = [&](const char* flag, const char* key, const char* help) {
    auto& slot = overrides.emplace_back(key, "");
    run_cmd->add_option(flag, slot.second, help);
  };
  run_cmd->add_option("--config", config_path, "key = value configuration file");
  add_override("--mode", "mode", "fedavg, fedsgd or fedzip");
  add_override("--encoder", "encoder", "huffman, ap or doap");
  add_override("--rounds", "rounds", "communication rounds N");
  add_override("--clients", "clients", "total clients M");
  add_override("--client-frac", "client_fraction", "client fraction C");
  add_override("--keep-frac", "keep_fraction", "top-z keep fraction for weights");
  add_override("--bias-keep-frac", "bias_keep_fraction", "top-z keep fraction for biases");
  add_override("--k", "k", "k-means clusters");
  add_override("--seed", "seed", "experiment seed");
  add_override("--eta", "eta", "global learning rate");
  add_override("--workers", "workers", "concurrent client trainers");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* cmp_cmd = app.add_subcommand("compare", "Compare finished runs");
  std::vector<std::string> run_dirs;
  cmp_cmd->add_option("runs", run_dirs, "run directories or run.json files")->required()->expected(2, -1);

  auto* codec_cmd = app.add_subcommand("codec", "Encode, decode or inspect update files");
  codec_cmd->require_subcommand(1);
  auto* enc_cmd = codec_cmd->add_subcommand("encode", "JSON tensors to an update file");
  std::string in_path, out_path;
  fedzip::RunConfig codec_cfg;
  std::string enc_name = "doap";
  std::uint32_t client_id = 0, round = 0;
  std::uint64_t n_m = 1;
  enc_cmd->add_option("input", in_path, "tensor JSON")->required();
  enc_cmd->add_option("output", out_path, "update file")->required();
  enc_cmd->add_option("--encoder", enc_name, "huffman, ap or doap");
  enc_cmd->add_option("--k", codec_cfg.fed.k, "k-means clusters");
  enc_cmd->add_option("--keep-frac", codec_cfg.fed.sparsity.weight_keep_fraction, "weight keep fraction");
  enc_cmd->add_option("--bias-keep-frac", codec_cfg.fed.sparsity.bias_keep_fraction, "bias keep fraction");
  enc_cmd->add_option("--client", client_id, "client id");
  enc_cmd->add_option("--round", round, "round index");
  enc_cmd->add_option("--n", n_m, "client data point count");
  auto* dec_cmd = codec_cmd->add_subcommand("decode", "Update file to JSON tensors");
  dec_cmd->add_option("input", in_path, "update file")->required();
  dec_cmd->add_option("output", out_path, "tensor JSON (stdout when omitted)");
  auto* info_cmd = codec_cmd->add_subcommand("info", "Per-tensor size and CR table");
  info_cmd->add_option("input", in_path, "update file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      std::string text = config_path.empty() ? "" : read_file(config_path);
      text += "\n";
      for (const auto& [k, v] : overrides) {
        if (!v.empty()) text += k + " = " + v + "\n";
      }
      const auto cfg = fedzip::parse_run_config(text);
      cfg.fed.validate();
      const auto log = fedzip::run(cfg);
      fedzip::emit_run(log, out_dir);
      const auto& last = log.rounds.empty() ? fedzip::RoundResult{} : log.rounds.back();
      std::printf("%s: %d rounds, test accuracy %.4f, last-round mean CR %.2f, %llu bits uploaded -> %s\n",
                  fedzip::to_string(cfg.fed.mode), static_cast<int>(log.rounds.size()),
                  last.test_accuracy, last.mean_compression_rate(),
                  static_cast<unsigned long long>(log.b_total), out_dir.c_str());
    } else if (*cmp_cmd) {
      std::vector<fedzip::RunLog> logs;
      for (const auto& d : run_dirs) logs.push_back(fedzip::load_run(d));
      std::cout << fedzip::format_report(fedzip::compare_runs(logs));
    } else if (*enc_cmd) {
      codec_cfg.fed.encoder = fedzip::parse_encoder(enc_name);
      codec_cfg.fed.mode = fedzip::Mode::fedzip;
      codec_cfg.fed.validate();
      const auto tensors = tensors_from_json(json::parse(read_file(in_path)));
      const auto u = fedzip::encode_update(tensors, codec_cfg.fed, client_id, n_m, round);
      fedzip::write_update_file(out_path, u);
      print_info(u);
    } else if (*dec_cmd) {
      const auto u = fedzip::read_update_file(in_path);
      const auto text = tensors_to_json(fedzip::decode_update(u)).dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_path);
        if (!(out << text)) throw std::runtime_error("cannot write '" + out_path + "'");
      }
    } else if (*info_cmd) {
      print_info(fedzip::read_update_file(in_path));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fedzip: %s\n", e.what());
    return 1;
  }
  return 0;
}
