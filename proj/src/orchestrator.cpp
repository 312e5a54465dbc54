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

#include "fedzip/orchestrator.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "fedzip/quantizer.hpp"
#include "fedzip/random.hpp"
#include "fedzip/sparsifier.hpp"

namespace fedzip {

std::vector<int> sample_clients(int num_clients, double client_fraction, std::uint64_t seed,
                                int round) {
  if (num_clients < 1) throw std::invalid_argument("sample_clients: need at least one client");
  if (client_fraction < 0 || client_fraction > 1) {
    throw std::invalid_argument("sample_clients: client fraction must be in [0, 1]");
  }
  const auto m = static_cast<int>(std::max<long long>(
      std::llround(client_fraction * num_clients), 1));
  std::vector<int> ids(static_cast<std::size_t>(num_clients));
  std::iota(ids.begin(), ids.end(), 0);
  if (m < num_clients) {
    Rng rng(derive_seed(seed, {0x73616d70ULL, static_cast<std::uint64_t>(round)}));
    for (int i = 0; i < m; ++i) {
      const auto j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(num_clients - i)));
      std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(m));
    std::sort(ids.begin(), ids.end());
  }
  return ids;
}

ModelParams aggregate(std::span<const ClientDelta> deltas, const ModelParams& w_t, double eta) {
  if (deltas.empty()) throw std::invalid_argument("aggregate: no client deltas");
  double total = 0.0;
  for (const auto& d : deltas) {
    if (d.n_m < 1) throw std::invalid_argument("aggregate: client with no data points");
    if (d.delta.size() != w_t.tensor_count()) {
      throw std::invalid_argument("aggregate: delta tensor count does not match the model");
    }
    for (std::size_t t = 0; t < d.delta.size(); ++t) {
      if (d.delta[t].shape != w_t.tensor(t).shape) {
        throw std::invalid_argument("aggregate: shape mismatch in '" + w_t.tensor(t).name + "'");
      }
    }
    total += static_cast<double>(d.n_m);
  }
  ModelParams out = w_t;
  for (std::size_t t = 0; t < out.tensor_count(); ++t) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(out.tensor(t).numel());
    for (const auto& d : deltas) {
      acc += (static_cast<double>(d.n_m) / total) * d.delta[t].values.cast<double>();
    }
    out.tensor(t).values = (w_t.tensor(t).values.cast<double>() - eta * acc).cast<float>();
  }
  return out;
}

std::vector<Tensor> model_delta(const ModelParams& w_t, const ModelParams& w_local) {
  if (!(w_t.arch == w_local.arch)) throw std::invalid_argument("model_delta: architecture mismatch");
  std::vector<Tensor> out;
  out.reserve(w_t.tensor_count());
  for (std::size_t t = 0; t < w_t.tensor_count(); ++t) {
    out.push_back(subtract(w_t.tensor(t), w_local.tensor(t)));
  }
  return out;
}

EncodedUpdate encode_update(std::span<const Tensor> delta, const FedConfig& config,
                            std::uint32_t client_id, std::uint64_t n_m, std::uint32_t round) {
  EncodedUpdate u;
  u.client_id = client_id;
  u.n_m = n_m;
  u.round = round;
  for (const auto& t : delta) {
    const auto sparse = top_z(t, config.sparsity.keep_fraction(t.kind));
    auto q = quantize(sparse, config.k);
    // Tensors with fewer distinct values than k still need three clusters
    // for the address encoders.
    if (config.encoder != Encoder::huffman) q = pad_clusters(std::move(q), 3);
    u.tensors.push_back(encode(q, config.encoder));
  }
  return u;
}

std::vector<Tensor> decode_update(const EncodedUpdate& update) {
  std::vector<Tensor> out;
  out.reserve(update.tensors.size());
  for (const auto& t : update.tensors) out.push_back(dequantize(decode(t)));
  return out;
}

ClientUpload client_update(const FedConfig& config, const ModelParams& global,
                           const ClientShard& shard, int round) {
  TrainOptions opts;
  opts.epochs = config.local_epochs;
  opts.batch_size = config.batch_size;
  opts.lr = config.local_lr;
  opts.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(round),
                                        static_cast<std::uint64_t>(shard.client_id)});
  const auto local = train_local(global, shard.data, opts);
  auto delta = model_delta(global, local);

  ClientUpload up;
  up.delta.n_m = shard.n();
  if (config.mode != Mode::fedzip) {
    up.delta.delta = std::move(delta);
    up.uploaded_bits = 32ULL * static_cast<std::uint64_t>(global.parameter_count());
    return up;
  }
  const auto encoded = encode_update(delta, config, static_cast<std::uint32_t>(shard.client_id),
                                     static_cast<std::uint64_t>(shard.n()),
                                     static_cast<std::uint32_t>(round));
  // The byte stream is what travels; the server only sees the parsed copy.
  const auto wire = serialize_update(encoded);
  up.uploaded_bits = 8ULL * wire.size();
  const auto received = parse_update(wire);
  up.delta.delta = decode_update(received);
  up.delta.n_m = static_cast<std::int64_t>(received.n_m);
  return up;
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
/// failure by index order.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(threads, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

RunLog run(const FedConfig& config_in, std::span<const ClientShard> shards,
           const LabeledDataset& test, const ModelParams& initial) {
  const FedConfig config = config_in.effective();
  config.validate();
  if (shards.empty()) throw std::invalid_argument("run: no client shards");
  if (static_cast<int>(shards.size()) != config.num_clients) {
    throw std::invalid_argument("run: " + std::to_string(shards.size()) + " shards for " +
                                std::to_string(config.num_clients) + " clients");
  }
  for (const auto& s : shards) {
    if (s.n() < 1) throw std::invalid_argument("run: client " + std::to_string(s.client_id) + " has no data");
    if (s.data.dim() != initial.arch.input_dim()) {
      throw std::invalid_argument("run: client data dimension does not match the model");
    }
  }

  std::vector<const LabeledDataset*> parts;
  for (const auto& s : shards) parts.push_back(&s.data);
  const auto train_union = concatenate(parts);

  RunLog log;
  log.config.fed = config;
  log.parameter_count = initial.parameter_count();
  log.initial_test_accuracy = forward_loss(initial, test).accuracy;
  const std::uint64_t baseline_bits = 32ULL * static_cast<std::uint64_t>(log.parameter_count);

  ModelParams global = initial;
  for (int t = 1; t <= config.rounds; ++t) {
    const auto sampled = sample_clients(config.num_clients, config.client_fraction, config.seed, t);
    std::vector<ClientUpload> uploads(sampled.size());
    parallel_for(sampled.size(), config.workers, [&](std::size_t i) {
      const auto& shard = shards[static_cast<std::size_t>(sampled[i])];
      try {
        uploads[i] = client_update(config, global, shard, t);
      } catch (const std::exception& e) {
        throw std::runtime_error("round " + std::to_string(t) + ", client " +
                                 std::to_string(shard.client_id) + ": " + e.what());
      }
    });

    std::vector<ClientDelta> deltas;
    RoundResult rr;
    rr.round = t;
    rr.clients = sampled;
    for (std::size_t i = 0; i < uploads.size(); ++i) {
      rr.uploaded_bits.push_back(uploads[i].uploaded_bits);
      rr.compression_rate.push_back(compression_rate(baseline_bits, uploads[i].uploaded_bits));
      log.updates.push_back({t, sampled[i], uploads[i].uploaded_bits});
      log.b_total += uploads[i].uploaded_bits;
      deltas.push_back(std::move(uploads[i].delta));
    }
    global = aggregate(deltas, global, config.eta);
    if (!global.all_finite()) {
      throw std::runtime_error("round " + std::to_string(t) +
                               ": global parameters diverged to non-finite values");
    }
    const auto tr = forward_loss(global, train_union);
    const auto te = forward_loss(global, test);
    rr.train_loss = tr.loss;
    rr.train_accuracy = tr.accuracy;
    rr.test_loss = te.loss;
    rr.test_accuracy = te.accuracy;
    rr.params = global;
    log.rounds.push_back(std::move(rr));
  }
  return log;
}

Experiment make_experiment(const RunConfig& config) {
  const auto& d = config.data;
  const auto seed = config.fed.seed;
  const auto full = d.csv_path.empty()
                        ? generate_synthetic(d.num_classes, d.dim, d.samples, d.class_separation,
                                             derive_seed(seed, {0x64617461ULL}))
                        : load_csv(d.csv_path);
  auto [train, test] = split_holdout(full, d.test_fraction, derive_seed(seed, {0x73706c74ULL}));
  const auto part_seed = derive_seed(seed, {0x70617274ULL});
  const int m = config.fed.num_clients;
  Experiment e;
  if (d.partition == "noniid") e.shards = partition_noniid(train, m, d.shards_per_client, part_seed);
  else if (d.partition == "iid") e.shards = partition_unbalanced(train, m, 0.0, part_seed);
  else if (d.partition == "unbalanced") e.shards = partition_unbalanced(train, m, d.skew, part_seed);
  else if (d.partition == "noniid-unbalanced") {
    e.shards = partition_noniid_unbalanced(train, m, d.skew, part_seed);
  } else {
    throw std::invalid_argument("unknown partition '" + d.partition + "'");
  }
  e.test = std::move(test);
  return e;
}

RunLog run(const FedConfig& config, std::span<const ClientShard> shards,
           const LabeledDataset& test) {
  if (shards.empty()) throw std::invalid_argument("run: no client shards");
  const auto arch = make_architecture(shards.front().data.dim(), config.hidden,
                                      std::max(test.num_classes, shards.front().data.num_classes));
  return run(config, shards, test, init_random(arch, derive_seed(config.seed, {0x696e6974ULL})));
}

RunLog run(const RunConfig& config) {
  const auto e = make_experiment(config);
  auto log = run(config.fed, e.shards, e.test);
  log.config.data = config.data;
  return log;
}

}  // namespace fedzip
