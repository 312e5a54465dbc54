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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "fedzip/orchestrator.hpp"
#include "fedzip/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fedzip {
namespace {

std::vector<ClientShard> make_shards(int m, std::int64_t per_client, int dim, int classes,
                                     std::uint64_t seed) {
  std::vector<ClientShard> shards;
  for (int i = 0; i < m; ++i) {
    shards.push_back({i, testing::random_dataset(per_client + i, dim, classes, seed + static_cast<std::uint64_t>(i))});
  }
  return shards;
}

ClientDelta scaled_delta(const ModelParams& like, double scale, std::int64_t n, std::uint64_t seed) {
  ClientDelta d;
  d.n_m = n;
  for (std::size_t t = 0; t < like.tensor_count(); ++t) {
    auto x = testing::random_tensor(like.tensor(t).numel(), seed + t, static_cast<float>(scale));
    x.shape = like.tensor(t).shape;
    x.name = like.tensor(t).name;
    x.kind = like.tensor(t).kind;
    d.delta.push_back(std::move(x));
  }
  return d;
}

TEST(SampleClients, FullAndMinimumParticipation) {
  EXPECT_EQ(sample_clients(5, 1.0, 1, 1), (std::vector<int>{0, 1, 2, 3, 4}));
  for (int t = 1; t <= 20; ++t) EXPECT_EQ(sample_clients(50, 0.0, 3, t).size(), 1u);
  EXPECT_EQ(sample_clients(50, 0.1, 3, 1).size(), 5u);
  EXPECT_EQ(sample_clients(10, 0.25, 3, 1).size(), 3u);
  EXPECT_THROW(sample_clients(5, 1.5, 1, 1), std::invalid_argument);
}

TEST(SampleClients, DistinctSortedDeterministic) {
  for (int t = 1; t <= 50; ++t) {
    const auto s = sample_clients(30, 0.3, 9, t);
    EXPECT_EQ(s, sample_clients(30, 0.3, 9, t));
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), s.size());
    EXPECT_GE(s.front(), 0);
    EXPECT_LT(s.back(), 30);
  }
  EXPECT_NE(sample_clients(30, 0.3, 9, 1), sample_clients(30, 0.3, 9, 2));
}

TEST(SampleClients, UniformFrequency) {
  const int m = 25, rounds = 10000;
  std::vector<int> hits(m, 0);
  for (int t = 1; t <= rounds; ++t) {
    for (int c : sample_clients(m, 0.2, 17, t)) ++hits[c];
  }
  for (int c = 0; c < m; ++c) EXPECT_NEAR(double(hits[c]) / rounds, 0.2, 0.02) << "client " << c;
}

TEST(Aggregate, ZeroAndCancellingDeltas) {
  const auto w = init_random(make_architecture(4, {6}, 3), 1);
  auto zero = scaled_delta(w, 0.0, 10, 1);
  EXPECT_EQ(aggregate(std::vector<ClientDelta>{zero, zero}, w, 0.25), w);

  auto d = scaled_delta(w, 1.0, 10, 2);
  auto neg = d;
  for (auto& t : neg.delta) t.values = -t.values;
  EXPECT_EQ(aggregate(std::vector<ClientDelta>{d, neg}, w, 0.25), w);
}

TEST(Aggregate, MatchesScalarWeightedAverage) {
  const auto w = init_random(make_architecture(5, {7}, 4), 2);
  const std::vector<ClientDelta> ds{scaled_delta(w, 0.1, 3, 10), scaled_delta(w, 0.2, 50, 20),
                                    scaled_delta(w, 0.05, 7, 30)};
  const double eta = 0.6;
  const auto out = aggregate(ds, w, eta);
  const double total = 3 + 50 + 7;
  for (std::size_t t = 0; t < w.tensor_count(); ++t) {
    for (Eigen::Index i = 0; i < w.tensor(t).numel(); ++i) {
      double s = 0;
      for (const auto& d : ds) s += double(d.n_m) / total * double(d.delta[t].values[i]);
      EXPECT_EQ(out.tensor(t).values[i], static_cast<float>(double(w.tensor(t).values[i]) - eta * s));
    }
  }
}

TEST(Aggregate, RejectsEmptyAndMismatched) {
  const auto w = init_random(make_architecture(4, {6}, 3), 1);
  EXPECT_THROW(aggregate(std::vector<ClientDelta>{}, w, 1.0), std::invalid_argument);
  const auto other = init_random(make_architecture(4, {5}, 3), 1);
  EXPECT_THROW(aggregate(std::vector<ClientDelta>{scaled_delta(other, 1.0, 1, 1)}, w, 1.0),
               std::invalid_argument);
}

TEST(Run, SingleClientFullStepReproducesLocalTraining) {
  const auto shards = make_shards(1, 64, 4, 3, 5);
  const auto test = testing::random_dataset(30, 4, 3, 99);
  const auto init = init_random(make_architecture(4, {8}, 3), 3);
  FedConfig cfg;
  cfg.num_clients = 1;
  cfg.rounds = 1;
  cfg.eta = 1.0;
  cfg.local_lr = 0.1f;
  const auto log = run(cfg, shards, test, init);

  TrainOptions o;
  o.lr = cfg.local_lr;
  o.batch_size = cfg.batch_size;
  o.seed = derive_seed(cfg.seed, {1, 0});
  const auto local = train_local(init, shards[0].data, o);
  const auto& global = log.rounds.at(0).params;
  // w - (w - w_local) can differ from w_local by the rounding of the subtraction.
  for (std::size_t t = 0; t < init.tensor_count(); ++t) {
    for (Eigen::Index i = 0; i < init.tensor(t).numel(); ++i) {
      const float a = init.tensor(t).values[i], c = local.tensor(t).values[i];
      const float ulp = std::nextafter(std::max(std::fabs(a), std::fabs(c)), INFINITY) -
                        std::max(std::fabs(a), std::fabs(c));
      EXPECT_LE(std::fabs(global.tensor(t).values[i] - c), ulp);
    }
  }
}

TEST(Run, LosslessFedZipEqualsFedAvg) {
  // Every tensor has at most 255 values, so k = 255 quantizes exactly.
  const auto shards = make_shards(4, 40, 3, 3, 1);
  const auto test = testing::random_dataset(30, 3, 3, 50);
  const auto init = init_random(make_architecture(3, {10}, 3), 4);
  FedConfig cfg;
  cfg.num_clients = 4;
  cfg.rounds = 3;
  cfg.local_lr = 0.2f;
  const auto avg = run(cfg, shards, test, init);
  cfg.mode = Mode::fedzip;
  cfg.encoder = Encoder::huffman;
  cfg.k = 255;
  cfg.sparsity = {1.0, 1.0};
  const auto zip = run(cfg, shards, test, init);
  ASSERT_EQ(avg.rounds.size(), zip.rounds.size());
  for (std::size_t r = 0; r < avg.rounds.size(); ++r) {
    EXPECT_EQ(avg.rounds[r].params, zip.rounds[r].params) << "round " << r + 1;
    EXPECT_EQ(avg.rounds[r].test_accuracy, zip.rounds[r].test_accuracy);
  }
}

TEST(Run, FedSgdRoundIsCentralizedGradientStep) {
  const auto shards = make_shards(3, 30, 4, 3, 7);
  const auto test = testing::random_dataset(20, 4, 3, 70);
  const auto init = init_random(make_architecture(4, {8}, 3), 8);
  FedConfig cfg;
  cfg.num_clients = 3;
  cfg.rounds = 1;
  cfg.mode = Mode::fedsgd;
  cfg.eta = 0.6;
  cfg.local_lr = 0.5f;
  const auto log = run(cfg, shards, test, init);
  EXPECT_FALSE(log.config.fed.batch_size.has_value());

  std::vector<const LabeledDataset*> parts;
  for (const auto& s : shards) parts.push_back(&s.data);
  const auto all = concatenate(parts);
  const auto ref = oracle::mlp_loss_grad(init, all.features, all.labels);
  const auto& got = log.rounds[0].params;
  for (std::size_t t = 0; t < init.tensor_count(); ++t) {
    for (Eigen::Index i = 0; i < init.tensor(t).numel(); ++i) {
      const double expected = double(init.tensor(t).values[i]) -
                              cfg.eta * double(cfg.local_lr) * ref.grad[t][static_cast<std::size_t>(i)];
      EXPECT_NEAR(got.tensor(t).values[i], expected, 1e-5);
    }
  }
}

TEST(Run, BitAccountingMatchesSerializedUpdates) {
  const auto shards = make_shards(5, 50, 4, 3, 2);
  const auto test = testing::random_dataset(30, 4, 3, 60);
  const auto init = init_random(make_architecture(4, {16}, 3), 5);
  FedConfig cfg;
  cfg.num_clients = 5;
  cfg.client_fraction = 0.4;
  cfg.rounds = 3;
  cfg.mode = Mode::fedzip;
  const auto log = run(cfg, shards, test, init);

  std::uint64_t total = 0;
  std::size_t u = 0;
  ModelParams global = init;
  for (const auto& r : log.rounds) {
    ASSERT_EQ(r.clients.size(), 2u);
    for (std::size_t i = 0; i < r.clients.size(); ++i, ++u) {
      const auto& shard = shards[static_cast<std::size_t>(r.clients[i])];
      TrainOptions o;
      o.lr = cfg.local_lr;
      o.batch_size = cfg.batch_size;
      o.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r.round), static_cast<std::uint64_t>(shard.client_id)});
      const auto delta = model_delta(global, train_local(global, shard.data, o));
      const auto enc = encode_update(delta, cfg, static_cast<std::uint32_t>(shard.client_id),
                                     static_cast<std::uint64_t>(shard.n()), static_cast<std::uint32_t>(r.round));
      const auto bits = 8 * serialize_update(enc).size();
      EXPECT_EQ(r.uploaded_bits[i], bits);
      EXPECT_EQ(log.updates[u].bits, bits);
      EXPECT_DOUBLE_EQ(r.compression_rate[i], 32.0 * double(init.parameter_count()) / double(bits));
      total += bits;
    }
    global = r.params;
  }
  EXPECT_EQ(log.b_total, total);
}

TEST(Run, UncompressedModesHaveUnitCompression) {
  const auto shards = make_shards(3, 20, 4, 3, 2);
  const auto test = testing::random_dataset(30, 4, 3, 60);
  FedConfig cfg;
  cfg.num_clients = 3;
  cfg.rounds = 2;
  cfg.hidden = {5};
  const auto log = run(cfg, shards, test);
  for (const auto& r : log.rounds) {
    for (double cr : r.compression_rate) EXPECT_EQ(cr, 1.0);
    for (auto b : r.uploaded_bits) EXPECT_EQ(b, 32u * static_cast<std::uint64_t>(log.parameter_count));
  }
  EXPECT_EQ(log.updates.size(), 6u);
}

TEST(Run, WorkerCountDoesNotChangeResults) {
  const auto shards = make_shards(6, 40, 4, 3, 2);
  const auto test = testing::random_dataset(30, 4, 3, 60);
  FedConfig cfg;
  cfg.num_clients = 6;
  cfg.rounds = 3;
  cfg.mode = Mode::fedzip;
  cfg.hidden = {12};
  const auto one = run(cfg, shards, test);
  cfg.workers = 4;
  auto four = run(cfg, shards, test);
  four.config.fed.workers = 1;
  EXPECT_EQ(one, four);
}

TEST(Run, DivergenceAndBadShardsAbort) {
  auto shards = make_shards(2, 20, 4, 3, 2);
  const auto test = testing::random_dataset(30, 4, 3, 60);
  FedConfig cfg;
  cfg.num_clients = 2;
  cfg.rounds = 5;
  cfg.local_lr = 1e30f;
  EXPECT_THROW(run(cfg, shards, test), std::runtime_error);
  cfg.local_lr = 0.1f;
  cfg.num_clients = 3;
  EXPECT_THROW(run(cfg, shards, test), std::invalid_argument);
}

TEST(MakeExperiment, PartitionsTheTrainingSplit) {
  RunConfig cfg;
  cfg.fed.num_clients = 10;
  cfg.data.samples = 1000;
  for (const char* p : {"noniid", "iid", "unbalanced", "noniid-unbalanced"}) {
    cfg.data.partition = p;
    const auto e = make_experiment(cfg);
    std::int64_t n = 0;
    for (const auto& s : e.shards) n += s.n();
    EXPECT_EQ(n, 800) << p;
    EXPECT_EQ(e.test.size(), 200) << p;
    EXPECT_EQ(e.shards.size(), 10u);
  }
}

}  // namespace
}  // namespace fedzip
