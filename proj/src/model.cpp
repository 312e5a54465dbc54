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

#include "fedzip/model.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "fedzip/random.hpp"

namespace fedzip {

void validate_architecture(const Architecture& arch) {
  if (arch.sizes.size() < 2) {
    throw std::invalid_argument("architecture needs at least an input and an output size");
  }
  for (int s : arch.sizes) {
    if (s < 1) throw std::invalid_argument("architecture layer sizes must be >= 1");
  }
}

Architecture make_architecture(int input_dim, const std::vector<int>& hidden, int num_classes) {
  Architecture arch;
  arch.sizes.push_back(input_dim);
  arch.sizes.insert(arch.sizes.end(), hidden.begin(), hidden.end());
  arch.sizes.push_back(num_classes);
  validate_architecture(arch);
  return arch;
}

void LabeledDataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("dataset is empty");
  if (features.rows() != size()) {
    throw std::invalid_argument("dataset feature rows and labels differ in count");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::int64_t>& rows) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.features = features(rows, Eigen::all);
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

LabeledDataset concatenate(const std::vector<const LabeledDataset*>& parts) {
  LabeledDataset out;
  Eigen::Index rows = 0;
  int cols = -1;
  for (const auto* p : parts) {
    rows += p->features.rows();
    if (cols < 0) cols = p->dim();
    if (p->dim() != cols) throw std::invalid_argument("concatenate: feature dimension mismatch");
    out.num_classes = std::max(out.num_classes, p->num_classes);
  }
  out.features.resize(rows, std::max(cols, 0));
  Eigen::Index at = 0;
  for (const auto* p : parts) {
    out.features.middleRows(at, p->features.rows()) = p->features;
    at += p->features.rows();
    out.labels.insert(out.labels.end(), p->labels.begin(), p->labels.end());
  }
  return out;
}

LossAccuracy forward_loss(const ModelParams& params, const LabeledDataset& batch) {
  return forward_loss<float>(params, batch.features, batch.labels);
}

ModelParams init_random(const Architecture& arch, std::uint64_t seed) {
  auto params = ModelParams::zeros(arch);
  Rng rng(seed);
  for (auto& layer : params.layers) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.weight.shape[0]));
    std::normal_distribution<double> normal(0.0, stddev);
    for (auto& v : layer.weight.values) v = static_cast<float>(normal(rng));
  }
  return params;
}

ModelParams train_local(const ModelParams& params, const LabeledDataset& data,
                        const TrainOptions& options) {
  if (data.size() == 0) throw std::invalid_argument("train_local: empty dataset");
  if (options.epochs < 1) throw std::invalid_argument("train_local: epochs must be >= 1");
  if (options.batch_size && *options.batch_size < 1) {
    throw std::invalid_argument("train_local: batch size must be >= 1");
  }
  ModelParams w = params;
  const std::int64_t n = data.size();
  const std::int64_t batch = options.batch_size ? std::min(*options.batch_size, n) : n;
  const bool full_batch = batch == n;

  Rng rng(options.seed);
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (!full_batch) shuffle_in_place(order, rng);
    for (std::int64_t start = 0; start < n; start += batch) {
      const std::int64_t stop = std::min(n, start + batch);
      std::pair<float, ModelParams> lg;
      if (full_batch) {
        lg = loss_and_gradient<float>(w, data.features, data.labels);
      } else {
        std::vector<std::int64_t> rows(order.begin() + start, order.begin() + stop);
        const auto mb = data.subset(rows);
        lg = loss_and_gradient<float>(w, mb.features, mb.labels);
      }
      const auto& grad = lg.second;
      for (std::size_t i = 0; i < w.tensor_count(); ++i) {
        w.tensor(i).values -= options.lr * grad.tensor(i).values;
      }
    }
  }
  if (!w.all_finite()) throw std::domain_error("train_local: parameters diverged to non-finite");
  return w;
}

double gradient_check(const ModelParams& params, const LabeledDataset& batch, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("gradient_check: epsilon must be > 0");
  auto w = params.cast<double>();
  const Matrix<double> x = batch.features.cast<double>();
  const auto analytic = loss_and_gradient<double>(w, x, batch.labels).second;

  double worst = 0.0;
  for (std::size_t t = 0; t < w.tensor_count(); ++t) {
    auto& values = w.tensor(t).values;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double saved = values(i);
      values(i) = saved + epsilon;
      const double up = forward_loss<double>(w, x, batch.labels).loss;
      values(i) = saved - epsilon;
      const double down = forward_loss<double>(w, x, batch.labels).loss;
      values(i) = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double exact = analytic.tensor(t).values(i);
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  }
  return worst;
}

double min_abs_hidden_preactivation(const ModelParams& params, const LabeledDataset& batch) {
  const auto z = detail::forward_preactivations<float>(params, batch.features);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < z.size(); ++l) {
    m = std::min(m, static_cast<double>(z[l].cwiseAbs().minCoeff()));
  }
  return m;
}

}  // namespace fedzip
