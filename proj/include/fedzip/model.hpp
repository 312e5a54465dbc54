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

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fedzip/tensor.hpp"

namespace fedzip {

/// Layer widths from input to output. Hidden layers use ReLU, the output is
/// a softmax over `sizes.back()` classes.
struct Architecture {
  std::vector<int> sizes;

  std::size_t num_layers() const { return sizes.empty() ? 0 : sizes.size() - 1; }
  int input_dim() const { return sizes.front(); }
  int num_classes() const { return sizes.back(); }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

void validate_architecture(const Architecture& arch);

/// input -> hidden... -> classes
Architecture make_architecture(int input_dim, const std::vector<int>& hidden, int num_classes);

template <typename Scalar>
struct BasicLayer {
  BasicTensor<Scalar> weight;  // (fan_in, fan_out), row-major
  BasicTensor<Scalar> bias;    // (fan_out)
};

template <typename Scalar>
struct BasicModelParams {
  using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Architecture arch;
  std::vector<BasicLayer<Scalar>> layers;

  /// Zero-valued parameters with the canonical names and shapes for `arch`.
  static BasicModelParams zeros(const Architecture& arch) {
    validate_architecture(arch);
    BasicModelParams p;
    p.arch = arch;
    for (std::size_t l = 0; l < arch.num_layers(); ++l) {
      const std::int64_t fan_in = arch.sizes[l];
      const std::int64_t fan_out = arch.sizes[l + 1];
      p.layers.push_back({BasicTensor<Scalar>(tensor_name(l, TensorKind::weight),
                                              {fan_in, fan_out}, TensorKind::weight),
                          BasicTensor<Scalar>(tensor_name(l, TensorKind::bias), {fan_out},
                                              TensorKind::bias)});
    }
    return p;
  }

  Eigen::Map<RowMajorMatrix> weight(std::size_t l) {
    auto& w = layers[l].weight;
    return {w.values.data(), w.shape[0], w.shape[1]};
  }
  Eigen::Map<const RowMajorMatrix> weight(std::size_t l) const {
    const auto& w = layers[l].weight;
    return {w.values.data(), w.shape[0], w.shape[1]};
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto& layer : layers) n += layer.weight.numel() + layer.bias.numel();
    return n;
  }

  std::size_t tensor_count() const { return 2 * layers.size(); }

  /// Tensors in canonical order: layer0.weight, layer0.bias, layer1.weight, ...
  const BasicTensor<Scalar>& tensor(std::size_t i) const {
    return i % 2 == 0 ? layers[i / 2].weight : layers[i / 2].bias;
  }
  BasicTensor<Scalar>& tensor(std::size_t i) {
    return i % 2 == 0 ? layers[i / 2].weight : layers[i / 2].bias;
  }

  bool all_finite() const {
    for (const auto& layer : layers) {
      if (!layer.weight.all_finite() || !layer.bias.all_finite()) return false;
    }
    return true;
  }

  template <typename Other>
  BasicModelParams<Other> cast() const {
    BasicModelParams<Other> out;
    out.arch = arch;
    for (const auto& layer : layers) {
      out.layers.push_back({layer.weight.template cast<Other>(), layer.bias.template cast<Other>()});
    }
    return out;
  }

  friend bool operator==(const BasicModelParams& a, const BasicModelParams& b) {
    if (!(a.arch == b.arch) || a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
      if (!(a.layers[l].weight == b.layers[l].weight) || !(a.layers[l].bias == b.layers[l].bias)) {
        return false;
      }
    }
    return true;
  }
};

using ModelParams = BasicModelParams<float>;

/// n x d features with one integer label per row.
struct LabeledDataset {
  Eigen::MatrixXf features;
  std::vector<int> labels;
  int num_classes = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  int dim() const { return static_cast<int>(features.cols()); }

  LabeledDataset subset(const std::vector<std::int64_t>& rows) const;
  void validate() const;
};

/// Concatenation of the given datasets in order.
LabeledDataset concatenate(const std::vector<const LabeledDataset*>& parts);

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

inline void require_input_dim(const Architecture& arch, Eigen::Index cols, Eigen::Index rows,
                              std::size_t labels) {
  if (cols != arch.input_dim()) {
    throw std::invalid_argument("batch feature dimension " + std::to_string(cols) +
                                " does not match model input " + std::to_string(arch.input_dim()));
  }
  if (static_cast<std::size_t>(rows) != labels) {
    throw std::invalid_argument("feature rows and label count differ");
  }
  if (rows == 0) throw std::invalid_argument("empty batch");
}

/// Pre-activations per layer; the last entry holds the logits.
template <typename Scalar>
std::vector<Matrix<Scalar>> forward_preactivations(const BasicModelParams<Scalar>& params,
                                                   const Matrix<Scalar>& x) {
  std::vector<Matrix<Scalar>> z;
  z.reserve(params.layers.size());
  Matrix<Scalar> a = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix<Scalar> zl = a * params.weight(l);
    zl.rowwise() += params.layers[l].bias.values.transpose();
    if (l + 1 < params.layers.size()) a = zl.cwiseMax(Scalar(0));
    z.push_back(std::move(zl));
  }
  return z;
}

/// Row-wise log-sum-exp of the logits.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_sum_exp(const Matrix<Scalar>& logits) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_max = logits.rowwise().maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    out(i) = row_max(i) + std::log((logits.row(i).array() - row_max(i)).exp().sum());
  }
  return out;
}

}  // namespace detail

/// Mean softmax cross-entropy and argmax accuracy of `params` on (x, labels).
template <typename Scalar>
LossAccuracy forward_loss(const BasicModelParams<Scalar>& params, const Matrix<Scalar>& x,
                          const std::vector<int>& labels) {
  detail::require_input_dim(params.arch, x.cols(), x.rows(), labels.size());
  const auto z = detail::forward_preactivations(params, x);
  const auto& logits = z.back();
  const auto lse = detail::log_sum_exp(logits);
  double loss = 0.0;
  std::int64_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    loss += static_cast<double>(lse(i) - logits(i, labels[i]));
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (arg == labels[i]) ++correct;
  }
  const double n = static_cast<double>(logits.rows());
  return {loss / n, static_cast<double>(correct) / n};
}

LossAccuracy forward_loss(const ModelParams& params, const LabeledDataset& batch);

/// Mean loss and its exact gradient with respect to every parameter.
template <typename Scalar>
std::pair<Scalar, BasicModelParams<Scalar>> loss_and_gradient(
    const BasicModelParams<Scalar>& params, const Matrix<Scalar>& x,
    const std::vector<int>& labels) {
  detail::require_input_dim(params.arch, x.cols(), x.rows(), labels.size());
  const auto z = detail::forward_preactivations(params, x);
  const auto& logits = z.back();
  const auto lse = detail::log_sum_exp(logits);
  const Eigen::Index n = x.rows();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);

  Scalar loss = 0;
  Matrix<Scalar> dz(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += lse(i) - logits(i, labels[i]);
    dz.row(i) = (logits.row(i).array() - lse(i)).exp();
    dz(i, labels[i]) -= Scalar(1);
  }
  dz *= inv_n;
  loss *= inv_n;

  auto grad = BasicModelParams<Scalar>::zeros(params.arch);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    // Input activation of layer l.
    Matrix<Scalar> a = l == 0 ? x : Matrix<Scalar>(z[l - 1].cwiseMax(Scalar(0)));
    grad.weight(l) = a.transpose() * dz;
    grad.layers[l].bias.values = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix<Scalar> da = dz * params.weight(l).transpose();
    // ReLU subgradient at exactly 0 is 0.
    dz = (z[l - 1].array() > Scalar(0)).select(da.array(), Scalar(0)).matrix();
  }
  return {loss, std::move(grad)};
}

/// He-normal weights (std = sqrt(2 / fan_in)), zero biases.
ModelParams init_random(const Architecture& arch, std::uint64_t seed);

struct TrainOptions {
  int epochs = 1;
  /// nullopt means the full local dataset per step (B = infinity).
  std::optional<std::int64_t> batch_size = 32;
  float lr = 0.05f;
  std::uint64_t seed = 0;
};

/// Minibatch SGD on a copy of `params`. The last partial batch is kept.
ModelParams train_local(const ModelParams& params, const LabeledDataset& data,
                        const TrainOptions& options);

/// Max relative error between the analytic gradient and central finite
/// differences, evaluated in double precision. Relative error of one entry is
/// |a - f| / max(|a|, |f|, 1e-6).
double gradient_check(const ModelParams& params, const LabeledDataset& batch, double epsilon);

/// Smallest |pre-activation| over all hidden units and rows. Finite-difference
/// checks are only meaningful when this exceeds the step size.
double min_abs_hidden_preactivation(const ModelParams& params, const LabeledDataset& batch);

}  // namespace fedzip
