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
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fedzip {

enum class TensorKind : std::uint8_t { weight = 0, bias = 1 };

const char* to_string(TensorKind kind);

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape);

/// Canonical tensor name, "layer{index}.{weight|bias}".
std::string tensor_name(std::size_t layer, TensorKind kind);

/// Named, shaped, flat array. `values.size() == shape_numel(shape)` always.
template <typename Scalar>
struct BasicTensor {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::string name;
  Shape shape;
  Vector values;
  TensorKind kind = TensorKind::weight;

  BasicTensor() = default;

  BasicTensor(std::string name_, Shape shape_, TensorKind kind_)
      : name(std::move(name_)), shape(std::move(shape_)), kind(kind_) {
    for (auto d : shape) {
      if (d <= 0) {
        throw std::invalid_argument("tensor '" + name + "': non-positive dimension in shape " +
                                    shape_to_string(shape));
      }
    }
    values = Vector::Zero(shape_numel(shape));
  }

  BasicTensor(std::string name_, Shape shape_, TensorKind kind_, Vector values_)
      : BasicTensor(std::move(name_), std::move(shape_), kind_) {
    if (values_.size() != values.size()) {
      throw std::invalid_argument("tensor '" + name + "': " + std::to_string(values_.size()) +
                                  " values for shape " + shape_to_string(shape));
    }
    values = std::move(values_);
  }

  std::int64_t numel() const { return values.size(); }

  bool all_finite() const { return values.allFinite(); }

  template <typename Other>
  BasicTensor<Other> cast() const {
    BasicTensor<Other> out;
    out.name = name;
    out.shape = shape;
    out.kind = kind;
    out.values = values.template cast<Other>();
    return out;
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.name == b.name && a.shape == b.shape && a.kind == b.kind &&
           a.values.size() == b.values.size() && a.values == b.values;
  }
};

using Tensor = BasicTensor<float>;

namespace detail {

template <typename Scalar>
void require_same_shape(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b,
                        const char* op) {
  if (a.shape != b.shape) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch between '" + a.name + "' " +
                                shape_to_string(a.shape) + " and '" + b.name + "' " +
                                shape_to_string(b.shape));
  }
}

template <typename Scalar>
void require_finite(const BasicTensor<Scalar>& t, const char* op) {
  if (!t.all_finite()) {
    throw std::domain_error(std::string(op) + ": non-finite result in tensor '" + t.name + "'");
  }
}

}  // namespace detail

/// Elementwise a - b. Name, shape and kind come from `a`.
template <typename Scalar>
BasicTensor<Scalar> subtract(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  detail::require_same_shape(a, b, "subtract");
  BasicTensor<Scalar> out = a;
  out.values = a.values - b.values;
  detail::require_finite(out, "subtract");
  return out;
}

/// Elementwise base - eta * delta, the server-side update step.
template <typename Scalar>
BasicTensor<Scalar> add_scaled(const BasicTensor<Scalar>& base, const BasicTensor<Scalar>& delta,
                               Scalar eta) {
  detail::require_same_shape(base, delta, "add_scaled");
  BasicTensor<Scalar> out = base;
  out.values = base.values - eta * delta.values;
  detail::require_finite(out, "add_scaled");
  return out;
}

template <typename Scalar>
std::int64_t count_nonzero(const BasicTensor<Scalar>& t) {
  return (t.values.array() != Scalar(0)).count();
}

}  // namespace fedzip
