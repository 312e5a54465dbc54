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
#include <vector>

#include "fedzip/tensor.hpp"

namespace fedzip {

struct SparsityConfig {
  double weight_keep_fraction = 0.10;
  double bias_keep_fraction = 0.50;

  double keep_fraction(TensorKind kind) const {
    return kind == TensorKind::weight ? weight_keep_fraction : bias_keep_fraction;
  }
  void validate() const;

  friend bool operator==(const SparsityConfig&, const SparsityConfig&) = default;
};

/// Number of elements top_z keeps: ceil(keep_fraction * n), at least 1.
std::int64_t top_z_count(std::int64_t n, double keep_fraction);

/// Keeps the ceil(keep_fraction * n) largest-magnitude entries in place and
/// zeroes the rest. Equal magnitudes are ranked by ascending flat index.
Tensor top_z(const Tensor& t, double keep_fraction);

/// top_z on every tensor with the keep fraction for its kind.
std::vector<Tensor> sparsify(const std::vector<Tensor>& update, const SparsityConfig& config);

}  // namespace fedzip
