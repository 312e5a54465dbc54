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

#include "fedzip/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedzip {

void SparsityConfig::validate() const {
  for (double z : {weight_keep_fraction, bias_keep_fraction}) {
    if (!(z > 0.0 && z <= 1.0)) {
      throw std::invalid_argument("keep fraction " + std::to_string(z) + " outside (0, 1]");
    }
  }
}

std::int64_t top_z_count(std::int64_t n, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("top_z: keep fraction " + std::to_string(keep_fraction) +
                                " outside (0, 1]");
  }
  // 1e-9 absorbs representation error such as 0.4 * 5 = 2.0000000000000004.
  const double exact = keep_fraction * static_cast<double>(n);
  const auto m = static_cast<std::int64_t>(std::ceil(exact - 1e-9));
  return std::clamp<std::int64_t>(m, 1, n);
}

Tensor top_z(const Tensor& t, double keep_fraction) {
  const std::int64_t n = t.numel();
  if (n == 0) throw std::invalid_argument("top_z: empty tensor '" + t.name + "'");
  const std::int64_t m = top_z_count(n, keep_fraction);
  if (m == n) return t;

  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  const auto& v = t.values;
  auto ranks_before = [&](std::int64_t a, std::int64_t b) {
    const float ma = std::abs(v(a));
    const float mb = std::abs(v(b));
    return ma != mb ? ma > mb : a < b;
  };
  std::nth_element(idx.begin(), idx.begin() + m, idx.end(), ranks_before);

  Tensor out = t;
  out.values.setZero();
  for (std::int64_t i = 0; i < m; ++i) out.values(idx[i]) = v(idx[i]);
  return out;
}

std::vector<Tensor> sparsify(const std::vector<Tensor>& update, const SparsityConfig& config) {
  config.validate();
  std::vector<Tensor> out;
  out.reserve(update.size());
  for (const auto& t : update) out.push_back(top_z(t, config.keep_fraction(t.kind)));
  return out;
}

}  // namespace fedzip
