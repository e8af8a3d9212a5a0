// Copyright 2026 The owrlab authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/rng.hpp"
#include "owrlab/tensor.hpp"

namespace owrlab {

// Ground-truth score of every sample, summed to a scalar so one backward
// pass yields d(score)/d(features) for the whole batch. The features tensor
// it receives is a leaf.
using TrueScoreFn = std::function<Tensor(Tape&, const Tensor& features)>;

// Per-row mask: zero where g_j >= q_p, where q_p is the entry at ascending
// index n - ceil((1-p)*n), i.e. the top ceil((1-p)*n) gradient entries are
// dropped and ties at q_p all drop. keep_percentile p must be in (0, 1).
inline std::vector<double> sc_row_mask(const std::vector<double>& g, double p) {
  if (p <= 0.0 || p >= 1.0)
    throw ConfigError(concat("sc_mask: keep percentile must be in (0,1), got ", p));
  const std::size_t n = g.size();
  const std::size_t drop = static_cast<std::size_t>(std::ceil((1.0 - p) * n));
  std::vector<double> sorted = g;
  std::sort(sorted.begin(), sorted.end());
  const double q = sorted[n - drop];
  std::vector<double> mask(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    if (g[i] >= q) mask[i] = 0.0;
  return mask;
}

// Self-challenging corruption: for a seeded batch_ratio fraction of rows,
// compute g = d(true-class score)/dz on a side tape and zero the top-gradient
// entries; untouched rows pass through. The caller then applies the semantic
// loss to the returned features.
inline Tensor sc_mask(Tape& tape, const Tensor& z, const TrueScoreFn& true_score,
                      double keep_percentile, double batch_ratio, Rng& rng) {
  detail::require_matrix(z, "sc_mask");
  if (keep_percentile <= 0.0 || keep_percentile >= 1.0)
    throw ConfigError(concat("sc_mask: keep percentile must be in (0,1), got ",
                             keep_percentile));
  if (batch_ratio < 0.0 || batch_ratio > 1.0)
    throw ConfigError(concat("sc_mask: batch_ratio must be in [0,1], got ",
                             batch_ratio));
  if (batch_ratio == 0.0) return z;

  const std::size_t B = z.dim(0), F = z.dim(1);
  std::vector<bool> touched(B);
  bool any = false;
  for (std::size_t b = 0; b < B; ++b) {
    touched[b] = rng.uniform() < batch_ratio;
    any = any || touched[b];
  }
  if (!any) return z;

  // Gradient of the true-class score w.r.t. the features, batch-wide.
  Tensor leaf = z.clone();
  leaf.set_requires_grad(true);
  Tape side;
  Tensor score = true_score(side, leaf);
  side.backward(score);
  const std::vector<double>& g = leaf.grad();

  Tensor mask = Tensor::zeros({B, F});
  for (std::size_t b = 0; b < B; ++b) {
    if (!touched[b]) {
      for (std::size_t f = 0; f < F; ++f) mask.at(b * F + f) = 1.0;
      continue;
    }
    std::vector<double> row(g.begin() + b * F, g.begin() + (b + 1) * F);
    const std::vector<double> m = sc_row_mask(row, keep_percentile);
    for (std::size_t f = 0; f < F; ++f) mask.at(b * F + f) = m[f];
  }
  return hadamard_const(tape, z, mask);
}

}  // namespace owrlab
