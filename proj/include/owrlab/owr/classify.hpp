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
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "owrlab/eval/metrics.hpp"
#include "owrlab/owr/model.hpp"

namespace owrlab {

struct Classification {
  std::vector<double> scores;  // per known class, ClassModel::known order
  int prediction = kUnknownLabel;
};

namespace detail {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::size_t argmin(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace detail

// NNO: phi_y = N * (1 - d(z, mu_y) / tau); unknown iff every phi_y <= 0.
inline Classification nno_classify(const ClassModel& cm, std::span<const double> z) {
  if (cm.known.empty()) throw ContractError("nno_classify: no known classes");
  if (cm.tau <= 0.0)
    throw ConfigError(concat("nno_classify: tau must be > 0, got ", cm.tau));
  Classification out;
  out.scores.reserve(cm.known.size());
  for (std::uint16_t cls : cm.known) {
    const double d = detail::euclidean(z, cm.centroids.at(cls));
    out.scores.push_back(cm.normalizer * (1.0 - d / cm.tau));
  }
  const std::size_t best = detail::argmax(out.scores);
  out.prediction = out.scores[best] <= 0.0 ? kUnknownLabel : cm.known[best];
  return out;
}

// DeepNNO: phi_y = exp(-0.5 * ||z - mu_y||); unknown iff every phi_y <= tau.
inline Classification deepnno_classify(const ClassModel& cm,
                                       std::span<const double> z) {
  if (cm.known.empty()) throw ContractError("deepnno_classify: no known classes");
  Classification out;
  out.scores.reserve(cm.known.size());
  for (std::uint16_t cls : cm.known) {
    const double d = detail::euclidean(z, cm.centroids.at(cls));
    out.scores.push_back(std::exp(-0.5 * d));
  }
  const std::size_t best = detail::argmax(out.scores);
  out.prediction = out.scores[best] <= cm.tau ? kUnknownLabel : cm.known[best];
  return out;
}

// B-DOC: phi_y = ||z - mu_y||^2 / phi_std. Low score means close; the
// prediction is the argmin, unknown iff every phi_y exceeds its tau_y.
inline Classification bdoc_classify(const ClassModel& cm, std::span<const double> z) {
  if (cm.known.empty()) throw ContractError("bdoc_classify: no known classes");
  if (cm.feature_std <= 0.0)
    throw ContractError(concat("bdoc_classify: phi estimate must be > 0, got ",
                               cm.feature_std));
  Classification out;
  out.scores.reserve(cm.known.size());
  bool all_over = true;
  for (std::uint16_t cls : cm.known) {
    const auto it = cm.class_tau.find(cls);
    if (it == cm.class_tau.end())
      throw ContractError(concat("bdoc_classify: class ", cls, " has no tau_y"));
    const double d = detail::euclidean(z, cm.centroids.at(cls));
    const double score = d * d / cm.feature_std;
    if (score <= it->second) all_over = false;
    out.scores.push_back(score);
  }
  out.prediction =
      all_over ? kUnknownLabel
               : static_cast<int>(cm.known[detail::argmin(out.scores)]);
  return out;
}

inline Classification classify(const ClassModel& cm, Variant variant,
                               std::span<const double> z) {
  switch (variant) {
    case Variant::kNno: return nno_classify(cm, z);
    case Variant::kDeepNno: return deepnno_classify(cm, z);
    default: return bdoc_classify(cm, z);
  }
}

// The best known class regardless of thresholds (the rejection branch of the
// prediction rule disabled).
inline int decide_without_rejection(const ClassModel& cm, Variant variant,
                                    const std::vector<double>& scores) {
  if (scores.size() != cm.known.size())
    throw DimensionError(concat("decide: ", scores.size(), " scores for ",
                                cm.known.size(), " classes"));
  const std::size_t best = variant == Variant::kBdoc ? detail::argmin(scores)
                                                     : detail::argmax(scores);
  return cm.known[best];
}

// Exact online mean update: mu <- (n*mu + sum z) / (n + k). Labels must come
// from `allowed`; feature widths must agree.
inline void update_centroids_online(ClassModel& cm, const Tensor& features,
                                    const std::vector<std::uint16_t>& labels,
                                    const std::set<std::uint16_t>& allowed) {
  detail::require_matrix(features, "update_centroids_online");
  const std::size_t B = features.dim(0), F = features.dim(1);
  if (labels.size() != B)
    throw DimensionError(concat("update_centroids_online: ", labels.size(),
                                " labels for ", B, " rows"));
  for (std::size_t b = 0; b < B; ++b) {
    const std::uint16_t y = labels[b];
    if (!allowed.count(y))
      throw ContractError(concat("update_centroids_online: class ", y,
                                 " is not in the current step or exemplars"));
    auto& mu = cm.centroids[y];
    if (mu.empty()) mu.assign(F, 0.0);
    if (mu.size() != F)
      throw DimensionError("update_centroids_online: feature width changed");
    auto& n = cm.counts[y];
    for (std::size_t f = 0; f < F; ++f)
      mu[f] = (mu[f] * n + features.at(b * F + f)) / (n + 1);
    n += 1;
  }
}

// Exponential moving average of batch class means (momentum 0.9); first
// appearance adopts the batch mean. Used while features drift during
// end-to-end training.
inline void update_centroids_ema(ClassModel& cm, const Tensor& features,
                                 const std::vector<std::uint16_t>& labels,
                                 double momentum = 0.9) {
  detail::require_matrix(features, "update_centroids_ema");
  const std::size_t B = features.dim(0), F = features.dim(1);
  std::map<std::uint16_t, std::pair<std::vector<double>, std::size_t>> sums;
  for (std::size_t b = 0; b < B; ++b) {
    auto& [sum, k] = sums[labels[b]];
    if (sum.empty()) sum.assign(F, 0.0);
    for (std::size_t f = 0; f < F; ++f) sum[f] += features.at(b * F + f);
    ++k;
  }
  for (auto& [cls, acc] : sums) {
    auto& [sum, k] = acc;
    auto& mu = cm.centroids[cls];
    auto& n = cm.counts[cls];
    if (mu.empty()) {
      mu.resize(F);
      for (std::size_t f = 0; f < F; ++f) mu[f] = sum[f] / k;
    } else {
      for (std::size_t f = 0; f < F; ++f)
        mu[f] = momentum * mu[f] + (1.0 - momentum) * sum[f] / k;
    }
    n += k;
  }
}

// One held-out sample for threshold estimation.
struct HeldoutPoint {
  std::vector<double> features;
  std::uint16_t label = 0;
  bool pseudo_unknown = false;
};

// Grid search over observed nearest-centroid distances maximizing OWR-H on
// the held-out set. Pseudo-unknown classes are dropped from the centroid set
// during the search and their samples must be rejected. Ties break toward
// the smaller tau. grid_size > 0 coarsens the grid to that many quantile
// points of the observed distances.
inline double estimate_nno_threshold(const ClassModel& cm,
                                     const std::vector<HeldoutPoint>& heldout,
                                     int grid_size = 0) {
  if (heldout.empty())
    throw ConfigError("estimate_nno_threshold: empty held-out set");
  std::set<std::uint16_t> pseudo;
  for (const auto& h : heldout)
    if (h.pseudo_unknown) pseudo.insert(h.label);
  std::vector<std::uint16_t> retained;
  for (std::uint16_t cls : cm.known)
    if (!pseudo.count(cls)) retained.push_back(cls);
  if (retained.empty())
    throw ConfigError("estimate_nno_threshold: every class is pseudo-unknown");
  bool has_known = false, has_unknown = false;
  for (const auto& h : heldout) (h.pseudo_unknown ? has_unknown : has_known) = true;
  if (!has_known || !has_unknown)
    throw ConfigError(
        "estimate_nno_threshold: held-out set needs both known and "
        "pseudo-unknown samples");

  struct Point {
    double dist;
    std::uint16_t nearest;
    std::uint16_t label;
    bool unknown;
  };
  std::vector<Point> pts;
  pts.reserve(heldout.size());
  for (const auto& h : heldout) {
    double best = 0;
    std::uint16_t best_cls = retained[0];
    bool first = true;
    for (std::uint16_t cls : retained) {
      const double d = detail::euclidean(h.features, cm.centroids.at(cls));
      if (first || d < best) {
        best = d;
        best_cls = cls;
        first = false;
      }
    }
    pts.push_back({best, best_cls, h.label, h.pseudo_unknown});
  }

  std::vector<double> grid;
  for (const auto& p : pts) grid.push_back(p.dist);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid_size > 1 && grid.size() > static_cast<std::size_t>(grid_size)) {
    std::vector<double> coarse;
    for (int g = 0; g < grid_size; ++g)
      coarse.push_back(grid[g * (grid.size() - 1) / (grid_size - 1)]);
    coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
    grid = std::move(coarse);
  }

  double best_tau = grid.front();
  double best_h = -1.0;
  for (double tau : grid) {
    std::size_t known_total = 0, known_correct = 0, unk_total = 0, unk_rejected = 0;
    for (const auto& p : pts) {
      const bool rejected = p.dist >= tau;  // min phi <= 0 iff d >= tau
      if (p.unknown) {
        ++unk_total;
        if (rejected) ++unk_rejected;
      } else {
        ++known_total;
        if (!rejected && p.nearest == p.label) ++known_correct;
      }
    }
    const double cwr = static_cast<double>(known_correct) / known_total;
    const double osa = static_cast<double>(unk_rejected) / unk_total;
    const double h = owr_harmonic(cwr, osa);
    if (h > best_h) {  // strict: ties keep the smaller tau
      best_h = h;
      best_tau = tau;
    }
  }
  return best_tau;
}

// Running weighted mean of max-class scores: weight 1 for correctly
// classified samples, neg_weight for misclassified ones; clamped to [0, 1].
// The running sums live in the class model and persist across batches.
inline double deepnno_update_threshold(ClassModel& cm,
                                       const std::vector<std::vector<double>>& scores,
                                       const std::vector<int>& predictions,
                                       const std::vector<std::uint16_t>& labels,
                                       double neg_weight) {
  if (scores.size() != labels.size() || predictions.size() != labels.size())
    throw DimensionError("deepnno_update_threshold: ragged batch");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (scores[i].empty()) continue;
    const double s = *std::max_element(scores[i].begin(), scores[i].end());
    const double w = predictions[i] == labels[i] ? 1.0 : neg_weight;
    cm.tau_score_sum += w * s;
    cm.tau_weight_sum += w;
  }
  if (cm.tau_weight_sum > 0)
    cm.tau = std::clamp(cm.tau_score_sum / cm.tau_weight_sum, 0.0, 1.0);
  return cm.tau;
}

}  // namespace owrlab
