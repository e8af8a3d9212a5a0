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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/dataset.hpp"
#include "owrlab/mlp.hpp"
#include "owrlab/schedule.hpp"

namespace owrlab {

enum class Variant { kNno, kDeepNno, kBdoc };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kNno: return "nno";
    case Variant::kDeepNno: return "deepnno";
    default: return "bdoc";
  }
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "nno") return Variant::kNno;
  if (s == "deepnno") return Variant::kDeepNno;
  if (s == "bdoc") return Variant::kBdoc;
  throw ConfigError(concat("unknown method '", s, "' (want nno|deepnno|bdoc)"));
}

// How the B-DOC feature deviation phi is pooled.
enum class PhiPooling { kComponents, kSampleNorm };

struct MethodConfig {
  Variant variant = Variant::kDeepNno;
  double lambda_distill = 1.0;  // distillation trade-off
  double gamma_snnl = 0.3;      // SNNL trade-off (B-DOC)
  double lr = 0.05;
  double weight_decay = 1e-4;
  int epochs_base = 20;
  int epochs_incremental = 25;
  double neg_weight = 4.0;      // weight of misclassified samples in the
                                // DeepNNO threshold update
  double tau_lr = 0.02;         // B-DOC threshold learning rate
  int tau_epochs = 200;
  int nno_tau_grid = 0;         // NNO threshold grid granularity; 0 = every
                                // observed distance
  int exemplars_per_class = 10;
  int batch_size = 32;
  double reserved_fraction = 0.10;
  PhiPooling phi_pooling = PhiPooling::kComponents;

  // The shipped per-method defaults (the two-stage validation protocol
  // landed on these; B-DOC's distance-scaled gradients want a smaller step
  // than DeepNNO's bounded BCE gradients, and DeepNNO's per-element BCE mean
  // balances against the distillation term at a smaller lambda).
  static MethodConfig defaults_for(Variant v) {
    MethodConfig m;
    m.variant = v;
    switch (v) {
      case Variant::kNno: m.lr = 0.03; break;
      case Variant::kDeepNno:
        m.lr = 0.05;
        m.lambda_distill = 0.3;
        break;
      case Variant::kBdoc: m.lr = 0.01; break;
    }
    return m;
  }

  void validate() const {
    if (lambda_distill < 0) throw ConfigError("method: lambda must be >= 0");
    if (gamma_snnl < 0) throw ConfigError("method: gamma must be >= 0");
    if (lr <= 0) throw ConfigError("method: lr must be > 0");
    if (weight_decay < 0) throw ConfigError("method: weight_decay must be >= 0");
    if (epochs_base < 1 || epochs_incremental < 0)
      throw ConfigError("method: bad epoch counts");
    if (neg_weight < 0) throw ConfigError("method: neg_weight must be >= 0");
    if (tau_lr < 0) throw ConfigError("method: tau_lr must be >= 0");
    if (tau_epochs < 0) throw ConfigError("method: tau_epochs must be >= 0");
    if (nno_tau_grid != 0 && nno_tau_grid < 2)
      throw ConfigError("method: nno_tau_grid must be 0 or >= 2");
    if (exemplars_per_class < 0)
      throw ConfigError("method: exemplars_per_class must be >= 0");
    if (batch_size < 2) throw ConfigError("method: batch_size must be >= 2");
    if (reserved_fraction < 0 || reserved_fraction >= 1)
      throw ConfigError("method: reserved_fraction must be in [0, 1)");
  }
};

// Per-class state every method carries: centroids, counts, rejection
// threshold(s), the NNO normalizer and the B-DOC feature deviation.
struct ClassModel {
  std::vector<std::uint16_t> known;  // K^T in arrival order
  std::map<std::uint16_t, std::vector<double>> centroids;
  std::map<std::uint16_t, std::size_t> counts;
  double tau = 0.0;                          // global threshold
  std::map<std::uint16_t, double> class_tau;  // B-DOC class thresholds
  double normalizer = 1.0;                   // NNO scale factor
  double feature_std = 1.0;                  // B-DOC phi estimate
  double tau_score_sum = 0.0;                // DeepNNO online threshold state
  double tau_weight_sum = 0.0;

  bool has_class(std::uint16_t cls) const { return centroids.count(cls) != 0; }

  int index_of(std::uint16_t cls) const {
    for (std::size_t i = 0; i < known.size(); ++i)
      if (known[i] == cls) return static_cast<int>(i);
    return -1;
  }

  // Centroid matrix [|K| x F] in known order.
  Tensor centroid_matrix() const {
    if (known.empty()) throw ContractError("class model: no known classes");
    const std::size_t F = centroids.at(known[0]).size();
    Tensor m = Tensor::zeros({known.size(), F});
    for (std::size_t i = 0; i < known.size(); ++i) {
      const auto& mu = centroids.at(known[i]);
      if (mu.size() != F)
        throw DimensionError("class model: ragged centroid widths");
      for (std::size_t f = 0; f < F; ++f) m.at(i * F + f) = mu[f];
    }
    return m;
  }
};

// Rehearsal store; only past-step classes live here.
struct ExemplarMemory {
  int capacity = 5;
  std::map<std::uint16_t, std::vector<Sample>> stored;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [cls, v] : stored) n += v.size();
    return n;
  }
};

struct OwrModel {
  Mlp extractor;
  Mlp prev_extractor;  // frozen omega^{t-1}; initialized iff steps_completed >= 1
  Mlp rotation_head;   // auxiliary branch, built lazily by the RR plugin
  ClassModel classes;
  MethodConfig config;
  ExemplarMemory exemplars;
  std::map<std::uint16_t, std::vector<Sample>> reserved;  // held-out per class
  ClassSet pseudo_unknown;  // base classes playing unknown in threshold search
  int steps_completed = 0;
  std::uint64_t run_seed = 0;

  ClassSet known_set() const {
    return ClassSet(classes.known.begin(), classes.known.end());
  }
};

}  // namespace owrlab
