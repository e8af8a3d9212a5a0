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

#include <functional>
#include <vector>

#include "owrlab/dg/transforms.hpp"

namespace owrlab {

// Accuracy of the current model on a transformed probe batch; lower means a
// fitter (more damaging) transform.
using ProbeAccuracyFn = std::function<double(const std::vector<Sample>&)>;

struct RsdaOptions {
  int update_every = 100;  // training iterations between evolutions
  int population = 8;
  int generations = 2;
  int tournament = 2;
  int append_k = 1;
  int max_chain = 3;
};

// The evolving set A of composed transforms; starts as {identity}.
struct TransformPool {
  std::vector<ComposedTransform> pool{ComposedTransform{}};
  RsdaOptions opt;
};

namespace detail {

inline ComposedTransform mutate_transform(const ComposedTransform& in, Rng& rng,
                                          int max_chain) {
  ComposedTransform out = in;
  const double roll = rng.uniform();
  if (out.chain.empty() || roll < 0.4) {  // chain edit: add
    if (static_cast<int>(out.chain.size()) < max_chain) {
      out.chain.insert(out.chain.begin() + rng.uniform_index(out.chain.size() + 1),
                       random_basic_transform(rng));
      return out;
    }
  }
  if (roll < 0.55 && out.chain.size() > 1) {  // chain edit: drop
    out.chain.erase(out.chain.begin() + rng.uniform_index(out.chain.size()));
    return out;
  }
  // magnitude jitter on one element
  BasicTransform& t = out.chain[rng.uniform_index(out.chain.size())];
  const auto [lo, hi] = transform_magnitude_range(t.kind);
  const float span = (hi - lo) * 0.2f;
  t.magnitude = std::clamp(t.magnitude + static_cast<float>(rng.uniform(-span, span)),
                           lo, hi);
  return out;
}

// Runs the configured generations over an explicit starting population and
// returns all evaluated candidates sorted by fitness (lowest probe accuracy
// first).
inline std::vector<std::pair<double, ComposedTransform>> evolve_population(
    std::vector<ComposedTransform> population, const ProbeAccuracyFn& accuracy,
    const std::vector<Sample>& probe, const RsdaOptions& opt, Rng& rng) {
  if (probe.empty()) throw ContractError("rsda_evolve: empty probe batch");

  auto evaluate = [&](const ComposedTransform& t) {
    std::vector<Sample> transformed;
    transformed.reserve(probe.size());
    for (const Sample& s : probe) transformed.push_back(t.apply(s, rng));
    return accuracy(transformed);
  };

  std::vector<std::pair<double, ComposedTransform>> scored;
  for (const auto& t : population) scored.emplace_back(evaluate(t), t);

  for (int gen = 0; gen < opt.generations; ++gen) {
    std::vector<std::pair<double, ComposedTransform>> next;
    for (int i = 0; i < opt.population; ++i) {
      // tournament selection: fittest of `tournament` random picks
      std::size_t best = rng.uniform_index(scored.size());
      for (int k = 1; k < opt.tournament; ++k) {
        const std::size_t cand = rng.uniform_index(scored.size());
        if (scored[cand].first < scored[best].first) best = cand;
      }
      ComposedTransform child =
          mutate_transform(scored[best].second, rng, opt.max_chain);
      next.emplace_back(evaluate(child), child);
    }
    scored.insert(scored.end(), next.begin(), next.end());
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return scored;
}

}  // namespace detail

// One evolution event: seed a population from current pool members plus
// random chains, evolve, and append the k fittest (worst-performing)
// candidates to A. |A| never shrinks.
inline void rsda_evolve(TransformPool& pool, const ProbeAccuracyFn& accuracy,
                        const std::vector<Sample>& probe, Rng& rng) {
  const RsdaOptions& opt = pool.opt;
  std::vector<ComposedTransform> population;
  for (int i = 0; i < opt.population; ++i) {
    if (i < static_cast<int>(pool.pool.size()) && i < opt.population / 2) {
      population.push_back(pool.pool[pool.pool.size() - 1 - i]);
    } else {
      ComposedTransform t;
      const int len = 1 + static_cast<int>(rng.uniform_index(opt.max_chain));
      for (int k = 0; k < len; ++k) t.chain.push_back(random_basic_transform(rng));
      population.push_back(t);
    }
  }
  auto scored = detail::evolve_population(std::move(population), accuracy, probe,
                                          opt, rng);
  for (int k = 0; k < opt.append_k && k < static_cast<int>(scored.size()); ++k)
    pool.pool.push_back(scored[k].second);
}

// B-hat: every sample transformed by one alpha drawn uniformly from A.
inline std::vector<Sample> rsda_augment_batch(const TransformPool& pool,
                                              const std::vector<Sample>& batch,
                                              Rng& rng) {
  if (pool.pool.empty()) throw ContractError("rsda_augment_batch: empty pool");
  std::vector<Sample> out;
  out.reserve(batch.size());
  for (const Sample& s : batch) {
    const ComposedTransform& alpha = pool.pool[rng.uniform_index(pool.pool.size())];
    out.push_back(alpha.apply(s, rng));
  }
  return out;
}

}  // namespace owrlab
