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

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/rng.hpp"

namespace owrlab {

using ClassSet = std::vector<std::uint16_t>;  // ordered

// Base step, incremental steps, and the designated never-trained classes.
struct EpisodeSchedule {
  ClassSet base_classes;
  std::vector<ClassSet> incremental_steps;
  ClassSet unknown_classes;
  std::uint64_t seed = 0;

  std::size_t num_steps() const { return 1 + incremental_steps.size(); }
  ClassSet step_classes(std::size_t t) const {
    return t == 0 ? base_classes : incremental_steps.at(t - 1);
  }
  ClassSet known_classes() const {
    ClassSet all = base_classes;
    for (const auto& s : incremental_steps) all.insert(all.end(), s.begin(), s.end());
    return all;
  }

  void validate() const {
    std::set<std::uint16_t> seen;
    auto check_group = [&seen](const ClassSet& g, const char* name) {
      if (g.empty()) throw ConfigError(concat("schedule: empty ", name));
      for (std::uint16_t c : g)
        if (!seen.insert(c).second)
          throw ConfigError(concat("schedule: class ", c, " appears twice"));
    };
    check_group(base_classes, "base step");
    for (const auto& s : incremental_steps) check_group(s, "incremental step");
    for (std::uint16_t c : unknown_classes)
      if (!seen.insert(c).second)
        throw ConfigError(concat("schedule: class ", c, " appears twice"));
  }
};

// One validation episode carved from the base classes (known/unknown split,
// validation base step, and one cardinality variant of incremental steps).
struct SplitTrial {
  ClassSet val_base_classes;
  std::vector<ClassSet> val_incremental_steps;
  ClassSet val_unknown_classes;
  std::uint64_t trial_seed = 0;
};

namespace detail {

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace detail

// Splits `classes` into known (base + incremental steps) and unknown by a
// seeded shuffle. Requires base_count + k*step_size == round(fraction*N).
inline EpisodeSchedule build_schedule(const ClassSet& classes, double known_fraction,
                                      std::size_t base_count, std::size_t step_size,
                                      std::uint64_t seed) {
  const std::size_t known = detail::round_half_up(known_fraction * classes.size());
  if (known == 0 || known > classes.size())
    throw ConfigError(concat("build_schedule: known_fraction ", known_fraction,
                             " selects ", known, " of ", classes.size(),
                             " classes"));
  if (base_count == 0 || base_count > known)
    throw ConfigError(concat("build_schedule: base_count ", base_count,
                             " invalid for ", known, " known classes"));
  const std::size_t rest = known - base_count;
  if ((step_size == 0 && rest != 0) || (step_size != 0 && rest % step_size != 0)) {
    std::string valid;
    for (std::size_t b = 1; b <= known; ++b) {
      if (step_size != 0 && (known - b) % step_size == 0) {
        if (!valid.empty()) valid += ", ";
        valid += concat("(", b, ",", step_size, ")");
      }
    }
    if (step_size == 0) valid = concat("(", known, ",0)");
    throw ConfigError(concat("build_schedule: base_count ", base_count,
                             " + k*step_size ", step_size, " cannot reach ",
                             known, " known classes; valid (base_count, "
                             "step_size) pairs include: ", valid));
  }

  ClassSet shuffled = classes;
  Rng rng = Rng::keyed(seed, {fnv1a("schedule_shuffle")});
  rng.shuffle(shuffled);

  EpisodeSchedule sch;
  sch.seed = seed;
  sch.base_classes.assign(shuffled.begin(), shuffled.begin() + base_count);
  for (std::size_t off = base_count; off < known; off += step_size)
    sch.incremental_steps.emplace_back(shuffled.begin() + off,
                                       shuffled.begin() + off + step_size);
  sch.unknown_classes.assign(shuffled.begin() + known, shuffled.end());
  sch.validate();
  return sch;
}

// Base-class validation episodes: per trial, 10% of the base classes (rounded
// up, so 11 -> 2) play unknown, half of the rest (round half up) form the
// validation base step, and the remaining m classes yield three cardinality
// variants: m steps of 1, two steps of ceil/floor(m/2), one step of m. Empty
// steps are dropped. Trials reshuffle; each variant is one SplitTrial.
inline std::vector<SplitTrial> build_validation_splits(const ClassSet& base_classes,
                                                       std::size_t num_trials,
                                                       std::uint64_t seed) {
  if (base_classes.size() < 6)
    throw ConfigError(concat("build_validation_splits: need >= 6 base classes, got ",
                             base_classes.size()));
  if (num_trials == 0)
    throw ConfigError("build_validation_splits: need at least one trial");

  std::vector<SplitTrial> out;
  for (std::size_t trial = 0; trial < num_trials; ++trial) {
    ClassSet shuffled = base_classes;
    Rng rng = Rng::keyed(seed, {fnv1a("validation_split"), trial});
    rng.shuffle(shuffled);

    const std::size_t u =
        static_cast<std::size_t>(std::ceil(0.10 * base_classes.size()));
    const std::size_t known = base_classes.size() - u;
    const std::size_t first = detail::round_half_up(0.5 * known);
    const std::size_t m = known - first;

    ClassSet unknown(shuffled.begin(), shuffled.begin() + u);
    ClassSet val_base(shuffled.begin() + u, shuffled.begin() + u + first);
    ClassSet incr(shuffled.begin() + u + first, shuffled.end());

    std::vector<std::vector<ClassSet>> variants;
    {  // m steps of one class
      std::vector<ClassSet> v;
      for (std::uint16_t c : incr) v.push_back({c});
      variants.push_back(v);
    }
    {  // two steps of ceil(m/2) / floor(m/2)
      std::vector<ClassSet> v;
      const std::size_t half = (m + 1) / 2;
      v.emplace_back(incr.begin(), incr.begin() + half);
      if (m > half) v.emplace_back(incr.begin() + half, incr.end());
      variants.push_back(v);
    }
    variants.push_back({incr});  // one step with all of them

    for (std::size_t variant = 0; variant < variants.size(); ++variant) {
      SplitTrial st;
      st.val_base_classes = val_base;
      st.val_incremental_steps = variants[variant];
      st.val_unknown_classes = unknown;
      Rng mix = Rng::keyed(seed, {fnv1a("trial_seed"), trial, variant});
      st.trial_seed = mix.next_u64();
      out.push_back(std::move(st));
    }
  }
  return out;
}

}  // namespace owrlab
