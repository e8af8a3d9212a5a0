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

#include <string>

#include "owrlab/dg/rsda.hpp"
#include "owrlab/dg/rotation.hpp"
#include "owrlab/dg/self_challenging.hpp"

namespace owrlab {

enum class DgKind { kNone, kRsda, kRr, kSc };

inline const char* dg_kind_name(DgKind k) {
  switch (k) {
    case DgKind::kNone: return "none";
    case DgKind::kRsda: return "rsda";
    case DgKind::kRr: return "rr";
    default: return "sc";
  }
}

inline DgKind dg_kind_from_name(const std::string& s) {
  if (s == "none") return DgKind::kNone;
  if (s == "rsda") return DgKind::kRsda;
  if (s == "rr") return DgKind::kRr;
  if (s == "sc") return DgKind::kSc;
  throw ConfigError(concat("unknown dg plugin '", s, "' (want none|rsda|rr|sc)"));
}

struct DgOptions {
  DgKind kind = DgKind::kNone;
  RsdaOptions rsda;
  double rr_weight = 0.2;          // xi
  double sc_keep_percentile = 0.67;  // p
  double sc_batch_ratio = 0.33;

  void validate() const {
    if (kind == DgKind::kSc &&
        (sc_keep_percentile <= 0 || sc_keep_percentile >= 1))
      throw ConfigError("dg: sc keep percentile must be in (0,1)");
    if (kind == DgKind::kSc && (sc_batch_ratio < 0 || sc_batch_ratio > 1))
      throw ConfigError("dg: sc batch_ratio must be in [0,1]");
    if (kind == DgKind::kRr && rr_weight < 0)
      throw ConfigError("dg: rr weight must be >= 0");
    if (kind == DgKind::kRsda &&
        (rsda.population < 1 || rsda.generations < 0 || rsda.append_k < 0 ||
         rsda.max_chain < 1 || rsda.max_chain > 3 || rsda.update_every < 1))
      throw ConfigError("dg: bad rsda parameters");
  }
};

// Per-run plugin state. Plugin randomness lives on its own streams so a
// neutrally configured plugin leaves the training trajectory bit-identical.
struct DgState {
  DgOptions opt;
  TransformPool pool;
  Rng rsda_rng{0};
  Rng rr_rng{0};
  Rng sc_rng{0};
  long iteration = 0;

  static DgState make(const DgOptions& opt, std::uint64_t run_seed) {
    opt.validate();
    DgState s;
    s.opt = opt;
    s.pool.opt = opt.rsda;
    s.rsda_rng = Rng::keyed(run_seed, {fnv1a("dg_rsda")});
    s.rr_rng = Rng::keyed(run_seed, {fnv1a("dg_rr")});
    s.sc_rng = Rng::keyed(run_seed, {fnv1a("dg_sc")});
    return s;
  }
};

}  // namespace owrlab
