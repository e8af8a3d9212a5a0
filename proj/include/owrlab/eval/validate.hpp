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

#include <map>
#include <vector>

#include "owrlab/eval/runner.hpp"
#include "owrlab/schedule.hpp"

namespace owrlab {

// Search grids for the two-stage base-class validation. Stage 1 tunes how the
// network learns (closed world without rejection); stage 2 tunes the
// rejection machinery (OWR-H) with stage-1 winners frozen.
struct ValidationGrids {
  // stage 1
  std::vector<double> lr{0.05};
  std::vector<double> weight_decay{1e-4};
  std::vector<double> lambda{1.0};  // DeepNNO, B-DOC
  std::vector<double> gamma{0.3};   // B-DOC
  // stage 2, one grid per variant
  std::vector<int> nno_tau_grid{0};
  std::vector<double> neg_weight{2.0};
  std::vector<double> tau_lr{0.01};

  void validate(Variant variant) const {
    if (lr.empty() || weight_decay.empty())
      throw ConfigError("validation: empty optimizer grid");
    if (variant != Variant::kNno && lambda.empty())
      throw ConfigError("validation: empty lambda grid");
    if (variant == Variant::kBdoc && gamma.empty())
      throw ConfigError("validation: empty gamma grid");
    if (variant == Variant::kNno && nno_tau_grid.empty())
      throw ConfigError("validation: empty nno_tau_grid grid");
    if (variant == Variant::kDeepNno && neg_weight.empty())
      throw ConfigError("validation: empty neg_weight grid");
    if (variant == Variant::kBdoc && tau_lr.empty())
      throw ConfigError("validation: empty tau_lr grid");
  }
};

struct ValidationOutcome {
  MethodConfig best;          // merged winners
  double stage1_score = 0;    // closed world without rejection
  double stage2_score = 0;    // OWR-H
  std::size_t stage1_evaluated = 0;
  std::size_t stage2_evaluated = 0;
};

namespace detail {

inline EpisodeSchedule schedule_from_trial(const SplitTrial& trial) {
  EpisodeSchedule s;
  s.base_classes = trial.val_base_classes;
  s.incremental_steps = trial.val_incremental_steps;
  s.unknown_classes = trial.val_unknown_classes;
  s.seed = trial.trial_seed;
  return s;
}

// Mean of `metric` over all trials and cardinality variants.
template <typename MetricFn>
double validation_score(const CellConfig& cell_template,
                        const std::vector<SplitTrial>& trials,
                        const std::map<std::uint16_t, Dataset>& domains,
                        MetricFn metric) {
  double total = 0;
  for (const SplitTrial& trial : trials) {
    CellConfig cell = cell_template;
    cell.seed = trial.trial_seed;
    const auto results = run_experiment(cell, schedule_from_trial(trial), domains);
    total += metric(results[0].averages());
  }
  return total / trials.size();
}

}  // namespace detail

// The two-stage protocol over base-class splits. `base_domain` must contain
// every base class; evaluation happens on its held-out instances.
inline ValidationOutcome validate_hyperparameters(
    const MethodConfig& base_config, const CellConfig& cell_template,
    const ClassSet& base_classes, const Dataset& base_domain,
    const ValidationGrids& grids, std::size_t num_trials, std::uint64_t seed) {
  const Variant variant = base_config.variant;
  grids.validate(variant);
  const std::vector<SplitTrial> trials =
      build_validation_splits(base_classes, num_trials, seed);
  std::map<std::uint16_t, Dataset> domains;
  domains[cell_template.train_domain] = base_domain;

  ValidationOutcome out;
  out.best = base_config;

  // Stage 1: optimizer and loss-weight parameters, closed world without
  // rejection. Ties break toward the earlier grid entry.
  const std::vector<double> lambdas =
      variant == Variant::kNno ? std::vector<double>{base_config.lambda_distill}
                               : grids.lambda;
  const std::vector<double> gammas =
      variant == Variant::kBdoc ? grids.gamma
                                : std::vector<double>{base_config.gamma_snnl};
  double best1 = -1;
  for (double lr : grids.lr)
    for (double wd : grids.weight_decay)
      for (double lambda : lambdas)
        for (double gamma : gammas) {
          MethodConfig cand = base_config;
          cand.lr = lr;
          cand.weight_decay = wd;
          cand.lambda_distill = lambda;
          cand.gamma_snnl = gamma;
          CellConfig cell = cell_template;
          cell.method = cand;
          cell.test_domains = {cell_template.train_domain};
          const double score = detail::validation_score(
              cell, trials, domains,
              [](const StepResult& avg) { return avg.closed_world_no_reject; });
          ++out.stage1_evaluated;
          if (score > best1) {
            best1 = score;
            out.best.lr = lr;
            out.best.weight_decay = wd;
            out.best.lambda_distill = lambda;
            out.best.gamma_snnl = gamma;
          }
        }
  out.stage1_score = best1;

  // Stage 2: rejection parameters, OWR-H, stage-1 winners frozen.
  double best2 = -1;
  auto eval_stage2 = [&](MethodConfig cand) {
    CellConfig cell = cell_template;
    cell.method = cand;
    cell.test_domains = {cell_template.train_domain};
    const double score = detail::validation_score(
        cell, trials, domains,
        [](const StepResult& avg) { return avg.owr_h; });
    ++out.stage2_evaluated;
    return score;
  };
  switch (variant) {
    case Variant::kNno:
      for (int g : grids.nno_tau_grid) {
        MethodConfig cand = out.best;
        cand.nno_tau_grid = g;
        const double score = eval_stage2(cand);
        if (score > best2) {
          best2 = score;
          out.best.nno_tau_grid = g;
        }
      }
      break;
    case Variant::kDeepNno:
      for (double w : grids.neg_weight) {
        MethodConfig cand = out.best;
        cand.neg_weight = w;
        const double score = eval_stage2(cand);
        if (score > best2) {
          best2 = score;
          out.best.neg_weight = w;
        }
      }
      break;
    case Variant::kBdoc:
      for (double tl : grids.tau_lr) {
        MethodConfig cand = out.best;
        cand.tau_lr = tl;
        const double score = eval_stage2(cand);
        if (score > best2) {
          best2 = score;
          out.best.tau_lr = tl;
        }
      }
      break;
  }
  out.stage2_score = best2;
  return out;
}

}  // namespace owrlab
