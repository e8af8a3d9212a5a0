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

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "owrlab/dg/plugin.hpp"
#include "owrlab/eval/metrics.hpp"
#include "owrlab/owr/train.hpp"
#include "owrlab/schedule.hpp"

namespace owrlab {

// One (method, dg, train-domain, seed) cell.
struct CellConfig {
  MethodConfig method;
  DgOptions dg;
  std::vector<std::size_t> mlp_hidden{96};
  std::size_t feature_dim = 48;
  std::uint16_t train_domain = 0;
  std::vector<std::uint16_t> test_domains{0};
  std::uint64_t seed = 1;

  // Canonical text form; hashing it fingerprints the cell.
  std::string canonical() const {
    std::string s = concat("method=", variant_name(method.variant),
                           ";lambda=", method.lambda_distill,
                           ";gamma=", method.gamma_snnl, ";lr=", method.lr,
                           ";wd=", method.weight_decay,
                           ";eb=", method.epochs_base,
                           ";ei=", method.epochs_incremental,
                           ";neg=", method.neg_weight, ";taulr=", method.tau_lr,
                           ";taue=", method.tau_epochs,
                           ";taugrid=", method.nno_tau_grid,
                           ";ex=", method.exemplars_per_class,
                           ";bs=", method.batch_size,
                           ";rf=", method.reserved_fraction, ";phi=",
                           method.phi_pooling == PhiPooling::kComponents ? "c" : "n",
                           ";dg=", dg_kind_name(dg.kind));
    if (dg.kind == DgKind::kRsda)
      s += concat(";rsda=", dg.rsda.update_every, ",", dg.rsda.population, ",",
                  dg.rsda.generations, ",", dg.rsda.append_k, ",",
                  dg.rsda.max_chain);
    if (dg.kind == DgKind::kRr) s += concat(";xi=", dg.rr_weight);
    if (dg.kind == DgKind::kSc)
      s += concat(";scp=", dg.sc_keep_percentile, ";scr=", dg.sc_batch_ratio);
    s += concat(";mlp=");
    for (std::size_t h : mlp_hidden) s += concat(h, "-");
    s += concat(feature_dim, ";train=", train_domain, ";seed=", seed);
    return s;
  }

  std::string fingerprint() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
  }
};

struct RunResult {
  std::string fingerprint;
  std::string method;
  std::string dg;
  std::uint16_t train_domain = 0;
  std::uint16_t test_domain = 0;
  std::uint64_t seed = 0;
  std::vector<StepResult> steps;

  StepResult averages() const {
    StepResult avg;
    if (steps.empty()) return avg;
    for (const StepResult& s : steps) {
      avg.closed_world_no_reject += s.closed_world_no_reject;
      avg.closed_world_with_reject += s.closed_world_with_reject;
      avg.open_set_acc += s.open_set_acc;
      avg.owr_h += s.owr_h;
    }
    const double n = static_cast<double>(steps.size());
    avg.closed_world_no_reject /= n;
    avg.closed_world_with_reject /= n;
    avg.open_set_acc /= n;
    avg.owr_h /= n;
    return avg;
  }
};

namespace detail {

// Instance-wise split: the largest instance id of every class is the test
// instance, everything else trains.
inline std::uint32_t test_instance_of(const Dataset& ds, std::uint16_t cls) {
  std::uint32_t best = 0;
  bool seen = false;
  for (const Sample& s : ds.samples)
    if (s.class_id == cls) {
      best = seen ? std::max(best, s.instance_id) : s.instance_id;
      seen = true;
    }
  if (!seen) throw ConfigError(concat("dataset has no samples of class ", cls));
  return best;
}

inline std::vector<Sample> train_split_of_classes(const Dataset& ds,
                                                  const ClassSet& classes) {
  std::vector<Sample> out;
  for (std::uint16_t cls : classes) {
    const std::uint32_t held = test_instance_of(ds, cls);
    for (const Sample& s : ds.samples)
      if (s.class_id == cls && s.instance_id != held) out.push_back(s);
  }
  return out;
}

}  // namespace detail

// Metrics of one trained model on one test domain. The known population is
// the held-out instance of every learned class; the unknown population is
// the held-out instance of the schedule's unknown classes.
inline StepResult evaluate_step(const OwrModel& model, const Dataset& test_domain,
                                const ClassSet& unknown_classes) {
  StepResult r;
  r.step = model.steps_completed == 0 ? 0 : model.steps_completed - 1;

  std::vector<Sample> known_pop, unknown_pop;
  for (std::uint16_t cls : model.classes.known) {
    const std::uint32_t held = detail::test_instance_of(test_domain, cls);
    for (const Sample& s : test_domain.samples)
      if (s.class_id == cls && s.instance_id == held) known_pop.push_back(s);
  }
  for (std::uint16_t cls : unknown_classes) {
    const std::uint32_t held = detail::test_instance_of(test_domain, cls);
    for (const Sample& s : test_domain.samples)
      if (s.class_id == cls && s.instance_id == held) unknown_pop.push_back(s);
  }
  if (known_pop.empty()) throw ContractError("evaluate_step: empty test set");

  const Variant variant = model.config.variant;
  auto classify_batch = [&](const std::vector<Sample>& pop,
                            std::vector<int>& with_reject,
                            std::vector<int>& without_reject) {
    Tensor z = extract_features(model.extractor, pop);
    const std::size_t F = z.dim(1);
    for (std::size_t b = 0; b < pop.size(); ++b) {
      std::vector<double> feat(z.values().begin() + b * F,
                               z.values().begin() + (b + 1) * F);
      Classification c = classify(model.classes, variant, feat);
      with_reject.push_back(c.prediction);
      without_reject.push_back(
          decide_without_rejection(model.classes, variant, c.scores));
    }
  };

  std::vector<int> known_wr, known_nr, labels;
  classify_batch(known_pop, known_wr, known_nr);
  for (const Sample& s : known_pop) labels.push_back(s.class_id);
  r.closed_world_no_reject = closed_world_accuracy(known_nr, labels, false);
  r.closed_world_with_reject = closed_world_accuracy(known_wr, labels, true);

  if (!unknown_pop.empty()) {
    std::vector<int> unk_wr, unk_nr;
    classify_batch(unknown_pop, unk_wr, unk_nr);
    r.open_set_acc = open_set_accuracy(unk_wr);
    r.owr_h = owr_harmonic(r.closed_world_with_reject, r.open_set_acc);
  } else {
    r.open_set_acc = 0;
    r.owr_h = 0;
  }
  return r;
}

// Runs the base step plus every incremental step on the train domain and
// evaluates all metrics on every test domain after each step.
inline std::vector<RunResult> run_experiment(
    const CellConfig& cell, const EpisodeSchedule& schedule,
    const std::map<std::uint16_t, Dataset>& domains) {
  schedule.validate();
  const auto train_it = domains.find(cell.train_domain);
  if (train_it == domains.end())
    throw ConfigError(concat("run_experiment: train domain ", cell.train_domain,
                             " has no dataset"));
  const Dataset& train_ds = train_it->second;

  // Every schedule class must exist in every domain.
  ClassSet all_classes = schedule.known_classes();
  all_classes.insert(all_classes.end(), schedule.unknown_classes.begin(),
                     schedule.unknown_classes.end());
  for (std::uint16_t dom : cell.test_domains) {
    const auto it = domains.find(dom);
    if (it == domains.end())
      throw ConfigError(concat("run_experiment: test domain ", dom,
                               " has no dataset"));
    for (std::uint16_t cls : all_classes)
      if (it->second.indices_of_class(cls).empty())
        throw ConfigError(concat("run_experiment: class ", cls,
                                 " missing from domain ", dom));
  }

  OwrModel model;
  model.config = cell.method;
  model.config.validate();
  model.run_seed = cell.seed;
  MlpSpec spec;
  spec.layer_widths.push_back(train_ds.pixel_count());
  for (std::size_t h : cell.mlp_hidden) spec.layer_widths.push_back(h);
  spec.layer_widths.push_back(cell.feature_dim);
  Rng seed_rng = Rng::keyed(cell.seed, {fnv1a("mlp_seed")});
  spec.seed = seed_rng.next_u64();
  model.extractor = Mlp(spec);

  DgState dg_state;
  DgState* dg = nullptr;
  if (cell.dg.kind != DgKind::kNone) {
    dg_state = DgState::make(cell.dg, cell.seed);
    dg = &dg_state;
  }

  std::vector<RunResult> results;
  for (std::uint16_t dom : cell.test_domains) {
    RunResult r;
    r.fingerprint = cell.fingerprint();
    r.method = variant_name(cell.method.variant);
    r.dg = dg_kind_name(cell.dg.kind);
    r.train_domain = cell.train_domain;
    r.test_domain = dom;
    r.seed = cell.seed;
    results.push_back(std::move(r));
  }

  for (std::size_t t = 0; t < schedule.num_steps(); ++t) {
    const ClassSet step_classes = schedule.step_classes(t);
    std::vector<Sample> step_samples =
        detail::train_split_of_classes(train_ds, step_classes);
    incremental_step(model, step_samples, dg);
    for (std::size_t d = 0; d < cell.test_domains.size(); ++d) {
      StepResult sr = evaluate_step(model, domains.at(cell.test_domains[d]),
                                    schedule.unknown_classes);
      sr.step = t;
      results[d].steps.push_back(sr);
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Results CSV: one row per (fingerprint, step, test_domain).

inline std::string results_csv_header() {
  return "fingerprint,method,dg,train_domain,test_domain,seed,step,"
         "closed_world_no_reject,closed_world_with_reject,open_set_accuracy,"
         "owr_h\n";
}

inline std::string results_to_csv_rows(const std::vector<RunResult>& results) {
  std::string out;
  char buf[512];
  for (const RunResult& r : results) {
    for (const StepResult& s : r.steps) {
      std::snprintf(buf, sizeof buf,
                    "%s,%s,%s,%u,%u,%llu,%zu,%.6f,%.6f,%.6f,%.6f\n",
                    r.fingerprint.c_str(), r.method.c_str(), r.dg.c_str(),
                    unsigned(r.train_domain), unsigned(r.test_domain),
                    static_cast<unsigned long long>(r.seed), s.step,
                    s.closed_world_no_reject, s.closed_world_with_reject,
                    s.open_set_acc, s.owr_h);
      out += buf;
    }
  }
  return out;
}

}  // namespace owrlab
