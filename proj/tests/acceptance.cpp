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
//
// Acceptance suite: every release criterion, one pass/fail line each.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "owrlab/owrlab.hpp"

using namespace owrlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_start;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double s = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values()) v = rng.normal() * s;
  return t;
}

// ---------------------------------------------------------------------------
// Criterion 1: gradients of every training loss match finite differences.

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0;
  const int reps = 20;

  for (int rep = 0; rep < reps; ++rep) {
    Tensor mu = random_tensor({3, 5}, rng);
    Tensor targets = Tensor::zeros({4, 3});
    for (int b = 0; b < 4; ++b) targets.at(b * 3 + b % 3) = 1.0;
    std::vector<std::size_t> labels = {0, 1, 2, 1};
    std::vector<std::uint16_t> slabels = {0, 1, 2, 1};
    Tensor zp = random_tensor({4, 5}, rng);
    const double phi = rng.uniform(0.8, 2.0);

    auto f_bce = [&](Tape& t, Tensor& x) {
      return bce_loss(t, deepnno_score_op(t, x, mu), targets);
    };
    worst = std::max(worst, gradcheck(f_bce, random_tensor({4, 5}, rng)));

    auto f_ce = [&](Tape& t, Tensor& x) {
      return ce_logits_loss(t, scale(t, sqdist_to_rows(t, x, mu), -1.0), labels);
    };
    worst = std::max(worst, gradcheck(f_ce, random_tensor({4, 5}, rng)));

    auto f_ds = [&](Tape& t, Tensor& x) { return distillation_loss(t, x, zp); };
    worst = std::max(worst, gradcheck(f_ds, random_tensor({4, 5}, rng)));

    auto f_snnl = [&](Tape& t, Tensor& x) {
      return snnl_loss(t, x, slabels, phi);
    };
    worst = std::max(worst, gradcheck(f_snnl, random_tensor({4, 5}, rng)));

    Mlp head(rotation_head_spec(5, 500 + rep));
    head.set_trainable(false);
    std::vector<std::size_t> theta = {1, 3};
    auto f_rr = [&](Tape& t, Tensor& x) {
      Tensor zo = slice_rows(t, x, 0, 2);
      Tensor zr = slice_rows(t, x, 2, 2);
      return rr_aux_loss(t, head, zo, zr, theta);
    };
    worst = std::max(worst, gradcheck(f_rr, random_tensor({4, 5}, rng)));

    auto f_bdoc = [&](Tape& t, Tensor& x) {
      Tensor logits = scale(t, sqdist_to_rows(t, x, mu), -1.0 / phi);
      Tensor loss = ce_logits_loss(t, logits, labels);
      loss = add(t, loss, scale(t, snnl_loss(t, x, slabels, phi), 0.4));
      return add(t, loss, scale(t, distillation_loss(t, x, zp), 0.7));
    };
    worst = std::max(worst, gradcheck(f_bdoc, random_tensor({4, 5}, rng)));
  }
  const double secs = seconds_since(t0);
  report("C1 gradient suite", worst < 1e-4 && secs < 30.0,
         concat("max rel err ", worst, " over 6 losses x ", reps,
                " instances in ", secs, " s (< 1e-4, < 30 s)"));
}

// ---------------------------------------------------------------------------
// Criterion 2: closed-form scores and transforms match brute-force oracles.

void criterion_2() {
  Rng rng(202);
  double worst = 0;
  bool decisions_ok = true;
  const int cases = 100;

  for (int rep = 0; rep < cases; ++rep) {
    const std::size_t F = 2 + rng.uniform_index(4);
    const std::size_t C = 1 + rng.uniform_index(4);
    ClassModel cm;
    cm.tau = rng.uniform(0.5, 3.0);
    cm.feature_std = rng.uniform(0.5, 3.0);
    for (std::size_t c = 0; c < C; ++c) {
      cm.known.push_back(static_cast<std::uint16_t>(c));
      std::vector<double> mu(F);
      for (auto& v : mu) v = rng.normal();
      cm.centroids[c] = mu;
      cm.class_tau[c] = rng.uniform(0.2, 4.0);
    }
    std::vector<double> z(F);
    for (auto& v : z) v = rng.normal();

    auto dist = [&](std::size_t c) {
      double acc = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double d = z[f] - cm.centroids[c][f];
        acc += d * d;
      }
      return std::sqrt(acc);
    };

    {  // NNO
      auto got = nno_classify(cm, z);
      bool all_neg = true;
      double best = -1e300;
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < C; ++c) {
        const double expect = cm.normalizer * (1.0 - dist(c) / cm.tau);
        worst = std::max(worst, std::abs(got.scores[c] - expect));
        if (expect > 0) all_neg = false;
        if (expect > best) {
          best = expect;
          best_c = c;
        }
      }
      const int expect_pred = all_neg ? kUnknownLabel : int(best_c);
      decisions_ok = decisions_ok && got.prediction == expect_pred;
    }
    {  // DeepNNO
      auto got = deepnno_classify(cm, z);
      bool all_low = true;
      double best = -1e300;
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < C; ++c) {
        const double expect = std::exp(-0.5 * dist(c));
        worst = std::max(worst, std::abs(got.scores[c] - expect));
        if (expect > cm.tau) all_low = false;
        if (expect > best) {
          best = expect;
          best_c = c;
        }
      }
      const int expect_pred = all_low ? kUnknownLabel : int(best_c);
      decisions_ok = decisions_ok && got.prediction == expect_pred;
    }
    {  // B-DOC
      auto got = bdoc_classify(cm, z);
      bool all_over = true;
      double best = 1e300;
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < C; ++c) {
        const double expect = dist(c) * dist(c) / cm.feature_std;
        worst = std::max(worst, std::abs(got.scores[c] - expect));
        if (expect <= cm.class_tau[c]) all_over = false;
        if (expect < best) {
          best = expect;
          best_c = c;
        }
      }
      const int expect_pred = all_over ? kUnknownLabel : int(best_c);
      decisions_ok = decisions_ok && got.prediction == expect_pred;
    }
    {  // SNNL vs direct summation
      const std::size_t B = 3 + rng.uniform_index(3);
      Tensor zz = random_tensor({B, F}, rng);
      std::vector<std::uint16_t> labels;
      for (std::size_t b = 0; b < B; ++b)
        labels.push_back(static_cast<std::uint16_t>(rng.uniform_index(2)));
      const double phi = rng.uniform(0.5, 2.5);
      double total = 0;
      std::size_t anchors = 0;
      for (std::size_t i = 0; i < B; ++i) {
        double num = 0, den = 0;
        bool peer = false;
        for (std::size_t j = 0; j < B; ++j) {
          if (i == j) continue;
          double d = 0;
          for (std::size_t f = 0; f < F; ++f) {
            const double dd = zz.at(i * F + f) - zz.at(j * F + f);
            d += dd * dd;
          }
          const double e = std::exp(-d / phi);
          den += e;
          if (labels[i] == labels[j]) {
            num += e;
            peer = true;
          }
        }
        if (!peer) continue;
        total += -std::log(num / den);
        ++anchors;
      }
      const double expect = anchors ? total / anchors : 0.0;
      Tape tape;
      worst = std::max(worst,
                       std::abs(snnl_loss(tape, zz, labels, phi).item() - expect));
    }
    {  // OWR-H
      const double a = rng.uniform(), b = rng.uniform();
      const double expect = (a + b) == 0 ? 0 : 2 * a * b / (a + b);
      worst = std::max(worst, std::abs(owr_harmonic(a, b) - expect));
    }
    {  // sc mask vs descending-sort oracle
      const std::size_t n = 4 + rng.uniform_index(5);
      std::vector<double> g(n);
      for (auto& v : g) v = rng.normal();
      const double p = rng.uniform(0.15, 0.85);
      auto mask = sc_row_mask(g, p);
      std::vector<double> desc = g;
      std::sort(desc.rbegin(), desc.rend());
      const std::size_t drop = static_cast<std::size_t>(std::ceil((1 - p) * n));
      const double q = desc[drop - 1];
      for (std::size_t i = 0; i < n; ++i) {
        const double expect = g[i] >= q ? 0.0 : 1.0;
        worst = std::max(worst, std::abs(mask[i] - expect));
      }
    }
    {  // rotation vs index-map oracle rot(r, c) -> (W-1-c, r)
      const std::uint16_t w = static_cast<std::uint16_t>(3 + rng.uniform_index(4));
      Image im(w, w, 1);
      for (auto& v : im.px) v = static_cast<float>(rng.uniform());
      Image r = rotate90_ccw(im);
      for (std::uint16_t row = 0; row < w; ++row)
        for (std::uint16_t col = 0; col < w; ++col)
          worst = std::max(
              worst, double(std::abs(r.at(w - 1 - col, row, 0) - im.at(row, col, 0))));
    }
  }
  report("C2 formula oracles", worst < 1e-9 && decisions_ok,
         concat("max abs deviation ", worst, " over ", cases,
                " randomized cases per formula (< 1e-9), decisions ",
                decisions_ok ? "agree" : "DISAGREE"));
}

// ---------------------------------------------------------------------------
// Criterion 3: protocol arithmetic reproduces the published splits.

void criterion_3() {
  bool ok = true;
  std::string detail;
  {
    ClassSet classes;
    for (std::uint16_t i = 0; i < 51; ++i) classes.push_back(i);
    auto s = build_schedule(classes, 26.0 / 51.0, 11, 5, 1);
    ok = ok && s.base_classes.size() == 11 && s.incremental_steps.size() == 3;
    for (const auto& st : s.incremental_steps) ok = ok && st.size() == 5;
    ok = ok && s.unknown_classes.size() == 25;
    detail += concat("51-class: base 11 + 3x5 steps, ", s.unknown_classes.size(),
                     " unknown; ");
  }
  {
    ClassSet base;
    for (std::uint16_t i = 0; i < 11; ++i) base.push_back(i);
    auto trials = build_validation_splits(base, 1, 7);
    ok = ok && trials.size() == 3;
    ok = ok && trials[0].val_unknown_classes.size() == 2;
    ok = ok && trials[0].val_base_classes.size() == 5;
    ok = ok && trials[0].val_incremental_steps.size() == 4;
    for (const auto& st : trials[0].val_incremental_steps)
      ok = ok && st.size() == 1;
    ok = ok && trials[1].val_incremental_steps.size() == 2 &&
         trials[1].val_incremental_steps[0].size() == 2 &&
         trials[1].val_incremental_steps[1].size() == 2;
    ok = ok && trials[2].val_incremental_steps.size() == 1 &&
         trials[2].val_incremental_steps[0].size() == 4;
    detail += "11-base: 2 unknown / 5 first / 4 incremental, variants 4x1, 2x2, 1x4";
  }
  report("C3 protocol oracles", ok, detail);
}

// ---------------------------------------------------------------------------
// Criteria 4-6 share one run matrix over the default benchmark.

struct MatrixKey {
  Variant method;
  DgKind dg;
  std::uint64_t seed;
  bool operator<(const MatrixKey& o) const {
    return std::tie(method, dg, seed) < std::tie(o.method, o.dg, o.seed);
  }
};

struct MatrixEntry {
  std::map<std::uint16_t, StepResult> averages;  // per test domain
  double wall_seconds = 0;
};

std::map<MatrixKey, MatrixEntry> run_matrix(
    const ExperimentConfig& cfg, const std::map<std::uint16_t, Dataset>& domains,
    const std::vector<std::pair<Variant, DgKind>>& combos,
    const std::vector<std::uint64_t>& seeds) {
  std::map<MatrixKey, MatrixEntry> out;
  const EpisodeSchedule schedule = cfg.schedule();
  for (const auto& [method, dg] : combos) {
    for (std::uint64_t seed : seeds) {
      const auto t0 = std::chrono::steady_clock::now();
      CellConfig cell = cfg.cell(method, dg, seed);
      auto results = run_experiment(cell, schedule, domains);
      MatrixEntry entry;
      entry.wall_seconds = seconds_since(t0);
      for (const RunResult& r : results) {
        StepResult avg = r.averages();
        entry.averages[r.test_domain] = avg;
      }
      out[{method, dg, seed}] = entry;
      std::fprintf(stderr, "  ran %s+%s seed %llu in %.1f s\n",
                   variant_name(method), dg_kind_name(dg),
                   static_cast<unsigned long long>(seed), entry.wall_seconds);
    }
  }
  return out;
}

double matrix_mean(const std::map<MatrixKey, MatrixEntry>& matrix, Variant m,
                   DgKind dg, const std::vector<std::uint64_t>& seeds,
                   std::uint16_t domain, double StepResult::*field) {
  double acc = 0;
  for (std::uint64_t s : seeds)
    acc += matrix.at({m, dg, s}).averages.at(domain).*field / seeds.size();
  return acc;
}

// ---------------------------------------------------------------------------

int run_all() {
  g_start = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();

  // The default benchmark, in memory.
  ExperimentConfig cfg;
  Dataset base = generate_benchmark(cfg.classes, cfg.instances_per_class,
                                    cfg.samples_per_instance, cfg.benchmark_seed,
                                    cfg.image_size, cfg.image_size);
  std::map<std::uint16_t, Dataset> domains;
  for (const DomainSpec& spec : cfg.domains) {
    domains[spec.domain_id] =
        spec.is_identity() ? base
                           : apply_domain_dataset(base, spec, cfg.benchmark_seed);
  }

  // Benchmark contract: a fixed probe classifier trained on D0 scores
  // monotonically non-increasing accuracy on D0, D1, D2.
  {
    const EpisodeSchedule schedule = cfg.schedule();
    std::vector<Sample> train =
        detail::train_split_of_classes(base, schedule.known_classes());
    const std::size_t F = base.pixel_count();
    const std::size_t C = cfg.classes;
    Tensor w = Tensor::zeros({F, C}, true);
    Tensor b = Tensor::zeros({C}, true);
    Tensor x = batch_from_samples(train);
    std::vector<std::size_t> labels;
    for (const Sample& s : train) labels.push_back(s.class_id);
    std::vector<Tensor> params{w, b};
    for (int epoch = 0; epoch < 120; ++epoch) {
      Tape tape;
      Tensor loss = ce_logits_loss(tape, add_rowvec(tape, matmul(tape, x, w), b),
                                   labels);
      zero_grads(params);
      tape.backward(loss);
      sgd_step(params, 0.5, 1e-4);
    }
    auto probe_acc = [&](const Dataset& ds) {
      std::vector<Sample> pop;
      for (std::uint16_t cls : schedule.known_classes()) {
        const std::uint32_t held = detail::test_instance_of(ds, cls);
        for (const Sample& s : ds.samples)
          if (s.class_id == cls && s.instance_id == held) pop.push_back(s);
      }
      Tape scrap = Tape::disabled();
      Tensor logits =
          add_rowvec(scrap, matmul(scrap, batch_from_samples(pop), w), b);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < pop.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < C; ++c)
          if (logits.at(i * C + c) > logits.at(i * C + best)) best = c;
        if (best == pop[i].class_id) ++ok;
      }
      return double(ok) / pop.size();
    };
    const double a0 = probe_acc(domains[0]);
    const double a1 = probe_acc(domains[1]);
    const double a2 = probe_acc(domains[2]);
    report("benchmark domain ordering (probe classifier)",
           a0 >= a1 && a1 >= a2,
           concat("probe accuracy D0 ", a0, " >= D1 ", a1, " >= D2 ", a2));
  }

  const std::vector<std::uint64_t> seeds5 = {1, 2, 3, 4, 5};
  const std::vector<std::uint64_t> seeds3 = {1, 2, 3};
  std::vector<std::pair<Variant, DgKind>> combos;
  for (Variant m : {Variant::kNno, Variant::kDeepNno, Variant::kBdoc})
    combos.emplace_back(m, DgKind::kNone);
  for (Variant m : {Variant::kDeepNno, Variant::kBdoc})
    for (DgKind dg : {DgKind::kSc, DgKind::kRr, DgKind::kRsda})
      combos.emplace_back(m, dg);

  std::fprintf(stderr, "acceptance: running the %zu-combo x 5-seed matrix...\n",
               combos.size());
  auto matrix = run_matrix(cfg, domains, combos, seeds5);

  // Criterion 4: closed-world learning in-domain.
  {
    bool ok = true;
    double max_wall = 0;
    std::string detail;
    for (Variant m : {Variant::kNno, Variant::kDeepNno, Variant::kBdoc}) {
      const double mean = matrix_mean(matrix, m, DgKind::kNone, seeds3, 0,
                                      &StepResult::closed_world_no_reject);
      ok = ok && mean >= 0.80;
      detail += concat(variant_name(m), " ", mean, " ");
      for (std::uint64_t s : seeds5)
        max_wall = std::max(max_wall,
                            matrix.at({m, DgKind::kNone, s}).wall_seconds);
    }
    ok = ok && max_wall < 180.0;
    detail += concat("(>= 0.80 over 3 seeds; slowest run ", max_wall,
                     " s < 180 s)");
    report("C4 closed-world learning", ok, detail);
  }

  // Criterion 5: domain-shift degradation, D2 at least as hard as D1.
  {
    bool ok = true;
    std::string detail;
    for (Variant m : {Variant::kNno, Variant::kDeepNno, Variant::kBdoc}) {
      const double h0 =
          matrix_mean(matrix, m, DgKind::kNone, seeds5, 0, &StepResult::owr_h);
      const double h1 =
          matrix_mean(matrix, m, DgKind::kNone, seeds5, 1, &StepResult::owr_h);
      const double h2 =
          matrix_mean(matrix, m, DgKind::kNone, seeds5, 2, &StepResult::owr_h);
      const double gap1 = h0 - h1, gap2 = h0 - h2;
      ok = ok && gap2 >= 0.10 && gap2 >= gap1;
      detail += concat(variant_name(m), " OWR-H ", h0, "/", h1, "/", h2, " ");
    }
    detail += "(gap to D2 >= 0.10 and >= gap to D1, 5 seeds)";
    report("C5 domain-shift degradation", ok, detail);
  }

  // Criterion 6: DG mitigation.
  {
    bool ok = true;
    std::string detail;
    for (Variant m : {Variant::kDeepNno, Variant::kBdoc}) {
      const double base0 =
          matrix_mean(matrix, m, DgKind::kNone, seeds5, 0, &StepResult::owr_h);
      const double base1 =
          matrix_mean(matrix, m, DgKind::kNone, seeds5, 1, &StepResult::owr_h);
      const double base2 =
          matrix_mean(matrix, m, DgKind::kNone, seeds5, 2, &StepResult::owr_h);
      const double sc2 =
          matrix_mean(matrix, m, DgKind::kSc, seeds5, 2, &StepResult::owr_h);
      const bool sc_ok = sc2 > base2;
      detail += concat(variant_name(m), " SC d2 ", sc2, ">", base2,
                       sc_ok ? " ok; " : " FAIL; ");
      ok = ok && sc_ok;
      for (DgKind dg : {DgKind::kRr, DgKind::kRsda}) {
        const double p0 =
            matrix_mean(matrix, m, dg, seeds5, 0, &StepResult::owr_h);
        const double p1 =
            matrix_mean(matrix, m, dg, seeds5, 1, &StepResult::owr_h);
        const double p2 =
            matrix_mean(matrix, m, dg, seeds5, 2, &StepResult::owr_h);
        const bool non_inferior = p0 >= base0 - 0.02;
        const bool improves = p1 > base1 || p2 > base2;
        ok = ok && non_inferior && improves;
        detail += concat(variant_name(m), "+", dg_kind_name(dg), " d0 ", p0,
                         non_inferior ? "" : " INFERIOR", ", shifted gain ",
                         improves ? "yes" : "NO", "; ");
      }
    }
    report("C6 DG mitigation", ok, detail);
  }

  // Criterion 7: the DeepNNO rejection sweep is monotone with the right limits.
  {
    const EpisodeSchedule schedule = cfg.schedule();
    CellConfig cell = cfg.cell(Variant::kDeepNno, DgKind::kNone, 1);
    OwrModel model;
    model.config = cell.method;
    model.run_seed = cell.seed;
    MlpSpec spec;
    spec.layer_widths.push_back(base.pixel_count());
    for (std::size_t h : cell.mlp_hidden) spec.layer_widths.push_back(h);
    spec.layer_widths.push_back(cell.feature_dim);
    Rng sr = Rng::keyed(cell.seed, {fnv1a("mlp_seed")});
    spec.seed = sr.next_u64();
    model.extractor = Mlp(spec);
    for (std::size_t t = 0; t < schedule.num_steps(); ++t)
      incremental_step(model,
                       detail::train_split_of_classes(base, schedule.step_classes(t)));

    bool ok = true;
    double prev_osa = -1, prev_cwr = 2, last_osa = 0, last_cwr = 1;
    for (int k = 0; k <= 20; ++k) {
      model.classes.tau = k / 20.0;
      StepResult r = evaluate_step(model, base, schedule.unknown_classes);
      ok = ok && r.open_set_acc >= prev_osa && r.closed_world_with_reject <= prev_cwr;
      prev_osa = r.open_set_acc;
      prev_cwr = r.closed_world_with_reject;
      last_osa = r.open_set_acc;
      last_cwr = r.closed_world_with_reject;
    }
    ok = ok && last_osa == 1.0 && last_cwr == 0.0;
    report("C7 rejection sweep", ok,
           concat("open-set accuracy climbs monotonically to ", last_osa,
                  ", closed-world-with-rejection falls to ", last_cwr,
                  " across tau in [0, 1]"));
  }

  // Criterion 8: distillation controls forgetting (old-class closed-world
  // accuracy with the rejection option, after the final step).
  {
    const EpisodeSchedule schedule = cfg.schedule();
    auto old_class_acc = [&](double lambda, std::uint64_t seed) {
      CellConfig cell = cfg.cell(Variant::kDeepNno, DgKind::kNone, seed);
      cell.method.lambda_distill = lambda;
      OwrModel model;
      model.config = cell.method;
      model.run_seed = seed;
      MlpSpec spec;
      spec.layer_widths.push_back(base.pixel_count());
      for (std::size_t h : cell.mlp_hidden) spec.layer_widths.push_back(h);
      spec.layer_widths.push_back(cell.feature_dim);
      Rng sr = Rng::keyed(seed, {fnv1a("mlp_seed")});
      spec.seed = sr.next_u64();
      model.extractor = Mlp(spec);
      for (std::size_t t = 0; t < schedule.num_steps(); ++t)
        incremental_step(model, detail::train_split_of_classes(
                                    base, schedule.step_classes(t)));
      ClassSet old_classes = schedule.base_classes;
      for (std::size_t t = 1; t + 1 < schedule.num_steps(); ++t)
        for (std::uint16_t c : schedule.incremental_steps[t - 1])
          old_classes.push_back(c);
      std::vector<Sample> pop;
      for (std::uint16_t cls : old_classes) {
        const std::uint32_t held = detail::test_instance_of(base, cls);
        for (const Sample& s : base.samples)
          if (s.class_id == cls && s.instance_id == held) pop.push_back(s);
      }
      Tensor z = extract_features(model.extractor, pop);
      const std::size_t F = z.dim(1);
      std::size_t ok = 0;
      for (std::size_t b = 0; b < pop.size(); ++b) {
        std::vector<double> f(z.values().begin() + b * F,
                              z.values().begin() + (b + 1) * F);
        if (classify(model.classes, Variant::kDeepNno, f).prediction ==
            pop[b].class_id)
          ++ok;
      }
      return double(ok) / pop.size();
    };
    const double validated = MethodConfig::defaults_for(Variant::kDeepNno)
                                 .lambda_distill;
    double with = 0, without = 0;
    for (std::uint64_t s : seeds5) {
      with += old_class_acc(validated, s) / seeds5.size();
      without += old_class_acc(0.0, s) / seeds5.size();
    }
    report("C8 forgetting control", with > without,
           concat("old-class accuracy after the final step: ", with,
                  " with the validated lambda ", validated, " vs ", without,
                  " with lambda 0 (5-seed mean)"));
  }

  // Criterion 9: a run re-executed from its manifest reproduces its CSV.
  {
    const fs::path root = fs::temp_directory_path() / "owrlab_acceptance_c9";
    fs::remove_all(root);
    ExperimentConfig small;
    small.classes = 8;
    small.instances_per_class = 3;
    small.samples_per_instance = 5;
    small.base_count = 2;
    small.step_size = 1;
    small.mlp_hidden = {32};
    small.feature_dim = 16;
    small.methods = {Variant::kDeepNno};
    small.dg_kinds = {DgKind::kRsda};
    small.dg_options.rsda.update_every = 15;
    small.seeds = {9};
    small.method_overrides["common"] = {{"epochs_base", 6},
                                        {"epochs_incremental", 8},
                                        {"exemplars_per_class", 4}};
    small.data_dir = (root / "data").string();
    small.output_dir = (root / "runA").string();
    generate_datasets(small);
    const std::string csv1 = drive_run(small, 1);

    std::ifstream manifest_in((root / "runA" / "manifest.json").string());
    nlohmann::json manifest;
    manifest_in >> manifest;
    manifest["output_dir"] = (root / "runB").string();
    ExperimentConfig replay = config_from_json(manifest);
    const std::string csv2 = drive_run(replay, 1);
    const bool ok = csv1 == csv2 && !csv1.empty();
    report("C9 determinism", ok,
           concat("manifest re-execution reproduces results.csv bit-for-bit (",
                  csv1.size(), " bytes)"));
    fs::remove_all(root);
  }

  // Criterion 10: total wall time.
  {
    const double secs = seconds_since(g_start);
    report("C10 wall time", secs < 600.0,
           concat("acceptance suite finished in ", secs, " s (< 600 s)"));
  }

  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main() { return run_all(); }
