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
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "owrlab/dg/plugin.hpp"
#include "owrlab/owr/classify.hpp"
#include "owrlab/owr/losses.hpp"
#include "owrlab/owr/model.hpp"

namespace owrlab {

inline Tensor batch_from_samples(const std::vector<Sample>& samples) {
  if (samples.empty()) throw ContractError("batch_from_samples: empty batch");
  const std::size_t f = samples[0].image.px.size();
  Tensor t = Tensor::zeros({samples.size(), f});
  for (std::size_t b = 0; b < samples.size(); ++b) {
    const auto& px = samples[b].image.px;
    if (px.size() != f) throw DimensionError("batch_from_samples: ragged images");
    for (std::size_t i = 0; i < f; ++i) t.at(b * f + i) = px[i];
  }
  return t;
}

// Forward pass with no tape recording.
inline Tensor extract_features(const Mlp& net, const std::vector<Sample>& samples) {
  Tape scrap = Tape::disabled();
  return net.forward(scrap, batch_from_samples(samples));
}

namespace detail {

enum class Objective { kDeepNcm, kDeepNno, kBdoc };

inline std::vector<std::uint16_t> class_ids_of(const std::vector<Sample>& samples) {
  std::set<std::uint16_t> s;
  for (const Sample& x : samples) s.insert(x.class_id);
  return {s.begin(), s.end()};
}

// Running deviation of the features over the current epoch, floored at 1e-6.
struct PhiAccumulator {
  PhiPooling pooling = PhiPooling::kComponents;
  double sum = 0, sumsq = 0;
  std::size_t n = 0;

  void add(const Tensor& z) {
    const std::size_t B = z.dim(0), F = z.dim(1);
    if (pooling == PhiPooling::kComponents) {
      for (double v : z.values()) {
        sum += v;
        sumsq += v * v;
      }
      n += B * F;
    } else {
      for (std::size_t b = 0; b < B; ++b) {
        double s = 0;
        for (std::size_t f = 0; f < F; ++f) s += z.at(b * F + f) * z.at(b * F + f);
        const double norm = std::sqrt(s);
        sum += norm;
        sumsq += norm * norm;
        ++n;
      }
    }
  }

  double value() const {
    if (n < 2) return 1.0;
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return std::max(std::sqrt(var), 1e-6);
  }
};

inline Tensor centroid_matrix_for(const ClassModel& cm,
                                  const std::vector<std::uint16_t>& order) {
  if (order.empty()) throw ContractError("centroid matrix: no classes");
  const std::size_t F = cm.centroids.at(order[0]).size();
  Tensor m = Tensor::zeros({order.size(), F});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& mu = cm.centroids.at(order[i]);
    for (std::size_t f = 0; f < F; ++f) m.at(i * F + f) = mu[f];
  }
  return m;
}

inline Tensor one_hot(const std::vector<std::size_t>& idx, std::size_t classes) {
  Tensor t = Tensor::zeros({idx.size(), classes});
  for (std::size_t b = 0; b < idx.size(); ++b) t.at(b * classes + idx[b]) = 1.0;
  return t;
}

// Nearest-centroid accuracy used as RSDA fitness; samples whose class has no
// centroid yet are skipped.
inline double probe_accuracy(const Mlp& net, const ClassModel& cm,
                             const std::vector<std::uint16_t>& order,
                             const std::vector<Sample>& batch) {
  std::vector<std::uint16_t> usable;
  for (std::uint16_t cls : order)
    if (cm.centroids.count(cls)) usable.push_back(cls);
  if (usable.empty()) return 1.0;
  Tensor z = extract_features(net, batch);
  const std::size_t F = z.dim(1);
  std::size_t total = 0, correct = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    bool label_known = false;
    for (std::uint16_t cls : usable) label_known |= cls == batch[b].class_id;
    if (!label_known) continue;
    double best = 0;
    std::uint16_t best_cls = usable[0];
    bool first = true;
    for (std::uint16_t cls : usable) {
      const auto& mu = cm.centroids.at(cls);
      double d = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double dd = z.at(b * F + f) - mu[f];
        d += dd * dd;
      }
      if (first || d < best) {
        best = d;
        best_cls = cls;
        first = false;
      }
    }
    ++total;
    if (best_cls == batch[b].class_id) ++correct;
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / total;
}

// One gradient-training phase over `pool_samples` (current step plus
// rehearsed exemplars). Centroids follow batch class means by EMA, DeepNNO's
// threshold updates online from the scores the loss saw, and the DG plugin
// hooks in here.
inline void train_extractor_phase(OwrModel& model,
                                  const std::vector<Sample>& pool_samples,
                                  const ClassSet& step_classes, Objective objective,
                                  int epochs, DgState* dg) {
  MethodConfig& cfg = model.config;
  Mlp& net = model.extractor;
  net.set_trainable(true);
  const int t = model.steps_completed;
  const bool distill = t >= 1 && cfg.lambda_distill > 0 &&
                       model.prev_extractor.initialized() &&
                       objective != Objective::kDeepNcm;

  const bool use_rsda = dg && dg->opt.kind == DgKind::kRsda;
  const bool use_rr = dg && dg->opt.kind == DgKind::kRr && dg->opt.rr_weight > 0;
  const bool use_sc = dg && dg->opt.kind == DgKind::kSc && dg->opt.sc_batch_ratio > 0;
  if (use_rr && !model.rotation_head.initialized()) {
    Rng hs = Rng::keyed(model.run_seed, {fnv1a("rotation_head")});
    model.rotation_head = Mlp(rotation_head_spec(net.feature_dim(), hs.next_u64()));
  }

  std::vector<std::uint16_t> order_cls(model.classes.known);
  for (std::uint16_t c : step_classes) order_cls.push_back(c);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    PhiAccumulator phi;
    phi.pooling = cfg.phi_pooling;
    std::vector<std::size_t> order(pool_samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = Rng::keyed(model.run_seed,
                                 {fnv1a("batch_order"), std::uint64_t(t),
                                  std::uint64_t(epoch)});
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < order.size();) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      if (order.size() - stop == 1) stop = order.size();  // absorb a trailing singleton
      std::vector<Sample> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(pool_samples[order[i]]);
      start = stop;

      if (dg) ++dg->iteration;
      std::vector<Sample> clean_batch;  // pre-augmentation copies (RSDA only)
      if (use_rsda) {
        if (dg->iteration % dg->opt.rsda.update_every == 0 &&
            !model.classes.centroids.empty()) {
          auto fitness = [&](const std::vector<Sample>& probe) {
            return probe_accuracy(net, model.classes, order_cls, probe);
          };
          rsda_evolve(dg->pool, fitness, batch, dg->rsda_rng);
        }
        clean_batch = batch;
        // Augmentation targets the incoming training stream; rehearsed
        // exemplars of past classes stay canonical.
        std::vector<Sample> transformed =
            rsda_augment_batch(dg->pool, batch, dg->rsda_rng);
        for (std::size_t i = 0; i < batch.size(); ++i) {
          const bool current = std::find(step_classes.begin(), step_classes.end(),
                                         batch[i].class_id) != step_classes.end();
          if (current) batch[i] = std::move(transformed[i]);
        }
      }

      std::vector<std::size_t> theta;
      const std::size_t orig_count = batch.size();
      if (use_rr) {
        RotatedBatch rb = rr_build_batch(batch, dg->rr_rng);
        batch.insert(batch.end(), rb.rotated.begin(), rb.rotated.end());
        theta = std::move(rb.theta);
      }

      std::vector<std::uint16_t> labels;
      labels.reserve(batch.size());
      for (const Sample& s : batch) labels.push_back(s.class_id);

      Tensor x = batch_from_samples(batch);
      Tape tape;
      Tensor z = net.forward(tape, x);

      // The transformed batch drives the loss; the classifier state
      // (centroids, threshold statistics) tracks the clean features it will
      // be asked to score at test time.
      Tensor z_state = z;
      if (use_rsda) z_state = extract_features(net, clean_batch);
      update_centroids_ema(model.classes, z_state, labels);

      // Classes with a centroid, in stable order; all batch labels have one
      // after the EMA update above.
      std::vector<std::uint16_t> scoring;
      for (std::uint16_t cls : order_cls)
        if (model.classes.centroids.count(cls)) scoring.push_back(cls);
      std::map<std::uint16_t, std::size_t> col;
      for (std::size_t i = 0; i < scoring.size(); ++i) col[scoring[i]] = i;
      std::vector<std::size_t> label_idx;
      label_idx.reserve(labels.size());
      for (std::uint16_t y : labels) label_idx.push_back(col.at(y));
      Tensor M = centroid_matrix_for(model.classes, scoring);

      double phi_hat = model.classes.feature_std;
      if (objective == Objective::kBdoc) {
        phi.add(z_state);
        model.classes.feature_std = phi.value();
        phi_hat = model.classes.feature_std;
      }

      Tensor z_sem = z;
      if (use_sc) {
        TrueScoreFn score_fn = [&](Tape& side, const Tensor& leaf) {
          if (objective == Objective::kDeepNno)
            return pick_true_sum(side, deepnno_score_op(side, leaf, M), label_idx);
          const double s = objective == Objective::kBdoc ? 1.0 / phi_hat : 1.0;
          Tensor logits = scale(side, sqdist_to_rows(side, leaf, M), -s);
          return softmax_true_sum(side, logits, label_idx);
        };
        z_sem = sc_mask(tape, z, score_fn, dg->opt.sc_keep_percentile,
                        dg->opt.sc_batch_ratio, dg->sc_rng);
      }

      Tensor loss;
      std::vector<std::vector<double>> batch_scores;
      std::vector<int> batch_preds;
      switch (objective) {
        case Objective::kDeepNcm: {
          Tensor logits = scale(tape, sqdist_to_rows(tape, z_sem, M), -1.0);
          loss = ce_logits_loss(tape, logits, label_idx);
          break;
        }
        case Objective::kDeepNno: {
          Tensor scores = deepnno_score_op(tape, z_sem, M);
          loss = bce_loss(tape, scores, one_hot(label_idx, scoring.size()));
          const std::size_t C = scoring.size();
          for (std::size_t b = 0; b < batch.size(); ++b) {
            std::vector<double> row(C);
            for (std::size_t c = 0; c < C; ++c) row[c] = scores.at(b * C + c);
            const std::size_t best =
                std::max_element(row.begin(), row.end()) - row.begin();
            batch_preds.push_back(scoring[best]);
            batch_scores.push_back(std::move(row));
          }
          break;
        }
        case Objective::kBdoc: {
          Tensor logits =
              scale(tape, sqdist_to_rows(tape, z_sem, M), -1.0 / phi_hat);
          loss = ce_logits_loss(tape, logits, label_idx);
          if (cfg.gamma_snnl > 0 && batch.size() >= 2) {
            Tensor snnl = snnl_loss(tape, z_sem, labels, phi_hat);
            loss = add(tape, loss, scale(tape, snnl, cfg.gamma_snnl));
          }
          break;
        }
      }

      if (use_rr && !theta.empty()) {
        Tensor z_orig = slice_rows(tape, z, 0, orig_count);
        Tensor z_rot = slice_rows(tape, z, orig_count, orig_count);
        Tensor aux = rr_aux_loss(tape, model.rotation_head, z_orig, z_rot, theta);
        loss = add(tape, loss, scale(tape, aux, dg->opt.rr_weight));
      }

      if (distill) {
        Tape scrap = Tape::disabled();
        Tensor z_prev = model.prev_extractor.forward(scrap, x);
        Tensor ds = distillation_loss(tape, z, z_prev);
        loss = add(tape, loss, scale(tape, ds, cfg.lambda_distill));
      }

      std::vector<Tensor> params = net.params();
      if (use_rr)
        for (Tensor& p : model.rotation_head.params()) params.push_back(p);
      zero_grads(params);
      tape.backward(loss);
      sgd_step(params, cfg.lr, cfg.weight_decay);

      if (objective == Objective::kDeepNno)
        deepnno_update_threshold(model.classes, batch_scores, batch_preds, labels,
                                 cfg.neg_weight);
    }
  }
}

}  // namespace detail

// Herding-style selection: per step class, keep the `capacity` samples whose
// features sit closest to the class centroid.
inline void select_exemplars(OwrModel& model, const std::vector<Sample>& step_train,
                             const ClassSet& step_classes, int capacity) {
  model.exemplars.capacity = capacity;
  if (capacity == 0) return;  // rehearsal disabled
  for (std::uint16_t cls : step_classes) {
    std::vector<Sample> members;
    for (const Sample& s : step_train)
      if (s.class_id == cls) members.push_back(s);
    if (members.empty()) continue;
    const auto it = model.classes.centroids.find(cls);
    if (it == model.classes.centroids.end())
      throw ContractError(concat("select_exemplars: class ", cls,
                                 " has no centroid"));
    Tensor z = extract_features(model.extractor, members);
    const std::size_t F = z.dim(1);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t b = 0; b < members.size(); ++b) {
      double d = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double dd = z.at(b * F + f) - it->second[f];
        d += dd * dd;
      }
      ranked.emplace_back(d, b);
    }
    std::stable_sort(ranked.begin(), ranked.end());
    std::vector<Sample> kept;
    for (std::size_t k = 0; k < ranked.size() && k < std::size_t(capacity); ++k)
      kept.push_back(members[ranked[k].second]);
    model.exemplars.stored[cls] = std::move(kept);
  }
}

// tau_y per class: initialized at mean + 2*std of in-class scores on the
// (augmented) reserved set, then refined by gradient steps on the hinge
// objective sum_in max(0, phi - tau) + sum_other max(0, tau - phi). Classes
// absent from the reserved set keep their previous value and warn.
inline std::map<std::uint16_t, double> bdoc_learn_thresholds(
    OwrModel& model, const std::map<std::uint16_t, std::vector<Sample>>& reserved,
    const std::vector<std::uint16_t>& class_order, double tau_lr, int epochs,
    int augment_copies = 2) {
  Rng rng = Rng::keyed(model.run_seed, {fnv1a("bdoc_tau"),
                                        std::uint64_t(model.steps_completed)});
  // Build the augmented reserved pool. Magnitudes are damped toward neutral:
  // the copies should probe threshold robustness, not simulate new domains.
  std::vector<Sample> pool;
  for (const auto& [cls, samples] : reserved) {
    for (const Sample& s : samples) {
      pool.push_back(s);
      for (int k = 0; k < augment_copies; ++k) {
        Sample a = s;
        BasicTransform tr = random_basic_transform(rng);
        const float neutral = tr.kind == TransformKind::kRandomCrop ? 1.f
                              : tr.kind == TransformKind::kMirroring ? tr.magnitude
                                                                     : 0.f;
        tr.magnitude = neutral + (tr.magnitude - neutral) * 0.25f;
        tr.apply(a.image, rng);
        clamp01(a.image);
        pool.push_back(std::move(a));
      }
    }
  }

  std::map<std::uint16_t, double> taus;
  if (pool.empty()) {
    warn("bdoc_learn_thresholds: empty reserved set; thresholds unchanged");
    for (std::uint16_t cls : class_order) {
      const auto it = model.classes.class_tau.find(cls);
      taus[cls] = it == model.classes.class_tau.end() ? 1.0 : it->second;
    }
    return taus;
  }

  Tensor z = extract_features(model.extractor, pool);
  const std::size_t F = z.dim(1);
  const double phi_hat = model.classes.feature_std;

  for (std::uint16_t cls : class_order) {
    const auto cit = model.classes.centroids.find(cls);
    if (cit == model.classes.centroids.end())
      throw ContractError(concat("bdoc_learn_thresholds: class ", cls,
                                 " has no centroid"));
    std::vector<double> in_scores, other_scores;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      double d = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double dd = z.at(b * F + f) - cit->second[f];
        d += dd * dd;
      }
      const double score = d / phi_hat;
      (pool[b].class_id == cls ? in_scores : other_scores).push_back(score);
    }
    if (in_scores.empty()) {
      const auto it = model.classes.class_tau.find(cls);
      const double fallback = it == model.classes.class_tau.end() ? 1.0 : it->second;
      warn(concat("bdoc_learn_thresholds: class ", cls,
                  " absent from reserved set; tau_y = ", fallback));
      taus[cls] = fallback;
      continue;
    }
    double mean = 0;
    for (double s : in_scores) mean += s;
    mean /= in_scores.size();
    double var = 0;
    for (double s : in_scores) var += (s - mean) * (s - mean);
    var /= in_scores.size();
    double tau = mean + 2.0 * std::sqrt(var);

    for (int e = 0; e < epochs && tau_lr > 0; ++e) {
      double grad = 0;
      for (double s : in_scores)
        if (s > tau) grad -= 1.0;
      for (double s : other_scores)
        if (s < tau) grad += 1.0;
      tau -= tau_lr * grad;
      if (tau < 0) tau = 0;
    }
    taus[cls] = tau;
  }
  return taus;
}

// One incremental step: trains (or, for NNO past the base step, only updates
// centroids), refreshes thresholds, snapshots the extractor, refreshes the
// exemplar memory and extends the known set.
inline void incremental_step(OwrModel& model, const std::vector<Sample>& step_samples,
                             DgState* dg = nullptr) {
  model.config.validate();
  if (!model.extractor.initialized())
    throw ContractError("incremental_step: extractor not initialized");
  if (step_samples.empty())
    throw ContractError("incremental_step: empty training set");
  const ClassSet step_classes = detail::class_ids_of(step_samples);
  for (std::uint16_t c : step_classes)
    if (model.classes.index_of(c) >= 0)
      throw ContractError(concat("incremental_step: class ", c,
                                 " already learned in a past step"));
  const int t = model.steps_completed;
  const MethodConfig& cfg = model.config;
  const Variant variant = cfg.variant;

  // Reserved split, held out before training (threshold machinery only).
  std::vector<Sample> train_samples;
  std::map<std::uint16_t, std::vector<Sample>> new_reserved;
  if (variant == Variant::kNno || variant == Variant::kBdoc) {
    Rng rng = Rng::keyed(model.run_seed, {fnv1a("reserved"), std::uint64_t(t)});
    std::set<std::size_t> held;
    for (std::uint16_t cls : step_classes) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < step_samples.size(); ++i)
        if (step_samples[i].class_id == cls) idx.push_back(i);
      std::size_t keep = std::max<std::size_t>(
          1, detail::round_half_up(cfg.reserved_fraction * idx.size()));
      if (keep >= idx.size()) keep = idx.size() > 1 ? idx.size() - 1 : 0;
      rng.shuffle(idx);
      for (std::size_t k = 0; k < keep; ++k) {
        held.insert(idx[k]);
        new_reserved[cls].push_back(step_samples[idx[k]]);
      }
    }
    for (std::size_t i = 0; i < step_samples.size(); ++i)
      if (!held.count(i)) train_samples.push_back(step_samples[i]);
  } else {
    train_samples = step_samples;
  }

  std::vector<Sample> pool = train_samples;
  if (variant != Variant::kNno)
    for (const auto& [cls, stored] : model.exemplars.stored)
      pool.insert(pool.end(), stored.begin(), stored.end());

  // A merged view of the reserved store including this step's holdout.
  auto merged_reserved = [&]() {
    std::map<std::uint16_t, std::vector<Sample>> merged = model.reserved;
    for (const auto& [cls, samples] : new_reserved)
      merged[cls].insert(merged[cls].end(), samples.begin(), samples.end());
    return merged;
  };

  switch (variant) {
    case Variant::kNno: {
      if (t == 0) {
        detail::train_extractor_phase(model, pool, step_classes,
                                      detail::Objective::kDeepNcm,
                                      cfg.epochs_base, dg);
        model.extractor.set_trainable(false);
        model.classes.centroids.clear();
        model.classes.counts.clear();
      }
      // Exact online means in the frozen feature space, new classes only.
      Tensor z = extract_features(model.extractor, train_samples);
      std::vector<std::uint16_t> labels;
      for (const Sample& s : train_samples) labels.push_back(s.class_id);
      update_centroids_online(model.classes, z, labels,
                              {step_classes.begin(), step_classes.end()});

      if (t == 0) {
        // Base classes playing unknown during threshold estimation.
        ClassSet shuffled = step_classes;
        Rng rng = Rng::keyed(model.run_seed, {fnv1a("pseudo_unknown")});
        rng.shuffle(shuffled);
        std::size_t u = static_cast<std::size_t>(
            std::ceil(0.10 * static_cast<double>(step_classes.size())));
        if (u + 1 > step_classes.size()) u = step_classes.size() - 1;
        model.pseudo_unknown.assign(shuffled.begin(), shuffled.begin() + u);
      }

      std::vector<HeldoutPoint> heldout;
      for (const auto& [cls, samples] : merged_reserved()) {
        if (samples.empty()) continue;
        Tensor hz = extract_features(model.extractor, samples);
        const std::size_t F = hz.dim(1);
        const bool pseudo =
            std::find(model.pseudo_unknown.begin(), model.pseudo_unknown.end(),
                      cls) != model.pseudo_unknown.end();
        for (std::size_t b = 0; b < samples.size(); ++b) {
          HeldoutPoint p;
          p.features.assign(hz.values().begin() + b * F,
                            hz.values().begin() + (b + 1) * F);
          p.label = cls;
          p.pseudo_unknown = pseudo;
          heldout.push_back(std::move(p));
        }
      }
      bool has_known = false, has_unknown = false;
      for (const auto& h : heldout)
        (h.pseudo_unknown ? has_unknown : has_known) = true;
      // Temporarily expose the new classes so the estimator sees them.
      ClassModel& cm = model.classes;
      std::vector<std::uint16_t> saved_known = cm.known;
      for (std::uint16_t c : step_classes) cm.known.push_back(c);
      if (has_known && has_unknown) {
        cm.tau = estimate_nno_threshold(cm, heldout, cfg.nno_tau_grid);
      } else {
        double far = 1.0;
        for (const auto& h : heldout) {
          for (std::uint16_t cls : cm.known) {
            if (!cm.centroids.count(cls)) continue;
            far = std::max(far, detail::euclidean(h.features, cm.centroids.at(cls)));
          }
        }
        cm.tau = far + 1.0;
        warn("nno: held-out set lacks a known/pseudo-unknown split; "
             "threshold accepts everything");
      }
      cm.known = std::move(saved_known);
      break;
    }
    case Variant::kDeepNno: {
      detail::train_extractor_phase(model, pool, step_classes,
                                    detail::Objective::kDeepNno,
                                    t == 0 ? cfg.epochs_base : cfg.epochs_incremental,
                                    dg);
      break;
    }
    case Variant::kBdoc: {
      detail::train_extractor_phase(model, pool, step_classes,
                                    detail::Objective::kBdoc,
                                    t == 0 ? cfg.epochs_base : cfg.epochs_incremental,
                                    dg);
      // The EMA centroids trail the features; the rejection thresholds need
      // them current, so refresh every class present in the pool with its
      // exact mean under the final extractor.
      {
        Tensor z = extract_features(model.extractor, pool);
        const std::size_t F = z.dim(1);
        std::map<std::uint16_t, std::pair<std::vector<double>, std::size_t>> sums;
        for (std::size_t b = 0; b < pool.size(); ++b) {
          auto& [sum, k] = sums[pool[b].class_id];
          if (sum.empty()) sum.assign(F, 0.0);
          for (std::size_t f = 0; f < F; ++f) sum[f] += z.at(b * F + f);
          ++k;
        }
        for (auto& [cls, acc] : sums) {
          auto& [sum, k] = acc;
          auto& mu = model.classes.centroids[cls];
          mu.resize(F);
          for (std::size_t f = 0; f < F; ++f) mu[f] = sum[f] / k;
        }
      }
      std::vector<std::uint16_t> all_classes(model.classes.known);
      for (std::uint16_t c : step_classes) all_classes.push_back(c);
      auto taus = bdoc_learn_thresholds(model, merged_reserved(), all_classes,
                                        cfg.tau_lr, cfg.tau_epochs);
      for (const auto& [cls, tau] : taus) model.classes.class_tau[cls] = tau;
      break;
    }
  }

  model.prev_extractor = model.extractor.clone();
  model.prev_extractor.set_trainable(false);
  select_exemplars(model, train_samples, step_classes, cfg.exemplars_per_class);
  for (std::uint16_t c : step_classes) model.classes.known.push_back(c);
  for (auto& [cls, samples] : new_reserved) {
    auto& dst = model.reserved[cls];
    dst.insert(dst.end(), samples.begin(), samples.end());
  }
  model.steps_completed = t + 1;
}

}  // namespace owrlab
