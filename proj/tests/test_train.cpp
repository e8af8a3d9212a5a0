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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "owrlab/benchmark.hpp"
#include "owrlab/owr/checkpoint.hpp"
#include "owrlab/owr/train.hpp"

using namespace owrlab;

namespace {

std::vector<Sample> samples_of(const Dataset& ds, const ClassSet& classes,
                               bool train_only = true) {
  std::vector<Sample> out;
  for (const Sample& s : ds.samples) {
    bool wanted = false;
    for (std::uint16_t c : classes) wanted = wanted || s.class_id == c;
    if (!wanted) continue;
    if (train_only && s.instance_id == 2) continue;  // instance 2 is held out
    if (!train_only && s.instance_id != 2) continue;
    out.push_back(s);
  }
  return out;
}

OwrModel fresh_model(const Dataset& ds, Variant v, std::uint64_t seed,
                     int feature_dim = 16) {
  OwrModel model;
  model.config = MethodConfig::defaults_for(v);
  model.config.epochs_base = 8;
  model.config.epochs_incremental = 10;
  model.config.exemplars_per_class = 5;
  model.run_seed = seed;
  MlpSpec spec{{ds.pixel_count(), 32, static_cast<std::size_t>(feature_dim)},
               seed * 31 + 7};
  model.extractor = Mlp(spec);
  return model;
}

double closed_world_no_reject_on(const OwrModel& model,
                                 const std::vector<Sample>& pop) {
  Tensor z = extract_features(model.extractor, pop);
  const std::size_t F = z.dim(1);
  std::size_t ok = 0;
  for (std::size_t b = 0; b < pop.size(); ++b) {
    std::vector<double> f(z.values().begin() + b * F,
                          z.values().begin() + (b + 1) * F);
    auto c = classify(model.classes, model.config.variant, f);
    if (decide_without_rejection(model.classes, model.config.variant, c.scores) ==
        pop[b].class_id)
      ++ok;
  }
  return static_cast<double>(ok) / pop.size();
}

// Multinomial logistic regression on raw pixels; the independent check that
// the toy data is actually separable.
double logreg_oracle_accuracy(const std::vector<Sample>& train,
                              const std::vector<Sample>& test,
                              std::size_t classes) {
  const std::size_t F = train[0].image.px.size();
  Tensor w = Tensor::zeros({F, classes}, true);
  Tensor b = Tensor::zeros({classes}, true);
  Tensor x = batch_from_samples(train);
  std::vector<std::size_t> labels;
  for (const Sample& s : train) labels.push_back(s.class_id);
  std::vector<Tensor> params{w, b};
  for (int epoch = 0; epoch < 150; ++epoch) {
    Tape tape;
    Tensor logits = add_rowvec(tape, matmul(tape, x, w), b);
    Tensor loss = ce_logits_loss(tape, logits, labels);
    zero_grads(params);
    tape.backward(loss);
    sgd_step(params, 0.5, 1e-4);
  }
  Tape scrap = Tape::disabled();
  Tensor logits = add_rowvec(scrap, matmul(scrap, batch_from_samples(test), w), b);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c)
      if (logits.at(i * classes + c) > logits.at(i * classes + best)) best = c;
    if (best == test[i].class_id) ++ok;
  }
  return static_cast<double>(ok) / test.size();
}

}  // namespace

TEST_CASE("incremental_step: base step with a single class") {
  Dataset ds = generate_benchmark(2, 3, 4, 5);
  OwrModel model = fresh_model(ds, Variant::kDeepNno, 1);
  model.config.exemplars_per_class = 0;
  incremental_step(model, samples_of(ds, {0}), nullptr);
  CHECK(model.steps_completed == 1);
  CHECK(model.classes.known == std::vector<std::uint16_t>{0});
  CHECK(model.classes.centroids.count(0) == 1);
  CHECK(model.exemplars.total() == 0);
  CHECK(model.prev_extractor.initialized());
}

TEST_CASE("incremental_step: class overlap with a past step is rejected") {
  Dataset ds = generate_benchmark(4, 3, 3, 5);
  OwrModel model = fresh_model(ds, Variant::kDeepNno, 1);
  incremental_step(model, samples_of(ds, {0, 1}), nullptr);
  CHECK_THROWS_AS(incremental_step(model, samples_of(ds, {1, 2}), nullptr),
                  ContractError);
}

TEST_CASE("incremental_step: two-step run beats 0.9 on separable toy data") {
  Dataset ds = generate_benchmark(4, 3, 6, 9);
  std::vector<Sample> train = samples_of(ds, {0, 1, 2, 3});
  std::vector<Sample> test = samples_of(ds, {0, 1, 2, 3}, false);
  REQUIRE(logreg_oracle_accuracy(train, test, 4) > 0.95);

  for (Variant v : {Variant::kDeepNno, Variant::kBdoc}) {
    OwrModel model = fresh_model(ds, v, 3);
    incremental_step(model, samples_of(ds, {0, 1}), nullptr);
    incremental_step(model, samples_of(ds, {2, 3}), nullptr);
    CHECK(model.steps_completed == 2);
    CHECK(closed_world_no_reject_on(model, test) > 0.9);
  }
}

TEST_CASE("incremental_step: nno freezes its extractor after the base step") {
  Dataset ds = generate_benchmark(4, 3, 4, 11);
  OwrModel model = fresh_model(ds, Variant::kNno, 2);
  incremental_step(model, samples_of(ds, {0, 1}), nullptr);
  std::vector<std::vector<double>> frozen;
  for (const Tensor& p : model.extractor.params()) frozen.push_back(p.values());
  incremental_step(model, samples_of(ds, {2, 3}), nullptr);
  for (std::size_t p = 0; p < frozen.size(); ++p)
    CHECK(model.extractor.params()[p].values() == frozen[p]);  // bit-identical
  CHECK(model.classes.tau > 0.0);
  CHECK(model.classes.centroids.size() == 4);
}

TEST_CASE("incremental_step: lambda 0 trains and the distillation term is inert") {
  // the distillation gradient at identical features is the guarded 0
  Tensor z = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6}, true);
  Tape tape;
  Tensor loss = distillation_loss(tape, z, z.clone());
  tape.backward(loss);
  for (double g : z.grad()) CHECK(g == 0.0);

  Dataset ds = generate_benchmark(4, 3, 4, 13);
  OwrModel model = fresh_model(ds, Variant::kDeepNno, 4);
  model.config.lambda_distill = 0.0;
  incremental_step(model, samples_of(ds, {0, 1}), nullptr);
  incremental_step(model, samples_of(ds, {2, 3}), nullptr);
  CHECK(model.classes.known.size() == 4);
}

TEST_CASE("disjoint growth: K^T is the union of the step class sets") {
  Dataset ds = generate_benchmark(6, 3, 3, 15);
  OwrModel model = fresh_model(ds, Variant::kDeepNno, 5);
  incremental_step(model, samples_of(ds, {4, 0}), nullptr);
  incremental_step(model, samples_of(ds, {2}), nullptr);
  incremental_step(model, samples_of(ds, {5, 1}), nullptr);
  CHECK(model.classes.known == std::vector<std::uint16_t>{0, 4, 2, 1, 5});
  std::set<std::uint16_t> uniq(model.classes.known.begin(),
                               model.classes.known.end());
  CHECK(uniq.size() == 5);
}

TEST_CASE("distillation anchoring: large lambda moves old features less") {
  Dataset ds = generate_benchmark(4, 3, 5, 21);
  auto run = [&](double lambda) {
    OwrModel model = fresh_model(ds, Variant::kDeepNno, 6);
    model.config.lambda_distill = lambda;
    incremental_step(model, samples_of(ds, {0, 1}), nullptr);
    std::vector<Sample> old_exemplars;
    for (const auto& [cls, stored] : model.exemplars.stored)
      old_exemplars.insert(old_exemplars.end(), stored.begin(), stored.end());
    Tensor before = extract_features(model.extractor, old_exemplars);
    incremental_step(model, samples_of(ds, {2, 3}), nullptr);
    Tensor after = extract_features(model.extractor, old_exemplars);
    double moved = 0;
    const std::size_t F = before.dim(1);
    for (std::size_t b = 0; b < old_exemplars.size(); ++b) {
      double d = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double dd = after.at(b * F + f) - before.at(b * F + f);
        d += dd * dd;
      }
      moved += std::sqrt(d) / old_exemplars.size();
    }
    return moved;
  };
  // Eq-2-style norms keep a unit-magnitude subgradient arbitrarily close to
  // the anchor, so extreme lambdas oscillate under plain SGD; the anchoring
  // effect is asserted at the shipped trade-off value.
  CHECK(run(0.3) < run(0.0));
}

TEST_CASE("checkpoint: save/load round-trips the whole model") {
  namespace fs = std::filesystem;
  Dataset ds = generate_benchmark(4, 3, 4, 23);
  OwrModel model = fresh_model(ds, Variant::kBdoc, 7);
  incremental_step(model, samples_of(ds, {0, 1}), nullptr);
  incremental_step(model, samples_of(ds, {2}), nullptr);

  const std::string dir =
      (fs::temp_directory_path() / "owrlab_ckpt_test").string();
  fs::remove_all(dir);
  save_checkpoint(dir, model);

  OwrModel loaded;
  loaded.config = model.config;
  load_checkpoint(dir, loaded);
  CHECK(loaded.steps_completed == model.steps_completed);
  CHECK(loaded.classes.known == model.classes.known);
  CHECK(loaded.classes.tau == model.classes.tau);
  CHECK(loaded.classes.feature_std == model.classes.feature_std);
  CHECK(loaded.classes.class_tau == model.classes.class_tau);
  CHECK(loaded.classes.centroids == model.classes.centroids);
  CHECK(loaded.exemplars.total() == model.exemplars.total());
  CHECK(loaded.reserved.size() == model.reserved.size());
  for (std::size_t p = 0; p < model.extractor.params().size(); ++p)
    CHECK(loaded.extractor.params()[p].values() ==
          model.extractor.params()[p].values());

  // and the loaded model keeps training identically to the original
  std::vector<Sample> step3 = samples_of(ds, {3});
  incremental_step(model, step3, nullptr);
  incremental_step(loaded, step3, nullptr);
  for (std::size_t p = 0; p < model.extractor.params().size(); ++p)
    CHECK(loaded.extractor.params()[p].values() ==
          model.extractor.params()[p].values());
  fs::remove_all(dir);
}

TEST_CASE("score ranges hold on trained models") {
  Dataset ds = generate_benchmark(4, 3, 4, 27);
  std::vector<Sample> test = samples_of(ds, {0, 1, 2, 3}, false);
  for (Variant v : {Variant::kNno, Variant::kDeepNno, Variant::kBdoc}) {
    OwrModel model = fresh_model(ds, v, 8);
    incremental_step(model, samples_of(ds, {0, 1}), nullptr);
    incremental_step(model, samples_of(ds, {2, 3}), nullptr);
    Tensor z = extract_features(model.extractor, test);
    const std::size_t F = z.dim(1);
    for (std::size_t b = 0; b < test.size(); ++b) {
      std::vector<double> f(z.values().begin() + b * F,
                            z.values().begin() + (b + 1) * F);
      auto c = classify(model.classes, v, f);
      CHECK((c.prediction == kUnknownLabel ||
             model.classes.index_of(static_cast<std::uint16_t>(c.prediction)) >= 0));
      for (double s : c.scores) {
        if (v == Variant::kDeepNno) {
          CHECK(s > 0.0);
          CHECK(s <= 1.0);
        } else if (v == Variant::kBdoc) {
          CHECK(s >= 0.0);
        } else {
          CHECK(s <= model.classes.normalizer);
        }
      }
    }
  }
}
