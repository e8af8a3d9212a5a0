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

#include <cmath>

#include "owrlab/mlp.hpp"
#include "owrlab/owr/losses.hpp"

using namespace owrlab;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values()) v = rng.normal() * scale;
  return t;
}

// Direct per-anchor summation of the SNNL formula, no shared code with the
// implementation.
double snnl_oracle(const Tensor& z, const std::vector<std::uint16_t>& labels,
                   double phi) {
  const std::size_t B = z.dim(0), F = z.dim(1);
  double total = 0;
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < B; ++i) {
    double num = 0, den = 0;
    bool peer = false;
    for (std::size_t j = 0; j < B; ++j) {
      if (j == i) continue;
      double d = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double dd = z.at(i * F + f) - z.at(j * F + f);
        d += dd * dd;
      }
      const double e = std::exp(-d / phi);
      den += e;
      if (labels[j] == labels[i]) {
        num += e;
        peer = true;
      }
    }
    if (!peer) continue;
    total += -std::log(num / den);
    ++anchors;
  }
  return anchors == 0 ? 0.0 : total / anchors;
}

}  // namespace

TEST_CASE("bce: near-perfect scores give near-zero loss") {
  Tensor probs = Tensor::from({1, 3}, {1.0, 1e-7, 1e-7});
  Tensor targets = Tensor::from({1, 3}, {1.0, 0.0, 0.0});
  Tape tape;
  CHECK(bce_loss(tape, probs, targets).item() < 1e-5);
}

TEST_CASE("bce: coin-flip scores on 2 classes give ln 2") {
  Tensor probs = Tensor::from({2, 2}, {0.5, 0.5, 0.5, 0.5});
  Tensor targets = Tensor::from({2, 2}, {1.0, 0.0, 0.0, 1.0});
  Tape tape;
  CHECK(bce_loss(tape, probs, targets).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("bce: invariant to permuting class columns") {
  Rng rng(3);
  Tensor probs = Tensor::zeros({2, 4});
  for (auto& v : probs.values()) v = rng.uniform(0.05, 0.95);
  Tensor targets = Tensor::from({2, 4}, {1, 0, 0, 0, 0, 0, 1, 0});
  Tape t1;
  const double a = bce_loss(t1, probs, targets).item();
  Tensor probs2 = probs.clone(), targets2 = targets.clone();
  for (std::size_t b = 0; b < 2; ++b) {
    std::swap(probs2.at(b * 4 + 0), probs2.at(b * 4 + 2));
    std::swap(targets2.at(b * 4 + 0), targets2.at(b * 4 + 2));
  }
  Tape t2;
  CHECK(bce_loss(t2, probs2, targets2).item() == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("ce: uniform logits give ln C, confident logits give ~0") {
  Tensor logits = Tensor::from({1, 4}, {0.7, 0.7, 0.7, 0.7});
  Tape tape;
  CHECK(ce_logits_loss(tape, logits, {2}).item() ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  Tensor confident = Tensor::from({1, 4}, {30.0, 0.0, 0.0, 0.0});
  Tape t2;
  CHECK(ce_logits_loss(t2, confident, {0}).item() < 1e-8);
}

TEST_CASE("distillation: hand values and homogeneity") {
  Tensor z = Tensor::from({1, 2}, {1.0, 2.0});
  Tensor zp = Tensor::from({1, 2}, {1.0, 0.0});
  Tape tape;
  CHECK(distillation_loss(tape, z, zp).item() == doctest::Approx(2.0));

  Tape t2;
  CHECK(distillation_loss(t2, z, z.clone()).item() == doctest::Approx(0.0));

  // scaling the feature difference by c scales the loss by c
  for (double c : {0.0, 0.5, 3.0}) {
    Tensor zs = Tensor::from({1, 2}, {1.0, 2.0 * c});
    Tape t3;
    CHECK(distillation_loss(t3, zs, zp).item() == doctest::Approx(2.0 * c));
  }
}

TEST_CASE("deepnno score op: hand values") {
  Tensor z = Tensor::from({2, 2}, {0.0, 0.0, 1.0, 0.0});
  Tensor mu = Tensor::from({1, 2}, {0.0, 0.0});
  Tape tape;
  Tensor s = deepnno_score_op(tape, z, mu);
  CHECK(s.at(0) == doctest::Approx(1.0));
  CHECK(s.at(1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("snnl: two same-class samples give zero") {
  Tensor z = Tensor::from({2, 2}, {0.0, 0.0, 3.0, 4.0});
  Tape tape;
  CHECK(snnl_loss(tape, z, {5, 5}, 1.0).item() == doctest::Approx(0.0));
}

TEST_CASE("snnl: no same-class peer degenerates to zero") {
  Tensor z = Tensor::from({2, 2}, {0.0, 0.0, 3.0, 4.0});
  Tape tape;
  Tensor loss = snnl_loss(tape, z, {1, 2}, 1.0);
  CHECK(loss.item() == 0.0);
}

TEST_CASE("snnl: batch of 1 is a contract error") {
  Tensor z = Tensor::from({1, 2}, {0.0, 0.0});
  Tape tape;
  CHECK_THROWS_AS(snnl_loss(tape, z, {1}, 1.0), ContractError);
}

TEST_CASE("snnl: matches the brute-force oracle on fixed batches") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    Tensor z = random_tensor({4, 3}, rng);
    std::vector<std::uint16_t> labels;
    for (int i = 0; i < 4; ++i)
      labels.push_back(static_cast<std::uint16_t>(rng.uniform_index(2)));
    const double phi = rng.uniform(0.5, 3.0);
    Tape tape;
    const double got = snnl_loss(tape, z, labels, phi).item();
    CHECK(got == doctest::Approx(snnl_oracle(z, labels, phi)).epsilon(1e-10));
  }
}

TEST_CASE("gradcheck: bce through a random 2-layer mlp") {
  Rng rng(7);
  MlpSpec spec{{5, 6, 3}, 7};
  Mlp mlp(spec);
  mlp.set_trainable(false);
  Tensor mu = random_tensor({2, 3}, rng);
  Tensor targets = Tensor::from({2, 2}, {1, 0, 0, 1});
  auto f = [&](Tape& tape, Tensor& x) {
    Tensor z = mlp.forward(tape, x);
    Tensor s = deepnno_score_op(tape, z, mu);
    return bce_loss(tape, s, targets);
  };
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Tensor x = random_tensor({2, 5}, rng);
    worst = std::max(worst, gradcheck(f, x, 1e-5));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradcheck: ce, distillation, snnl, score pickers") {
  Rng rng(23);
  double worst = 0;

  for (int rep = 0; rep < 20; ++rep) {
    Tensor zp = random_tensor({3, 4}, rng);
    std::vector<std::size_t> labels = {rng.uniform_index(4), rng.uniform_index(4),
                                       rng.uniform_index(4)};
    std::vector<std::uint16_t> slabels = {
        static_cast<std::uint16_t>(rng.uniform_index(2)),
        static_cast<std::uint16_t>(rng.uniform_index(2)),
        static_cast<std::uint16_t>(1)};
    Tensor mu = random_tensor({4, 4}, rng);

    auto f_ce = [&](Tape& t, Tensor& x) { return ce_logits_loss(t, x, labels); };
    worst = std::max(worst, gradcheck(f_ce, random_tensor({3, 4}, rng)));

    auto f_ds = [&](Tape& t, Tensor& x) { return distillation_loss(t, x, zp); };
    worst = std::max(worst, gradcheck(f_ds, random_tensor({3, 4}, rng)));

    auto f_snnl = [&](Tape& t, Tensor& x) { return snnl_loss(t, x, slabels, 1.7); };
    worst = std::max(worst, gradcheck(f_snnl, random_tensor({3, 4}, rng)));

    auto f_pick = [&](Tape& t, Tensor& x) {
      return pick_true_sum(t, deepnno_score_op(t, x, mu), labels);
    };
    worst = std::max(worst, gradcheck(f_pick, random_tensor({3, 4}, rng)));

    auto f_soft = [&](Tape& t, Tensor& x) {
      Tensor logits = scale(t, sqdist_to_rows(t, x, mu), -1.0);
      return softmax_true_sum(t, logits, labels);
    };
    worst = std::max(worst, gradcheck(f_soft, random_tensor({3, 4}, rng)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradcheck: composed b-doc objective") {
  Rng rng(31);
  Tensor mu = random_tensor({3, 4}, rng);
  Tensor zp = random_tensor({4, 4}, rng);
  std::vector<std::size_t> labels = {0, 1, 2, 1};
  std::vector<std::uint16_t> slabels = {0, 1, 2, 1};
  const double phi = 1.3, gamma = 0.4, lambda = 0.7;
  auto f = [&](Tape& t, Tensor& x) {
    Tensor logits = scale(t, sqdist_to_rows(t, x, mu), -1.0 / phi);
    Tensor loss = ce_logits_loss(t, logits, labels);
    loss = add(t, loss, scale(t, snnl_loss(t, x, slabels, phi), gamma));
    return add(t, loss, scale(t, distillation_loss(t, x, zp), lambda));
  };
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep)
    worst = std::max(worst, gradcheck(f, random_tensor({4, 4}, rng)));
  CHECK(worst < 1e-4);
}
