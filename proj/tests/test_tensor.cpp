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

#include "owrlab/rng.hpp"
#include "owrlab/tensor.hpp"

using namespace owrlab;

TEST_CASE("backward: sum of squares gives 2w") {
  Tensor w = Tensor::from({1}, {3.0}, true);
  Tape tape;
  Tensor loss = sum(tape, mul(tape, w, w));
  tape.backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("backward: constant loss leaves zero grads") {
  Tensor w = Tensor::from({3}, {1.0, 2.0, 3.0}, true);
  Tensor c = Tensor::from({1}, {5.0});
  Tape tape;
  Tensor loss = sum(tape, c);  // no dependence on w
  tape.backward(loss);
  CHECK_FALSE(w.has_grad());
}

TEST_CASE("backward: non-scalar loss is a contract error") {
  Tensor w = Tensor::from({2}, {1.0, 2.0}, true);
  Tape tape;
  Tensor y = mul(tape, w, w);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("backward: repeated calls accumulate") {
  Tensor w = Tensor::from({1}, {3.0}, true);
  Tape tape;
  Tensor loss = sum(tape, mul(tape, w, w));
  tape.backward(loss);
  tape.backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("sgd_step: hand-evaluated updates") {
  SUBCASE("plain step") {
    Tensor p = Tensor::from({1}, {1.0}, true);
    p.grad()[0] = 1.0;
    std::vector<Tensor> params{p};
    sgd_step(params, 0.1, 0.0);
    CHECK(p.at(0) == doctest::Approx(0.9));
  }
  SUBCASE("zero gradient leaves params unchanged") {
    Tensor p = Tensor::from({1}, {1.5}, true);
    p.grad()[0] = 0.0;
    std::vector<Tensor> params{p};
    sgd_step(params, 0.3, 0.0);
    CHECK(p.at(0) == doctest::Approx(1.5));
  }
  SUBCASE("weight decay") {
    Tensor p = Tensor::from({1}, {2.0}, true);
    p.grad()[0] = 1.0;
    std::vector<Tensor> params{p};
    sgd_step(params, 0.5, 0.1);
    CHECK(p.at(0) == doctest::Approx(1.4));
  }
  SUBCASE("bad lr rejected") {
    std::vector<Tensor> params{Tensor::from({1}, {1.0}, true)};
    CHECK_THROWS_AS(sgd_step(params, 0.0, 0.0), ContractError);
  }
}

TEST_CASE("gradcheck: sum of squares is exact") {
  auto f = [](Tape& tape, Tensor& x) { return sum(tape, mul(tape, x, x)); };
  Rng rng(11);
  Tensor x = Tensor::zeros({6});
  for (auto& v : x.values()) v = rng.normal();
  CHECK(gradcheck(f, x, 1e-5) < 1e-8);
}

TEST_CASE("gradcheck: h outside [1e-7, 1e-3] rejected") {
  auto f = [](Tape& tape, Tensor& x) { return sum(tape, x); };
  Tensor x = Tensor::from({2}, {1.0, 2.0});
  CHECK_THROWS_AS(gradcheck(f, x, 1e-2), ContractError);
}

TEST_CASE("gradcheck: composed matmul/relu/bias pipeline") {
  Rng rng(7);
  Tensor w = Tensor::zeros({4, 3});
  for (auto& v : w.values()) v = rng.normal() + 0.1;
  Tensor b = Tensor::zeros({3});
  for (auto& v : b.values()) v = rng.normal();
  auto f = [&](Tape& tape, Tensor& x) {
    Tensor h = relu(tape, add_rowvec(tape, matmul(tape, x, w), b));
    return mean(tape, mul(tape, h, h));
  };
  Tensor x = Tensor::zeros({2, 4});
  for (auto& v : x.values()) v = rng.normal();
  CHECK(gradcheck(f, x, 1e-5) < 1e-6);
}

TEST_CASE("backward linearity: grad(a*l1 + b*l2) == a*g1 + b*g2") {
  Rng rng(3);
  const double a = 0.7, b = -1.3;
  Tensor base = Tensor::zeros({5});
  for (auto& v : base.values()) v = rng.normal();

  auto loss1 = [](Tape& t, Tensor& x) { return sum(t, mul(t, x, x)); };
  auto loss2 = [](Tape& t, Tensor& x) { return mean(t, relu(t, x)); };

  Tensor x1 = base.clone();
  x1.set_requires_grad(true);
  {
    Tape t;
    t.backward(loss1(t, x1));
  }
  Tensor x2 = base.clone();
  x2.set_requires_grad(true);
  {
    Tape t;
    t.backward(loss2(t, x2));
  }
  Tensor x3 = base.clone();
  x3.set_requires_grad(true);
  {
    Tape t;
    Tensor combined = add(t, scale(t, loss1(t, x3), a), scale(t, loss2(t, x3), b));
    t.backward(combined);
  }
  for (std::size_t i = 0; i < base.numel(); ++i) {
    CHECK(x3.grad()[i] ==
          doctest::Approx(a * x1.grad()[i] + b * x2.grad()[i]).epsilon(1e-10));
  }
}

TEST_CASE("matmul: mismatched extents raise a dimension error") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  Tape tape;
  CHECK_THROWS_AS(matmul(tape, a, b), DimensionError);
}

TEST_CASE("sqdist_to_rows: values and gradient") {
  Tensor z = Tensor::from({1, 2}, {3.0, 4.0}, true);
  Tensor refs = Tensor::from({2, 2}, {0.0, 0.0, 3.0, 0.0});
  Tape tape;
  Tensor d = sqdist_to_rows(tape, z, refs);
  CHECK(d.at(0) == doctest::Approx(25.0));
  CHECK(d.at(1) == doctest::Approx(16.0));

  auto f = [&](Tape& t, Tensor& x) { return sum(t, sqdist_to_rows(t, x, refs)); };
  Rng rng(5);
  Tensor x = Tensor::zeros({3, 2});
  for (auto& v : x.values()) v = rng.normal();
  CHECK(gradcheck(f, x, 1e-5) < 1e-8);
}

TEST_CASE("rng: keyed streams are deterministic and distinct") {
  Rng a = Rng::keyed(42, {1, 2});
  Rng b = Rng::keyed(42, {1, 2});
  Rng c = Rng::keyed(42, {1, 3});
  bool same = true, distinct = false;
  for (int i = 0; i < 16; ++i) {
    auto va = a.next_u64();
    same = same && (va == b.next_u64());
    distinct = distinct || (va != c.next_u64());
  }
  CHECK(same);
  CHECK(distinct);
}
