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
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "owrlab/common.hpp"

namespace owrlab {

// Dense float64 tensor, row-major, with an optional gradient buffer.
// Copies alias the same storage (cheap handles); use clone() for a deep copy.
class Tensor {
  struct Data {
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until touched by backward
    bool requires_grad = false;
  };

 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false) {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    std::size_t n = check_shape(shape);
    t.d_->shape = std::move(shape);
    t.d_->value.assign(n, 0.0);
    t.d_->requires_grad = requires_grad;
    return t;
  }

  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values,
                     bool requires_grad = false) {
    std::size_t n = check_shape(shape);
    if (n != values.size()) {
      throw DimensionError(concat("tensor: shape wants ", n, " values, got ",
                                  values.size()));
    }
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = std::move(shape);
    t.d_->value = std::move(values);
    t.d_->requires_grad = requires_grad;
    return t;
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return from({1}, {v}, requires_grad);
  }

  bool defined() const { return d_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return d_->shape; }
  std::size_t numel() const { return d_->value.size(); }
  std::size_t dim(std::size_t i) const { return d_->shape.at(i); }
  std::size_t ndim() const { return d_->shape.size(); }

  std::vector<double>& values() { return d_->value; }
  const std::vector<double>& values() const { return d_->value; }
  double& at(std::size_t i) { return d_->value[i]; }
  double at(std::size_t i) const { return d_->value[i]; }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }

  // Lazily allocated, zero-filled. Backward passes accumulate here.
  std::vector<double>& grad() {
    if (d_->grad.size() != d_->value.size()) d_->grad.assign(d_->value.size(), 0.0);
    return d_->grad;
  }
  bool has_grad() const { return d_->grad.size() == d_->value.size(); }
  void zero_grad() {
    if (has_grad()) std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
  }

  double item() const {
    if (numel() != 1) {
      throw ContractError(concat("tensor: item() on non-scalar of ", numel(),
                                 " elements"));
    }
    return d_->value[0];
  }

  Tensor clone() const {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = d_->shape;
    t.d_->value = d_->value;
    t.d_->requires_grad = d_->requires_grad;
    return t;
  }

  bool all_finite() const {
    for (double v : d_->value)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_storage(const Tensor& o) const { return d_ == o.d_; }

 private:
  static std::size_t check_shape(const std::vector<std::size_t>& shape) {
    if (shape.empty()) throw DimensionError("tensor: empty shape");
    std::size_t n = 1;
    for (std::size_t e : shape) {
      if (e == 0) throw DimensionError("tensor: zero extent");
      n *= e;
    }
    return n;
  }

  std::shared_ptr<Data> d_;
};

// Reverse-mode tape. Operations push backward closures in execution order;
// backward() replays them in exact reverse order. Each pass starts from fresh
// intermediate grads, so repeated backward() calls without zeroing leaf grads
// accumulate into the leaves.
class Tape {
 public:
  Tape() = default;
  // A disabled tape records nothing; use for gradient-free forward passes.
  static Tape disabled() {
    Tape t;
    t.enabled_ = false;
    return t;
  }
  bool recording() const { return enabled_; }

  void record(Tensor out, std::function<void()> fn) {
    nodes_.emplace_back(std::move(out), std::move(fn));
  }

  void backward(const Tensor& loss) {
    if (loss.numel() != 1)
      throw ContractError(concat("backward: loss must be scalar, has ",
                                 loss.numel(), " elements"));
    for (auto& [out, fn] : nodes_) out.zero_grad();
    const_cast<Tensor&>(loss).grad()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->second();
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  bool enabled_ = true;
  std::vector<std::pair<Tensor, std::function<void()>>> nodes_;
};

namespace detail {

inline void require_matrix(const Tensor& t, const char* who) {
  if (t.ndim() != 2)
    throw DimensionError(concat(who, ": expected 2-d tensor, got ", t.ndim(), "-d"));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (a.shape() != b.shape()) {
    throw DimensionError(concat(who, ": shape mismatch: ", a.numel(), " vs ",
                                b.numel(), " elements"));
  }
}

inline bool track(const Tensor& a) { return a.requires_grad(); }
inline bool track(const Tensor& a, const Tensor& b) {
  return a.requires_grad() || b.requires_grad();
}

}  // namespace detail

// out[b,n] = sum_k a[b,k] * w[k,n]
inline Tensor matmul(Tape& tape, const Tensor& a, const Tensor& w) {
  detail::require_matrix(a, "matmul");
  detail::require_matrix(w, "matmul");
  const std::size_t B = a.dim(0), K = a.dim(1), N = w.dim(1);
  if (w.dim(0) != K) {
    throw DimensionError(concat("matmul: inner extents differ: lhs is ", B, "x",
                                K, ", rhs is ", w.dim(0), "x", w.dim(1)));
  }
  Tensor out = Tensor::zeros({B, N}, detail::track(a, w));
  const double* av = a.values().data();
  const double* wv = w.values().data();
  double* ov = out.values().data();
  for (std::size_t b = 0; b < B; ++b) {
    const double* arow = av + b * K;
    double* orow = ov + b * N;
    for (std::size_t k = 0; k < K; ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      const double* wrow = wv + k * N;
      for (std::size_t n = 0; n < N; ++n) orow[n] += s * wrow[n];
    }
  }
  if (out.requires_grad() && tape.recording()) {
    Tensor ac = a, wc = w, oc = out;
    tape.record(out, [ac, wc, oc, B, K, N]() mutable {
      const double* og = oc.grad().data();
      if (ac.requires_grad()) {
        double* ag = ac.grad().data();
        const double* wv2 = wc.values().data();
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t k = 0; k < K; ++k) {
            const double* wrow = wv2 + k * N;
            const double* orow = og + b * N;
            double acc = 0.0;
            for (std::size_t n = 0; n < N; ++n) acc += orow[n] * wrow[n];
            ag[b * K + k] += acc;
          }
      }
      if (wc.requires_grad()) {
        double* wg = wc.grad().data();
        const double* av2 = ac.values().data();
        for (std::size_t b = 0; b < B; ++b) {
          const double* arow = av2 + b * K;
          const double* orow = og + b * N;
          for (std::size_t k = 0; k < K; ++k) {
            const double s = arow[k];
            if (s == 0.0) continue;
            double* wrow = wg + k * N;
            for (std::size_t n = 0; n < N; ++n) wrow[n] += s * orow[n];
          }
        }
      }
    });
  }
  return out;
}

// Broadcast-add a length-N row vector to every row of a BxN matrix.
inline Tensor add_rowvec(Tape& tape, const Tensor& m, const Tensor& v) {
  detail::require_matrix(m, "add_rowvec");
  const std::size_t B = m.dim(0), N = m.dim(1);
  if (v.numel() != N) {
    throw DimensionError(concat("add_rowvec: vector has ", v.numel(),
                                " elements, matrix rows have ", N));
  }
  Tensor out = Tensor::zeros({B, N}, detail::track(m, v));
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t n = 0; n < N; ++n)
      out.at(b * N + n) = m.at(b * N + n) + v.at(n);
  if (out.requires_grad() && tape.recording()) {
    Tensor mc = m, vc = v, oc = out;
    tape.record(out, [mc, vc, oc, B, N]() mutable {
      const double* og = oc.grad().data();
      if (mc.requires_grad()) {
        double* mg = mc.grad().data();
        for (std::size_t i = 0; i < B * N; ++i) mg[i] += og[i];
      }
      if (vc.requires_grad()) {
        double* vg = vc.grad().data();
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t n = 0; n < N; ++n) vg[n] += og[b * N + n];
      }
    });
  }
  return out;
}

inline Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape(), detail::track(a, b));
  for (std::size_t i = 0; i < a.numel(); ++i) out.at(i) = a.at(i) + b.at(i);
  if (out.requires_grad() && tape.recording()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record(out, [ac, bc, oc]() mutable {
      const auto& og = oc.grad();
      if (ac.requires_grad()) {
        auto& g = ac.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
      }
      if (bc.requires_grad()) {
        auto& g = bc.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
      }
    });
  }
  return out;
}

inline Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape(), detail::track(a, b));
  for (std::size_t i = 0; i < a.numel(); ++i) out.at(i) = a.at(i) - b.at(i);
  if (out.requires_grad() && tape.recording()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record(out, [ac, bc, oc]() mutable {
      const auto& og = oc.grad();
      if (ac.requires_grad()) {
        auto& g = ac.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i];
      }
      if (bc.requires_grad()) {
        auto& g = bc.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] -= og[i];
      }
    });
  }
  return out;
}

inline Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape(), detail::track(a, b));
  for (std::size_t i = 0; i < a.numel(); ++i) out.at(i) = a.at(i) * b.at(i);
  if (out.requires_grad() && tape.recording()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record(out, [ac, bc, oc]() mutable {
      const auto& og = oc.grad();
      if (ac.requires_grad()) {
        auto& g = ac.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i] * bc.at(i);
      }
      if (bc.requires_grad()) {
        auto& g = bc.grad();
        for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i] * ac.at(i);
      }
    });
  }
  return out;
}

inline Tensor scale(Tape& tape, const Tensor& x, double c) {
  Tensor out = Tensor::zeros(x.shape(), detail::track(x));
  for (std::size_t i = 0; i < x.numel(); ++i) out.at(i) = c * x.at(i);
  if (out.requires_grad() && tape.recording()) {
    Tensor xc = x, oc = out;
    tape.record(out, [xc, oc, c]() mutable {
      const auto& og = oc.grad();
      auto& g = xc.grad();
      for (std::size_t i = 0; i < og.size(); ++i) g[i] += c * og[i];
    });
  }
  return out;
}

inline Tensor relu(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), detail::track(x));
  for (std::size_t i = 0; i < x.numel(); ++i)
    out.at(i) = x.at(i) > 0.0 ? x.at(i) : 0.0;
  if (out.requires_grad() && tape.recording()) {
    Tensor xc = x, oc = out;
    tape.record(out, [xc, oc]() mutable {
      const auto& og = oc.grad();
      auto& g = xc.grad();
      for (std::size_t i = 0; i < og.size(); ++i)
        if (xc.at(i) > 0.0) g[i] += og[i];
    });
  }
  return out;
}

inline Tensor sum(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) acc += x.at(i);
  Tensor out = Tensor::scalar(acc, detail::track(x));
  if (out.requires_grad() && tape.recording()) {
    Tensor xc = x, oc = out;
    tape.record(out, [xc, oc]() mutable {
      const double og = oc.grad()[0];
      auto& g = xc.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += og;
    });
  }
  return out;
}

inline Tensor mean(Tape& tape, const Tensor& x) {
  Tensor s = sum(tape, x);
  return scale(tape, s, 1.0 / static_cast<double>(x.numel()));
}

// [B x Fa], [B x Fb] -> [B x Fa+Fb]
inline Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_matrix(a, "concat_cols");
  detail::require_matrix(b, "concat_cols");
  if (a.dim(0) != b.dim(0)) {
    throw DimensionError(concat("concat_cols: row counts differ: ", a.dim(0),
                                " vs ", b.dim(0)));
  }
  const std::size_t B = a.dim(0), Fa = a.dim(1), Fb = b.dim(1);
  Tensor out = Tensor::zeros({B, Fa + Fb}, detail::track(a, b));
  for (std::size_t r = 0; r < B; ++r) {
    for (std::size_t i = 0; i < Fa; ++i) out.at(r * (Fa + Fb) + i) = a.at(r * Fa + i);
    for (std::size_t i = 0; i < Fb; ++i)
      out.at(r * (Fa + Fb) + Fa + i) = b.at(r * Fb + i);
  }
  if (out.requires_grad() && tape.recording()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record(out, [ac, bc, oc, B, Fa, Fb]() mutable {
      const auto& og = oc.grad();
      if (ac.requires_grad()) {
        auto& g = ac.grad();
        for (std::size_t r = 0; r < B; ++r)
          for (std::size_t i = 0; i < Fa; ++i)
            g[r * Fa + i] += og[r * (Fa + Fb) + i];
      }
      if (bc.requires_grad()) {
        auto& g = bc.grad();
        for (std::size_t r = 0; r < B; ++r)
          for (std::size_t i = 0; i < Fb; ++i)
            g[r * Fb + i] += og[r * (Fa + Fb) + Fa + i];
      }
    });
  }
  return out;
}

// Rows [start, start+count) of a matrix; gradients route back to the source rows.
inline Tensor slice_rows(Tape& tape, const Tensor& x, std::size_t start,
                         std::size_t count) {
  detail::require_matrix(x, "slice_rows");
  const std::size_t B = x.dim(0), F = x.dim(1);
  if (start + count > B)
    throw DimensionError(concat("slice_rows: [", start, ", ", start + count,
                                ") out of ", B, " rows"));
  Tensor out = Tensor::zeros({count, F}, detail::track(x));
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t f = 0; f < F; ++f)
      out.at(r * F + f) = x.at((start + r) * F + f);
  if (out.requires_grad() && tape.recording()) {
    Tensor xc = x, oc = out;
    tape.record(out, [xc, oc, start, count, F]() mutable {
      const auto& og = oc.grad();
      auto& g = xc.grad();
      for (std::size_t r = 0; r < count; ++r)
        for (std::size_t f = 0; f < F; ++f)
          g[(start + r) * F + f] += og[r * F + f];
    });
  }
  return out;
}

// Elementwise product with a constant mask; gradients flow through kept entries.
inline Tensor hadamard_const(Tape& tape, const Tensor& x, const Tensor& mask) {
  detail::require_same_shape(x, mask, "hadamard_const");
  Tensor out = Tensor::zeros(x.shape(), detail::track(x));
  for (std::size_t i = 0; i < x.numel(); ++i) out.at(i) = x.at(i) * mask.at(i);
  if (out.requires_grad() && tape.recording()) {
    Tensor xc = x, mc = mask, oc = out;
    tape.record(out, [xc, mc, oc]() mutable {
      const auto& og = oc.grad();
      auto& g = xc.grad();
      for (std::size_t i = 0; i < og.size(); ++i) g[i] += og[i] * mc.at(i);
    });
  }
  return out;
}

// Squared Euclidean distance from each row of z [BxF] to each row of the
// constant reference matrix refs [CxF]; refs receive no gradient.
inline Tensor sqdist_to_rows(Tape& tape, const Tensor& z, const Tensor& refs) {
  detail::require_matrix(z, "sqdist_to_rows");
  detail::require_matrix(refs, "sqdist_to_rows");
  const std::size_t B = z.dim(0), F = z.dim(1), C = refs.dim(0);
  if (refs.dim(1) != F) {
    throw DimensionError(concat("sqdist_to_rows: feature widths differ: ", F,
                                " vs ", refs.dim(1)));
  }
  Tensor out = Tensor::zeros({B, C}, detail::track(z));
  const double* zv = z.values().data();
  const double* rv = refs.values().data();
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      const double* zr = zv + b * F;
      const double* rr = rv + c * F;
      for (std::size_t f = 0; f < F; ++f) {
        const double d = zr[f] - rr[f];
        acc += d * d;
      }
      out.at(b * C + c) = acc;
    }
  if (out.requires_grad() && tape.recording()) {
    Tensor zc = z, rc = refs, oc = out;
    tape.record(out, [zc, rc, oc, B, F, C]() mutable {
      const double* og = oc.grad().data();
      double* zg = zc.grad().data();
      const double* zv2 = zc.values().data();
      const double* rv2 = rc.values().data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
          const double go = og[b * C + c];
          if (go == 0.0) continue;
          const double* zr = zv2 + b * F;
          const double* rr = rv2 + c * F;
          double* gz = zg + b * F;
          for (std::size_t f = 0; f < F; ++f) gz[f] += go * 2.0 * (zr[f] - rr[f]);
        }
    });
  }
  return out;
}

// p <- p - lr * (g + weight_decay * p), elementwise over a parameter list.
inline void sgd_step(std::vector<Tensor>& params, double lr, double weight_decay) {
  if (lr <= 0.0) throw ContractError(concat("sgd_step: lr must be > 0, got ", lr));
  if (weight_decay < 0.0)
    throw ContractError(concat("sgd_step: weight_decay must be >= 0, got ",
                               weight_decay));
  for (Tensor& p : params) {
    if (!p.has_grad()) continue;
    auto& v = p.values();
    auto& g = p.grad();
    if (g.size() != v.size())
      throw DimensionError(concat("sgd_step: grad has ", g.size(),
                                  " elements, param has ", v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] -= lr * (g[i] + weight_decay * v[i]);
  }
}

inline void zero_grads(std::vector<Tensor>& params) {
  for (Tensor& p : params) p.zero_grad();
}

// Max over coordinates of |autodiff - central difference| / max(1, |cd|).
// f must be scalar-valued; inputs with rectifier kinks exactly at 0 are
// excluded by precondition.
inline double gradcheck(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor x,
                        double h = 1e-5) {
  if (h < 1e-7 || h > 1e-3)
    throw ContractError(concat("gradcheck: h must be in [1e-7, 1e-3], got ", h));
  x.set_requires_grad(true);
  x.zero_grad();
  Tape tape;
  Tensor loss = f(tape, x);
  if (loss.numel() != 1) throw ContractError("gradcheck: f must be scalar-valued");
  if (!loss.all_finite()) throw NumericError("gradcheck: non-finite loss");
  tape.backward(loss);
  std::vector<double> autodiff = x.grad();

  double max_err = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double saved = x.at(i);
    x.at(i) = saved + h;
    Tape tp;
    Tensor xp = x;
    double fp = f(tp, xp).item();
    x.at(i) = saved - h;
    Tape tm;
    Tensor xm = x;
    double fm = f(tm, xm).item();
    x.at(i) = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("gradcheck: non-finite intermediate");
    const double cd = (fp - fm) / (2.0 * h);
    const double err = std::abs(autodiff[i] - cd) / std::max(1.0, std::abs(cd));
    if (err > max_err) max_err = err;
  }
  return max_err;
}

}  // namespace owrlab
