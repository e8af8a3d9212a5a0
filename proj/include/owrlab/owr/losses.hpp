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
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/tensor.hpp"

namespace owrlab {

// Exponential distance scores exp(-0.5 * ||z - mu_y||), one column per
// centroid row. Centroids are constants; gradients flow into z only.
inline Tensor deepnno_score_op(Tape& tape, const Tensor& z, const Tensor& centroids) {
  detail::require_matrix(z, "deepnno_score_op");
  detail::require_matrix(centroids, "deepnno_score_op");
  const std::size_t B = z.dim(0), F = z.dim(1), C = centroids.dim(0);
  if (centroids.dim(1) != F)
    throw DimensionError(concat("deepnno_score_op: feature widths differ: ", F,
                                " vs ", centroids.dim(1)));
  Tensor out = Tensor::zeros({B, C}, detail::track(z));
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double d = z.at(b * F + f) - centroids.at(c * F + f);
        acc += d * d;
      }
      out.at(b * C + c) = std::exp(-0.5 * std::sqrt(acc));
    }
  if (out.requires_grad() && tape.recording()) {
    Tensor zc = z, cc = centroids, oc = out;
    tape.record(out, [zc, cc, oc, B, F, C]() mutable {
      const double* og = oc.grad().data();
      double* zg = zc.grad().data();
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
          const double go = og[b * C + c];
          if (go == 0.0) continue;
          double acc = 0;
          for (std::size_t f = 0; f < F; ++f) {
            const double d = zc.at(b * F + f) - cc.at(c * F + f);
            acc += d * d;
          }
          const double dist = std::sqrt(acc);
          if (dist < 1e-12) continue;  // kink at the centroid itself
          const double s = std::exp(-0.5 * dist);
          const double k = go * s * (-0.5) / dist;
          for (std::size_t f = 0; f < F; ++f)
            zg[b * F + f] += k * (zc.at(b * F + f) - cc.at(c * F + f));
        }
    });
  }
  return out;
}

// Mean over batch and classes of -[t log p + (1-t) log(1-p)], with p clamped
// to [1e-7, 1 - 1e-7]. Targets are constant one-hot rows.
inline Tensor bce_loss(Tape& tape, const Tensor& probs, const Tensor& targets) {
  detail::require_same_shape(probs, targets, "bce_loss");
  constexpr double kEps = 1e-7;
  const std::size_t n = probs.numel();
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(probs.at(i), kEps, 1.0 - kEps);
    const double t = targets.at(i);
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  Tensor out = Tensor::scalar(acc / n, detail::track(probs));
  if (out.requires_grad() && tape.recording()) {
    Tensor pc = probs, tc = targets, oc = out;
    tape.record(out, [pc, tc, oc, n]() mutable {
      const double go = oc.grad()[0] / static_cast<double>(n);
      double* pg = pc.grad().data();
      for (std::size_t i = 0; i < n; ++i) {
        const double raw = pc.at(i);
        if (raw <= kEps || raw >= 1.0 - kEps) continue;  // clamp saturates
        const double t = tc.at(i);
        pg[i] += go * (-(t / raw) + (1.0 - t) / (1.0 - raw));
      }
    });
  }
  return out;
}

// Mean cross-entropy of row-wise softmax(logits) against integer labels.
inline Tensor ce_logits_loss(Tape& tape, const Tensor& logits,
                             const std::vector<std::size_t>& labels) {
  detail::require_matrix(logits, "ce_logits_loss");
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  if (labels.size() != B)
    throw DimensionError(concat("ce_logits_loss: ", labels.size(), " labels for ",
                                B, " rows"));
  for (std::size_t y : labels)
    if (y >= C) throw ContractError(concat("ce_logits_loss: label ", y,
                                           " out of range for ", C, " classes"));
  double acc = 0;
  for (std::size_t b = 0; b < B; ++b) {
    double mx = logits.at(b * C);
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, logits.at(b * C + c));
    double lse = 0;
    for (std::size_t c = 0; c < C; ++c) lse += std::exp(logits.at(b * C + c) - mx);
    lse = mx + std::log(lse);
    acc += lse - logits.at(b * C + labels[b]);
  }
  Tensor out = Tensor::scalar(acc / B, detail::track(logits));
  if (out.requires_grad() && tape.recording()) {
    Tensor lc = logits, oc = out;
    std::vector<std::size_t> lab = labels;
    tape.record(out, [lc, oc, lab, B, C]() mutable {
      const double go = oc.grad()[0] / static_cast<double>(B);
      double* lg = lc.grad().data();
      for (std::size_t b = 0; b < B; ++b) {
        double mx = lc.at(b * C);
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, lc.at(b * C + c));
        double denom = 0;
        for (std::size_t c = 0; c < C; ++c) denom += std::exp(lc.at(b * C + c) - mx);
        for (std::size_t c = 0; c < C; ++c) {
          const double p = std::exp(lc.at(b * C + c) - mx) / denom;
          lg[b * C + c] += go * (p - (c == lab[b] ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

// Feature-space distillation: mean over the batch of ||z - z_prev||.
// z_prev is the frozen previous-step features, a constant.
inline Tensor distillation_loss(Tape& tape, const Tensor& z, const Tensor& z_prev) {
  detail::require_same_shape(z, z_prev, "distillation_loss");
  detail::require_matrix(z, "distillation_loss");
  const std::size_t B = z.dim(0), F = z.dim(1);
  double acc = 0;
  for (std::size_t b = 0; b < B; ++b) {
    double s = 0;
    for (std::size_t f = 0; f < F; ++f) {
      const double d = z.at(b * F + f) - z_prev.at(b * F + f);
      s += d * d;
    }
    acc += std::sqrt(s);
  }
  Tensor out = Tensor::scalar(acc / B, detail::track(z));
  if (out.requires_grad() && tape.recording()) {
    Tensor zc = z, pc = z_prev, oc = out;
    tape.record(out, [zc, pc, oc, B, F]() mutable {
      const double go = oc.grad()[0] / static_cast<double>(B);
      double* zg = zc.grad().data();
      for (std::size_t b = 0; b < B; ++b) {
        double s = 0;
        for (std::size_t f = 0; f < F; ++f) {
          const double d = zc.at(b * F + f) - pc.at(b * F + f);
          s += d * d;
        }
        const double norm = std::sqrt(s);
        if (norm < 1e-12) continue;  // subgradient 0 at the anchor
        for (std::size_t f = 0; f < F; ++f)
          zg[b * F + f] += go * (zc.at(b * F + f) - pc.at(b * F + f)) / norm;
      }
    });
  }
  return out;
}

// Soft-nearest-neighbor loss with temperature phi: mean over anchors with at
// least one same-class peer of -log(sum_same e^{-d/phi} / sum_all e^{-d/phi}).
// Anchors without a same-class peer are skipped; a batch where every anchor
// is skipped warns and contributes a constant 0.
inline Tensor snnl_loss(Tape& tape, const Tensor& z,
                        const std::vector<std::uint16_t>& labels, double phi) {
  detail::require_matrix(z, "snnl_loss");
  const std::size_t B = z.dim(0), F = z.dim(1);
  if (labels.size() != B)
    throw DimensionError(concat("snnl_loss: ", labels.size(), " labels for ", B,
                                " rows"));
  if (B < 2) throw ContractError("snnl_loss: batch must have at least 2 samples");
  if (phi <= 0) throw ContractError(concat("snnl_loss: phi must be > 0, got ", phi));

  std::vector<double> d(B * B, 0.0);
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = i + 1; j < B; ++j) {
      double s = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const double dd = z.at(i * F + f) - z.at(j * F + f);
        s += dd * dd;
      }
      d[i * B + j] = d[j * B + i] = s;
    }

  std::vector<bool> valid(B, false);
  std::size_t num_valid = 0;
  double acc = 0;
  for (std::size_t i = 0; i < B; ++i) {
    bool has_peer = false;
    double mx = -1e300;
    for (std::size_t j = 0; j < B; ++j) {
      if (j == i) continue;
      mx = std::max(mx, -d[i * B + j] / phi);
      if (labels[j] == labels[i]) has_peer = true;
    }
    if (!has_peer) continue;
    valid[i] = true;
    ++num_valid;
    double sum_all = 0, sum_same = 0;
    for (std::size_t j = 0; j < B; ++j) {
      if (j == i) continue;
      const double e = std::exp(-d[i * B + j] / phi - mx);
      sum_all += e;
      if (labels[j] == labels[i]) sum_same += e;
    }
    acc += std::log(sum_all) - std::log(sum_same);
  }
  if (num_valid == 0) {
    warn("snnl_loss: no anchor has a same-class peer; loss is 0");
    return Tensor::scalar(0.0);
  }
  Tensor out = Tensor::scalar(acc / num_valid, detail::track(z));
  if (out.requires_grad() && tape.recording()) {
    Tensor zc = z, oc = out;
    std::vector<std::uint16_t> lab = labels;
    std::vector<double> dc = d;
    std::vector<bool> vc = valid;
    tape.record(out, [zc, oc, lab, dc, vc, num_valid, phi, B, F]() mutable {
      const double go = oc.grad()[0] / static_cast<double>(num_valid);
      double* zg = zc.grad().data();
      for (std::size_t i = 0; i < B; ++i) {
        if (!vc[i]) continue;
        double mx = -1e300;
        for (std::size_t j = 0; j < B; ++j)
          if (j != i) mx = std::max(mx, -dc[i * B + j] / phi);
        double sum_all = 0, sum_same = 0;
        for (std::size_t j = 0; j < B; ++j) {
          if (j == i) continue;
          const double e = std::exp(-dc[i * B + j] / phi - mx);
          sum_all += e;
          if (lab[j] == lab[i]) sum_same += e;
        }
        for (std::size_t j = 0; j < B; ++j) {
          if (j == i) continue;
          const double e = std::exp(-dc[i * B + j] / phi - mx);
          const double p_all = e / sum_all;
          const double p_same = lab[j] == lab[i] ? e / sum_same : 0.0;
          // d(loss_i)/d(d_ij) = (p_same - p_all) / phi
          const double w = go * (p_same - p_all) / phi;
          if (w == 0.0) continue;
          for (std::size_t f = 0; f < F; ++f) {
            const double diff = 2.0 * (zc.at(i * F + f) - zc.at(j * F + f));
            zg[i * F + f] += w * diff;
            zg[j * F + f] -= w * diff;
          }
        }
      }
    });
  }
  return out;
}

// Sum over the batch of the true-class entry of a score matrix.
inline Tensor pick_true_sum(Tape& tape, const Tensor& scores,
                            const std::vector<std::size_t>& labels) {
  detail::require_matrix(scores, "pick_true_sum");
  const std::size_t B = scores.dim(0), C = scores.dim(1);
  if (labels.size() != B)
    throw DimensionError(concat("pick_true_sum: ", labels.size(), " labels for ",
                                B, " rows"));
  double acc = 0;
  for (std::size_t b = 0; b < B; ++b) acc += scores.at(b * C + labels[b]);
  Tensor out = Tensor::scalar(acc, detail::track(scores));
  if (out.requires_grad() && tape.recording()) {
    Tensor sc = scores, oc = out;
    std::vector<std::size_t> lab = labels;
    tape.record(out, [sc, oc, lab, C]() mutable {
      const double go = oc.grad()[0];
      double* sg = sc.grad().data();
      for (std::size_t b = 0; b < lab.size(); ++b) sg[b * C + lab[b]] += go;
    });
  }
  return out;
}

// Sum over the batch of softmax(logits)[true class].
inline Tensor softmax_true_sum(Tape& tape, const Tensor& logits,
                               const std::vector<std::size_t>& labels) {
  detail::require_matrix(logits, "softmax_true_sum");
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  if (labels.size() != B)
    throw DimensionError(concat("softmax_true_sum: ", labels.size(),
                                " labels for ", B, " rows"));
  auto row_softmax = [C](const Tensor& m, std::size_t b, std::vector<double>& p) {
    double mx = m.at(b * C);
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, m.at(b * C + c));
    double denom = 0;
    for (std::size_t c = 0; c < C; ++c) {
      p[c] = std::exp(m.at(b * C + c) - mx);
      denom += p[c];
    }
    for (std::size_t c = 0; c < C; ++c) p[c] /= denom;
  };
  double acc = 0;
  std::vector<double> p(C);
  for (std::size_t b = 0; b < B; ++b) {
    row_softmax(logits, b, p);
    acc += p[labels[b]];
  }
  Tensor out = Tensor::scalar(acc, detail::track(logits));
  if (out.requires_grad() && tape.recording()) {
    Tensor lc = logits, oc = out;
    std::vector<std::size_t> lab = labels;
    tape.record(out, [lc, oc, lab, row_softmax, B, C]() mutable {
      const double go = oc.grad()[0];
      double* lg = lc.grad().data();
      std::vector<double> p(C);
      for (std::size_t b = 0; b < B; ++b) {
        row_softmax(lc, b, p);
        const double py = p[lab[b]];
        for (std::size_t c = 0; c < C; ++c)
          lg[b * C + c] += go * py * ((c == lab[b] ? 1.0 : 0.0) - p[c]);
      }
    });
  }
  return out;
}

}  // namespace owrlab
