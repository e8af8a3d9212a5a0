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

#include <vector>

#include "owrlab/dg/transforms.hpp"
#include "owrlab/mlp.hpp"
#include "owrlab/owr/losses.hpp"

namespace owrlab {

// Rotated copies with their quarter-turn labels. Semantic labels are kept on
// the rotated copies too, so both halves join the semantic objective.
struct RotatedBatch {
  std::vector<Sample> rotated;
  std::vector<std::size_t> theta;  // 0..3, counterclockwise quarter turns
};

// theta uniform over {0, 90, 180, 270}; rotated copies get one random basic
// augmentation to harden the auxiliary task. Images must be square.
inline RotatedBatch rr_build_batch(const std::vector<Sample>& batch, Rng& rng) {
  RotatedBatch out;
  out.rotated.reserve(batch.size());
  for (const Sample& s : batch) {
    if (s.image.height != s.image.width)
      throw ContractError(concat("rr_build_batch: image must be square, got ",
                                 s.image.height, "x", s.image.width));
    const std::size_t theta = rng.uniform_index(4);
    Sample r = s;
    r.image = rotate_quarter(s.image, static_cast<int>(theta));
    BasicTransform aug = random_basic_transform(rng);
    aug.apply(r.image, rng);
    clamp01(r.image);
    out.rotated.push_back(std::move(r));
    out.theta.push_back(theta);
  }
  return out;
}

// The auxiliary branch rho: concat(z, z_rot) -> 4 logits -> cross-entropy
// against theta. Gradients flow into both rho and the extractor features;
// the caller scales the loss by xi.
inline Tensor rr_aux_loss(Tape& tape, const Mlp& head, const Tensor& z_orig,
                          const Tensor& z_rot, const std::vector<std::size_t>& theta) {
  if (head.spec().layer_widths.back() != 4)
    throw ContractError("rr_aux_loss: rotation head must emit 4 logits");
  Tensor pair = concat_cols(tape, z_orig, z_rot);
  Tensor logits = head.forward(tape, pair);
  return ce_logits_loss(tape, logits, theta);
}

inline MlpSpec rotation_head_spec(std::size_t feature_dim, std::uint64_t seed) {
  return MlpSpec{{2 * feature_dim, 16, 4}, seed};
}

}  // namespace owrlab
