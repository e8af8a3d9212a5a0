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

#include <array>
#include <cstdint>

#include "owrlab/dataset.hpp"
#include "owrlab/image.hpp"
#include "owrlab/rng.hpp"

namespace owrlab {

// Parametric acquisition-condition shift. Stages apply in a fixed order:
// scale_jitter -> color_map -> contrast -> blur -> noise -> occlusion -> clamp.
// Domain 0 is the identity spec.
struct DomainSpec {
  std::uint16_t domain_id = 0;
  std::array<float, 3> color_gain{1.f, 1.f, 1.f};
  std::array<float, 3> color_bias{0.f, 0.f, 0.f};
  float contrast = 0.f;
  int blur_radius = 0;
  float noise_sigma = 0.f;
  int occlusion_count = 0;
  int occlusion_max_patch = 0;
  float scale_min = 1.f;
  float scale_max = 1.f;

  bool identity_color() const {
    return color_gain == std::array<float, 3>{1.f, 1.f, 1.f} &&
           color_bias == std::array<float, 3>{0.f, 0.f, 0.f};
  }
  bool is_identity() const {
    return identity_color() && contrast == 0.f && blur_radius == 0 &&
           noise_sigma == 0.f && occlusion_count == 0 && scale_min == 1.f &&
           scale_max == 1.f;
  }

  void validate() const {
    if (scale_min <= 0.f || scale_max < scale_min)
      throw ConfigError(concat("domain ", domain_id, ": bad scale_jitter [",
                               scale_min, ", ", scale_max, "]"));
    if (noise_sigma < 0.f)
      throw ConfigError(concat("domain ", domain_id, ": negative noise_sigma"));
    if (blur_radius < 0 || occlusion_count < 0 || occlusion_max_patch < 0)
      throw ConfigError(concat("domain ", domain_id, ": negative extent"));
  }
};

// Label-preserving by construction: only pixels and domain_id change. Every
// stage skips when its parameters are neutral, so the identity spec returns
// the input pixels bit-for-bit.
inline Sample apply_domain(const Sample& in, const DomainSpec& spec,
                           std::uint64_t seed) {
  spec.validate();
  Sample out = in;
  out.domain_id = spec.domain_id;
  Image& im = out.image;
  Rng rng = Rng::keyed(seed, {fnv1a("apply_domain"), spec.domain_id});

  if (spec.scale_min != 1.f || spec.scale_max != 1.f) {
    const float f = static_cast<float>(rng.uniform(spec.scale_min, spec.scale_max));
    im = scale_about_center(im, f);
  }
  if (!spec.identity_color()) {
    for (std::size_t i = 0; i < im.px.size(); i += im.channels)
      for (std::size_t ch = 0; ch < std::min<std::size_t>(im.channels, 3); ++ch)
        im.px[i + ch] = im.px[i + ch] * spec.color_gain[ch] + spec.color_bias[ch];
  }
  adjust_contrast(im, spec.contrast);
  im = box_blur(im, spec.blur_radius);
  if (spec.noise_sigma > 0.f) {
    for (float& v : im.px)
      v += static_cast<float>(rng.normal(0.0, spec.noise_sigma));
  }
  for (int k = 0; k < spec.occlusion_count; ++k) {
    const int ph = 1 + static_cast<int>(rng.uniform_index(
                          std::max(1, spec.occlusion_max_patch)));
    const int pw = 1 + static_cast<int>(rng.uniform_index(
                          std::max(1, spec.occlusion_max_patch)));
    const int r0 = static_cast<int>(rng.uniform_index(im.height));
    const int c0 = static_cast<int>(rng.uniform_index(im.width));
    std::array<float, 3> color{};
    for (auto& c : color) c = static_cast<float>(rng.uniform());
    for (int r = r0; r < std::min<int>(r0 + ph, im.height); ++r)
      for (int c = c0; c < std::min<int>(c0 + pw, im.width); ++c)
        for (std::size_t ch = 0; ch < im.channels; ++ch)
          im.at(r, c, ch) = color[ch % 3];
  }
  if (!spec.is_identity()) clamp01(im);
  return out;
}

// Applies the spec to every sample with a per-sample derived seed.
inline Dataset apply_domain_dataset(const Dataset& in, const DomainSpec& spec,
                                    std::uint64_t seed) {
  Dataset out;
  out.height = in.height;
  out.width = in.width;
  out.channels = in.channels;
  out.samples.reserve(in.samples.size());
  for (std::size_t i = 0; i < in.samples.size(); ++i) {
    Rng mix = Rng::keyed(seed, {fnv1a("domain_sample"), i});
    out.samples.push_back(apply_domain(in.samples[i], spec, mix.next_u64()));
  }
  return out;
}

}  // namespace owrlab
