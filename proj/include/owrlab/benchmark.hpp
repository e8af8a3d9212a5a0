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

#include "owrlab/dataset.hpp"
#include "owrlab/domains.hpp"
#include "owrlab/rng.hpp"

namespace owrlab {

namespace detail {

struct ClassTemplate {
  int shape;        // 0 disc, 1 square, 2 triangle, 3 ring, 4 cross, 5 diamond
  int texture;      // 0 flat, 1 stripes, 2 checker, 3 dots
  float hue;        // foreground hue in [0,1)
};

inline ClassTemplate class_template(std::uint16_t cls) {
  ClassTemplate t;
  t.shape = cls % 6;
  t.texture = (cls / 6) % 4;
  t.hue = std::fmod(0.13f + 0.61803398875f * cls, 1.f);
  return t;
}

// Signed distance (in pixels, negative inside) of normalized point (x, y)
// measured from the shape outline.
inline float shape_distance(int shape, float x, float y, float radius,
                            float aspect) {
  const float ax = std::abs(x) / aspect, ay = std::abs(y);
  switch (shape) {
    case 0:  // disc
      return std::sqrt(ax * ax + ay * ay) - radius;
    case 1:  // square
      return std::max(ax, ay) - radius * 0.85f;
    case 2: {  // upward triangle
      const float k = 0.866025f;  // cos(30)
      float d = std::max(ax * k + y * 0.5f, -y) - radius * 0.55f;
      return d;
    }
    case 3: {  // ring
      const float r = std::sqrt(ax * ax + ay * ay);
      return std::abs(r - radius * 0.8f) - radius * 0.3f;
    }
    case 4: {  // plus
      const float arm = radius * 0.38f;
      const float h = std::max(ax - radius, ay - arm);
      const float v = std::max(ax - arm, ay - radius);
      return std::min(h, v);
    }
    default:  // diamond
      return (ax + ay) * 0.7071f - radius * 0.78f;
  }
}

inline bool texture_on(int texture, int r, int c, int phase) {
  switch (texture) {
    case 1: return ((r + phase) / 3) % 2 == 0;          // stripes
    case 2: return (((r + phase) / 3) + ((c + phase) / 3)) % 2 == 0;  // checker
    case 3: return (r + phase) % 4 == 0 && (c + phase * 2) % 4 == 0;  // dots
    default: return false;
  }
}

}  // namespace detail

// Synthetic clean-domain (domain 0) benchmark. Every class is a procedural
// shape/texture/color template; instances jitter the template parameters and
// samples jitter pose and lighting. Instance ids allow an instance-wise
// train/test split.
inline Dataset generate_benchmark(std::uint16_t num_classes,
                                  std::uint16_t instances_per_class,
                                  std::uint16_t samples_per_instance,
                                  std::uint64_t seed, std::uint16_t height = 16,
                                  std::uint16_t width = 16) {
  if (num_classes == 0) throw ConfigError("generate_benchmark: no classes");
  if (instances_per_class < 2)
    throw ConfigError(concat(
        "generate_benchmark: instances_per_class must be >= 2 so one instance "
        "can be held out for test, got ",
        instances_per_class));
  if (samples_per_instance == 0)
    throw ConfigError("generate_benchmark: samples_per_instance must be >= 1");

  Dataset ds;
  ds.height = height;
  ds.width = width;
  ds.channels = 3;
  const float scale = std::min(height, width);

  for (std::uint16_t cls = 0; cls < num_classes; ++cls) {
    const detail::ClassTemplate t = detail::class_template(cls);
    for (std::uint16_t inst = 0; inst < instances_per_class; ++inst) {
      Rng irng = Rng::keyed(seed, {fnv1a("bench_instance"), cls, inst});
      const float inst_hue = t.hue + static_cast<float>(irng.uniform(-0.015, 0.015));
      const float inst_radius =
          scale * static_cast<float>(irng.uniform(0.32, 0.42));
      const float inst_cx = static_cast<float>(irng.uniform(-0.08, 0.08)) * scale;
      const float inst_cy = static_cast<float>(irng.uniform(-0.08, 0.08)) * scale;
      const float aspect = static_cast<float>(irng.uniform(0.92, 1.08));
      const int phase = static_cast<int>(irng.uniform_index(4));
      const float bg_value = 0.18f + static_cast<float>(irng.uniform(0.0, 0.06));

      for (std::uint16_t n = 0; n < samples_per_instance; ++n) {
        Rng srng = Rng::keyed(seed, {fnv1a("bench_sample"), cls, inst, n});
        const float cx = (width - 1) * 0.5f + inst_cx +
                         static_cast<float>(srng.uniform(-0.04, 0.04)) * scale;
        const float cy = (height - 1) * 0.5f + inst_cy +
                         static_cast<float>(srng.uniform(-0.04, 0.04)) * scale;
        const float radius =
            inst_radius * static_cast<float>(srng.uniform(0.95, 1.05));
        const float brightness = static_cast<float>(srng.uniform(0.95, 1.05));
        const float hue = inst_hue + static_cast<float>(srng.uniform(-0.008, 0.008));

        const auto fg = hsv_to_rgb(hue, 0.85f, std::min(1.f, 0.95f * brightness));
        const auto bg = hsv_to_rgb(hue + 0.5f, 0.35f, bg_value * brightness);
        const auto bg2 = hsv_to_rgb(hue + 0.5f, 0.30f, (bg_value + 0.10f) * brightness);

        Sample s;
        s.class_id = cls;
        s.domain_id = 0;
        s.instance_id = inst;
        s.image = Image(height, width, 3);
        for (int r = 0; r < height; ++r)
          for (int c = 0; c < width; ++c) {
            const float d = detail::shape_distance(t.shape, c - cx, r - cy,
                                                   radius, aspect);
            const float alpha = std::clamp(0.5f - d / 1.5f, 0.f, 1.f);
            const auto& base = detail::texture_on(t.texture, r, c, phase) ? bg2 : bg;
            for (int ch = 0; ch < 3; ++ch) {
              float v = base[ch] * (1.f - alpha) + fg[ch] * alpha;
              v += static_cast<float>(srng.normal(0.0, 0.01));
              s.image.at(r, c, ch) = v;
            }
          }
        clamp01(s.image);
        ds.samples.push_back(std::move(s));
      }
    }
  }
  return ds;
}

// The shipped difficulty ladder: D0 clean, D1 stylized (global color and
// contrast remap), D2 cluttered (noise, occlusions, scale jitter).
inline std::vector<DomainSpec> default_domain_ladder() {
  DomainSpec d0;
  d0.domain_id = 0;

  DomainSpec d1;
  d1.domain_id = 1;
  d1.color_gain = {0.65f, 1.25f, 0.9f};
  d1.color_bias = {0.18f, -0.05f, 0.08f};
  d1.contrast = -0.15f;

  DomainSpec d2;
  d2.domain_id = 2;
  d2.noise_sigma = 0.25f;
  d2.occlusion_count = 4;
  d2.occlusion_max_patch = 10;
  d2.scale_min = 0.5f;
  d2.scale_max = 1.45f;
  d2.contrast = -0.4f;
  return {d0, d1, d2};
}

}  // namespace owrlab
