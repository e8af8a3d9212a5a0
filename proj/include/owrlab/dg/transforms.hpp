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

#include <string>
#include <vector>

#include "owrlab/dataset.hpp"
#include "owrlab/image.hpp"
#include "owrlab/rng.hpp"

namespace owrlab {

// The fixed basic set A: hue, contrast, brightness, saturation, random crop
// and mirroring. Magnitudes live in closed per-kind ranges (below); outputs
// are clamped to [0,1] after the full chain.
enum class TransformKind : int {
  kHue = 0,
  kContrast,
  kBrightness,
  kSaturation,
  kRandomCrop,
  kMirroring,
};

inline constexpr int kNumTransformKinds = 6;

inline const char* transform_kind_name(TransformKind k) {
  switch (k) {
    case TransformKind::kHue: return "hue";
    case TransformKind::kContrast: return "contrast";
    case TransformKind::kBrightness: return "brightness";
    case TransformKind::kSaturation: return "saturation";
    case TransformKind::kRandomCrop: return "random_crop";
    default: return "mirroring";
  }
}

// Closed magnitude range per kind. random_crop's magnitude is the kept side
// fraction; mirroring ignores it.
inline std::pair<float, float> transform_magnitude_range(TransformKind k) {
  switch (k) {
    case TransformKind::kHue: return {-0.35f, 0.35f};
    case TransformKind::kContrast: return {-0.6f, 0.6f};
    case TransformKind::kBrightness: return {-0.35f, 0.35f};
    case TransformKind::kSaturation: return {-0.6f, 0.6f};
    case TransformKind::kRandomCrop: return {0.6f, 1.0f};
    default: return {1.0f, 1.0f};
  }
}

struct BasicTransform {
  TransformKind kind = TransformKind::kMirroring;
  float magnitude = 1.0f;

  bool operator==(const BasicTransform&) const = default;

  void apply(Image& im, Rng& rng) const {
    switch (kind) {
      case TransformKind::kHue: shift_hue(im, magnitude); break;
      case TransformKind::kContrast: adjust_contrast(im, magnitude); break;
      case TransformKind::kBrightness: adjust_brightness(im, magnitude); break;
      case TransformKind::kSaturation: adjust_saturation(im, magnitude); break;
      case TransformKind::kRandomCrop: {
        const float keep = std::clamp(magnitude, 0.05f, 1.0f);
        const int ch = std::max<int>(1, static_cast<int>(std::round(keep * im.height)));
        const int cw = std::max<int>(1, static_cast<int>(std::round(keep * im.width)));
        if (ch >= im.height && cw >= im.width) break;
        const int r0 = static_cast<int>(rng.uniform_index(im.height - ch + 1));
        const int c0 = static_cast<int>(rng.uniform_index(im.width - cw + 1));
        Image crop(static_cast<std::uint16_t>(ch), static_cast<std::uint16_t>(cw),
                   im.channels);
        for (int r = 0; r < ch; ++r)
          for (int c = 0; c < cw; ++c)
            for (int k2 = 0; k2 < im.channels; ++k2)
              crop.at(r, c, k2) = im.at(r0 + r, c0 + c, k2);
        im = resize_bilinear(crop, im.height, im.width);
        break;
      }
      case TransformKind::kMirroring: im = mirror_horizontal(im); break;
    }
  }
};

inline BasicTransform random_basic_transform(Rng& rng) {
  BasicTransform t;
  t.kind = static_cast<TransformKind>(rng.uniform_index(kNumTransformKinds));
  const auto [lo, hi] = transform_magnitude_range(t.kind);
  t.magnitude = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// Chain of at most 3 basic transforms, applied left to right; the empty
// chain is the identity and leaves pixels untouched bit-for-bit.
struct ComposedTransform {
  std::vector<BasicTransform> chain;

  bool is_identity() const { return chain.empty(); }

  Image apply(const Image& in, Rng& rng) const {
    if (chain.empty()) return in;
    Image im = in;
    for (const BasicTransform& t : chain) t.apply(im, rng);
    clamp01(im);
    return im;
  }

  Sample apply(const Sample& in, Rng& rng) const {
    Sample out = in;  // labels preserved by construction
    out.image = apply(in.image, rng);
    return out;
  }

  std::string describe() const {
    if (chain.empty()) return "identity";
    std::string s;
    for (const BasicTransform& t : chain) {
      if (!s.empty()) s += "+";
      s += concat(transform_kind_name(t.kind), "(", t.magnitude, ")");
    }
    return s;
  }
};

}  // namespace owrlab
