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
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/rng.hpp"

namespace owrlab {

// Small H x W x C image, float32 in [0,1], row-major channel-last.
struct Image {
  std::uint16_t height = 0, width = 0, channels = 0;
  std::vector<float> px;

  Image() = default;
  Image(std::uint16_t h, std::uint16_t w, std::uint16_t c, float fill = 0.f)
      : height(h), width(w), channels(c),
        px(static_cast<std::size_t>(h) * w * c, fill) {}

  float& at(std::size_t r, std::size_t col, std::size_t ch) {
    return px[(r * width + col) * channels + ch];
  }
  float at(std::size_t r, std::size_t col, std::size_t ch) const {
    return px[(r * width + col) * channels + ch];
  }
  std::size_t numel() const { return px.size(); }
  bool same_extents(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

inline void clamp01(Image& im) {
  for (float& v : im.px) v = std::min(1.f, std::max(0.f, v));
}

// Bilinear sample with clamp-to-edge; (y, x) in pixel coordinates.
inline float sample_bilinear(const Image& im, float y, float x, std::size_t ch) {
  const float fy = std::floor(y), fx = std::floor(x);
  const int y0 = std::clamp(static_cast<int>(fy), 0, im.height - 1);
  const int x0 = std::clamp(static_cast<int>(fx), 0, im.width - 1);
  const int y1 = std::min(y0 + 1, im.height - 1);
  const int x1 = std::min(x0 + 1, im.width - 1);
  const float ty = std::clamp(y - fy, 0.f, 1.f);
  const float tx = std::clamp(x - fx, 0.f, 1.f);
  const float a = im.at(y0, x0, ch) * (1 - tx) + im.at(y0, x1, ch) * tx;
  const float b = im.at(y1, x0, ch) * (1 - tx) + im.at(y1, x1, ch) * tx;
  return a * (1 - ty) + b * ty;
}

inline Image resize_bilinear(const Image& im, std::uint16_t h, std::uint16_t w) {
  Image out(h, w, im.channels);
  const float sy = static_cast<float>(im.height) / h;
  const float sx = static_cast<float>(im.width) / w;
  for (std::uint16_t r = 0; r < h; ++r)
    for (std::uint16_t c = 0; c < w; ++c) {
      const float y = (r + 0.5f) * sy - 0.5f;
      const float x = (c + 0.5f) * sx - 0.5f;
      for (std::uint16_t ch = 0; ch < im.channels; ++ch)
        out.at(r, c, ch) = sample_bilinear(im, y, x, ch);
    }
  return out;
}

// Resample about the image center by `factor` (>1 zooms in); edges replicate.
inline Image scale_about_center(const Image& im, float factor) {
  Image out(im.height, im.width, im.channels);
  const float cy = (im.height - 1) * 0.5f, cx = (im.width - 1) * 0.5f;
  for (std::uint16_t r = 0; r < im.height; ++r)
    for (std::uint16_t c = 0; c < im.width; ++c) {
      const float y = (r - cy) / factor + cy;
      const float x = (c - cx) / factor + cx;
      for (std::uint16_t ch = 0; ch < im.channels; ++ch)
        out.at(r, c, ch) = sample_bilinear(im, y, x, ch);
    }
  return out;
}

// Separable box blur, window 2*radius+1, clamp-to-edge.
inline Image box_blur(const Image& im, int radius) {
  if (radius <= 0) return im;
  Image tmp(im.height, im.width, im.channels);
  const float inv = 1.f / (2 * radius + 1);
  for (int r = 0; r < im.height; ++r)
    for (int c = 0; c < im.width; ++c)
      for (int ch = 0; ch < im.channels; ++ch) {
        float acc = 0.f;
        for (int k = -radius; k <= radius; ++k)
          acc = acc + im.at(r, std::clamp(c + k, 0, im.width - 1), ch);
        tmp.at(r, c, ch) = acc * inv;
      }
  Image out(im.height, im.width, im.channels);
  for (int r = 0; r < im.height; ++r)
    for (int c = 0; c < im.width; ++c)
      for (int ch = 0; ch < im.channels; ++ch) {
        float acc = 0.f;
        for (int k = -radius; k <= radius; ++k)
          acc = acc + tmp.at(std::clamp(r + k, 0, im.height - 1), c, ch);
        out.at(r, c, ch) = acc * inv;
      }
  return out;
}

// Exact quarter-turn rotation, counterclockwise: source (r, c) lands on
// (W-1-c, r). Requires a square image.
inline Image rotate90_ccw(const Image& im) {
  if (im.height != im.width)
    throw ContractError(concat("rotate90: image must be square, got ",
                               im.height, "x", im.width));
  Image out(im.height, im.width, im.channels);
  const std::size_t w = im.width;
  for (std::size_t r = 0; r < im.height; ++r)
    for (std::size_t c = 0; c < w; ++c)
      for (std::size_t ch = 0; ch < im.channels; ++ch)
        out.at(w - 1 - c, r, ch) = im.at(r, c, ch);
  return out;
}

inline Image rotate_quarter(const Image& im, int quarter_turns) {
  Image out = im;
  for (int k = 0; k < ((quarter_turns % 4) + 4) % 4; ++k) out = rotate90_ccw(out);
  return out;
}

inline Image mirror_horizontal(const Image& im) {
  Image out(im.height, im.width, im.channels);
  for (std::size_t r = 0; r < im.height; ++r)
    for (std::size_t c = 0; c < im.width; ++c)
      for (std::size_t ch = 0; ch < im.channels; ++ch)
        out.at(r, im.width - 1 - c, ch) = im.at(r, c, ch);
  return out;
}

// --- color helpers -----------------------------------------------------------

inline std::array<float, 3> rgb_to_hsv(float r, float g, float b) {
  const float mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const float d = mx - mn;
  float h = 0.f;
  if (d > 0.f) {
    if (mx == r)
      h = (g - b) / d;
    else if (mx == g)
      h = 2.f + (b - r) / d;
    else
      h = 4.f + (r - g) / d;
    h /= 6.f;
    if (h < 0.f) h += 1.f;
  }
  const float s = mx > 0.f ? d / mx : 0.f;
  return {h, s, mx};
}

inline std::array<float, 3> hsv_to_rgb(float h, float s, float v) {
  h = h - std::floor(h);
  const float hh = h * 6.f;
  const int i = std::min(5, static_cast<int>(hh));
  const float f = hh - i;
  const float p = v * (1.f - s);
  const float q = v * (1.f - s * f);
  const float t = v * (1.f - s * (1.f - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

inline void shift_hue(Image& im, float amount) {
  if (im.channels < 3) return;
  for (std::size_t i = 0; i < im.px.size(); i += im.channels) {
    auto hsv = rgb_to_hsv(im.px[i], im.px[i + 1], im.px[i + 2]);
    auto rgb = hsv_to_rgb(hsv[0] + amount, hsv[1], hsv[2]);
    im.px[i] = rgb[0];
    im.px[i + 1] = rgb[1];
    im.px[i + 2] = rgb[2];
  }
}

inline float mean_luma(const Image& im) {
  if (im.px.empty()) return 0.f;
  double acc = 0.0;
  if (im.channels >= 3) {
    for (std::size_t i = 0; i < im.px.size(); i += im.channels)
      acc += 0.299 * im.px[i] + 0.587 * im.px[i + 1] + 0.114 * im.px[i + 2];
    return static_cast<float>(acc / (im.px.size() / im.channels));
  }
  for (float v : im.px) acc += v;
  return static_cast<float>(acc / im.px.size());
}

// Blend toward the mean luma: amount 0 is identity, -1 flattens to gray.
inline void adjust_contrast(Image& im, float amount) {
  if (amount == 0.f) return;
  const float pivot = mean_luma(im);
  for (float& v : im.px) v = pivot + (v - pivot) * (1.f + amount);
}

inline void adjust_brightness(Image& im, float amount) {
  if (amount == 0.f) return;
  for (float& v : im.px) v += amount;
}

// Blend toward per-pixel gray: amount 0 is identity, -1 is grayscale.
inline void adjust_saturation(Image& im, float amount) {
  if (amount == 0.f || im.channels < 3) return;
  for (std::size_t i = 0; i < im.px.size(); i += im.channels) {
    const float gray =
        0.299f * im.px[i] + 0.587f * im.px[i + 1] + 0.114f * im.px[i + 2];
    for (std::size_t ch = 0; ch < 3; ++ch)
      im.px[i + ch] = gray + (im.px[i + ch] - gray) * (1.f + amount);
  }
}

}  // namespace owrlab
