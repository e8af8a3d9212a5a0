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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/rng.hpp"
#include "owrlab/tensor.hpp"

namespace owrlab {

// Feature extractor layout: input -> hidden... -> feature_dim. Rectifier on
// hidden layers, identity on the output layer.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  std::uint64_t seed = 0;

  void validate() const {
    if (layer_widths.size() < 2)
      throw ConfigError("mlp: need at least input and output widths");
    for (std::size_t w : layer_widths)
      if (w == 0) throw ConfigError("mlp: zero layer width");
    if (layer_widths.back() < 2)
      throw ConfigError(concat("mlp: feature_dim must be >= 2, got ",
                               layer_widths.back()));
  }

  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t feature_dim() const { return layer_widths.back(); }
};

class Mlp {
 public:
  Mlp() = default;

  // He fan-in scaled init, fully determined by spec.seed.
  explicit Mlp(const MlpSpec& spec) : spec_(spec) {
    spec.validate();
    for (std::size_t l = 0; l + 1 < spec.layer_widths.size(); ++l) {
      const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
      Rng rng = Rng::keyed(spec.seed, {fnv1a("mlp_init"), l});
      Tensor w = Tensor::zeros({in, out}, true);
      const double s = std::sqrt(2.0 / static_cast<double>(in));
      for (auto& v : w.values()) v = rng.normal(0.0, s);
      params_.push_back(w);
      params_.push_back(Tensor::zeros({out}, true));  // bias
    }
  }

  // x is [B x input_width]; images are flattened row-major, channel-last.
  Tensor forward(Tape& tape, const Tensor& x) const {
    if (x.ndim() != 2 || x.dim(1) != spec_.input_width()) {
      throw DimensionError(concat(
          "mlp_forward: input width mismatch: expected [B x ",
          spec_.input_width(), "], got [",
          x.ndim() == 2 ? x.dim(0) : x.numel(), " x ",
          x.ndim() == 2 ? x.dim(1) : 0, "]"));
    }
    Tensor h = x;
    const std::size_t layers = params_.size() / 2;
    for (std::size_t l = 0; l < layers; ++l) {
      h = add_rowvec(tape, matmul(tape, h, params_[2 * l]), params_[2 * l + 1]);
      if (l + 1 < layers) h = relu(tape, h);
    }
    return h;
  }

  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  const MlpSpec& spec() const { return spec_; }
  std::size_t input_width() const { return spec_.input_width(); }
  std::size_t feature_dim() const { return spec_.feature_dim(); }
  bool initialized() const { return !params_.empty(); }

  // Deep copy; used to freeze the previous-step extractor.
  Mlp clone() const {
    Mlp m;
    m.spec_ = spec_;
    for (const Tensor& p : params_) m.params_.push_back(p.clone());
    return m;
  }

  void set_trainable(bool on) {
    for (Tensor& p : params_) p.set_requires_grad(on);
  }

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;
};

// ---------------------------------------------------------------------------
// Weight snapshot blob: magic "OWRW", version u16, u32 parameter count, then
// per parameter u8 ndim, u32 extents..., float64 little-endian payload.

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() {
    const char* p = take(2);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                      (static_cast<unsigned char>(p[1]) << 8));
  }
  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  float f32() {
    std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  void expect_magic(const char* magic) {
    const char* p = take(4);
    if (std::memcmp(p, magic, 4) != 0)
      throw ParseError(concat(origin_, ": bad magic at byte 0, expected '", magic, "'"));
  }
  std::size_t offset() const { return off_; }
  bool at_end() const { return off_ == bytes_.size(); }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(concat(origin_, ": ", what, " at byte ", off_));
  }

 private:
  const char* take(std::size_t n) {
    if (off_ + n > bytes_.size())
      throw ParseError(concat(origin_, ": truncated file at byte ", off_,
                              " (need ", n, " more bytes)"));
    const char* p = bytes_.data() + off_;
    off_ += n;
    return p;
  }
  const std::string& bytes_;
  std::string origin_;
  std::size_t off_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(concat(path, ": cannot open for reading"));
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(concat(path, ": cannot open for writing"));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(concat(path, ": write failed"));
}

}  // namespace detail

inline constexpr std::uint16_t kWeightBlobVersion = 1;

inline std::string weights_to_bytes(const std::vector<Tensor>& params) {
  std::string out;
  out += "OWRW";
  detail::put_u16(out, kWeightBlobVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Tensor& p : params) {
    out.push_back(static_cast<char>(p.ndim()));
    for (std::size_t e : p.shape()) detail::put_u32(out, static_cast<std::uint32_t>(e));
    for (double v : p.values()) detail::put_f64(out, v);
  }
  return out;
}

inline std::vector<Tensor> weights_from_bytes(const std::string& bytes,
                                              const std::string& origin = "weights") {
  detail::ByteReader r(bytes, origin);
  r.expect_magic("OWRW");
  const std::uint16_t version = r.u16();
  if (version != kWeightBlobVersion)
    r.fail(concat("unsupported version ", version));
  const std::uint32_t count = r.u32();
  std::vector<Tensor> params;
  params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t ndim = r.u8();
    if (ndim == 0 || ndim > 4) r.fail(concat("bad ndim ", int(ndim)));
    std::vector<std::size_t> shape;
    std::size_t n = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      const std::uint32_t e = r.u32();
      if (e == 0 || n > (1u << 28) / std::max<std::size_t>(e, 1)) r.fail("extent overflow");
      shape.push_back(e);
      n *= e;
    }
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = r.f64();
    params.push_back(Tensor::from(std::move(shape), std::move(v)));
  }
  return params;
}

inline void save_weights(const std::string& path, const std::vector<Tensor>& params) {
  detail::write_file(path, weights_to_bytes(params));
}

inline std::vector<Tensor> load_weights(const std::string& path) {
  return weights_from_bytes(detail::read_file(path), path);
}

}  // namespace owrlab
