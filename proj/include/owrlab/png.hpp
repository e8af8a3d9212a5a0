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

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/image.hpp"
#include "owrlab/mlp.hpp"  // detail::read_file

namespace owrlab {

namespace detail {

inline std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::vector<unsigned char> zlib_inflate(const unsigned char* data,
                                               std::size_t size,
                                               const std::string& origin) {
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit(&zs) != Z_OK) throw ParseError(origin + ": inflate init failed");
  std::vector<unsigned char> out;
  std::vector<unsigned char> buf(1 << 16);
  zs.next_in = const_cast<unsigned char*>(data);
  zs.avail_in = static_cast<uInt>(size);
  int ret = Z_OK;
  while (ret != Z_STREAM_END) {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    ret = inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&zs);
      throw ParseError(origin + ": corrupt deflate stream");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
    if (ret == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw ParseError(origin + ": truncated deflate stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace detail

// Decodes an 8-bit, non-interlaced PNG (gray, gray+alpha, RGB, RGBA or
// palette) into an RGB float image. Alpha is composited over black.
inline Image decode_png(const std::string& bytes, const std::string& origin) {
  static const unsigned char sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8 || std::memcmp(p, sig, 8) != 0)
    throw ParseError(origin + ": not a PNG file (bad signature at byte 0)");

  std::size_t off = 8;
  std::uint32_t w = 0, h = 0;
  int bit_depth = 0, color_type = 0, interlace = 0;
  std::vector<unsigned char> idat;
  std::vector<std::array<float, 3>> palette;
  bool seen_ihdr = false, seen_iend = false;

  while (off + 8 <= bytes.size() && !seen_iend) {
    const std::uint32_t len = detail::be32(p + off);
    if (off + 12 + static_cast<std::size_t>(len) > bytes.size())
      throw ParseError(concat(origin, ": truncated chunk at byte ", off));
    const char* type = bytes.data() + off + 4;
    const unsigned char* data = p + off + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw ParseError(concat(origin, ": bad IHDR at byte ", off));
      w = detail::be32(data);
      h = detail::be32(data + 4);
      bit_depth = data[8];
      color_type = data[9];
      interlace = data[12];
      if (w == 0 || h == 0 || w > 1 << 14 || h > 1 << 14)
        throw ParseError(concat(origin, ": unsupported image extents ", w, "x", h));
      if (bit_depth != 8)
        throw ParseError(concat(origin, ": unsupported bit depth ", bit_depth));
      if (interlace != 0)
        throw ParseError(origin + ": interlaced PNGs are not supported");
      seen_ihdr = true;
    } else if (std::memcmp(type, "PLTE", 4) == 0) {
      for (std::uint32_t i = 0; i + 2 < len; i += 3)
        palette.push_back({data[i] / 255.f, data[i + 1] / 255.f, data[i + 2] / 255.f});
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      seen_iend = true;
    }
    off += 12 + len;
  }
  if (!seen_ihdr) throw ParseError(origin + ": missing IHDR");
  if (idat.empty()) throw ParseError(origin + ": missing IDAT");

  int src_ch;
  switch (color_type) {
    case 0: src_ch = 1; break;
    case 2: src_ch = 3; break;
    case 3: src_ch = 1; break;
    case 4: src_ch = 2; break;
    case 6: src_ch = 4; break;
    default:
      throw ParseError(concat(origin, ": unsupported color type ", color_type));
  }
  if (color_type == 3 && palette.empty())
    throw ParseError(origin + ": palette image without PLTE");

  auto raw = detail::zlib_inflate(idat.data(), idat.size(), origin);
  const std::size_t stride = static_cast<std::size_t>(w) * src_ch;
  if (raw.size() != (stride + 1) * h)
    throw ParseError(concat(origin, ": decompressed size ", raw.size(),
                            " does not match ", (stride + 1) * h));

  // Undo per-scanline filters in place.
  std::vector<unsigned char> prev(stride, 0);
  std::vector<unsigned char> line(stride, 0);
  Image out(static_cast<std::uint16_t>(h), static_cast<std::uint16_t>(w), 3);
  for (std::uint32_t r = 0; r < h; ++r) {
    const unsigned char filter = raw[r * (stride + 1)];
    const unsigned char* src = raw.data() + r * (stride + 1) + 1;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(src_ch) ? line[i - src_ch] : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(src_ch) ? prev[i - src_ch] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += detail::paeth(a, b, c); break;
        default:
          throw ParseError(concat(origin, ": bad filter ", int(filter), " on row ", r));
      }
      line[i] = static_cast<unsigned char>(v & 0xff);
    }
    for (std::uint32_t col = 0; col < w; ++col) {
      const unsigned char* px = line.data() + col * src_ch;
      float rgb[3];
      float alpha = 1.f;
      switch (color_type) {
        case 0: rgb[0] = rgb[1] = rgb[2] = px[0] / 255.f; break;
        case 2: for (int k = 0; k < 3; ++k) rgb[k] = px[k] / 255.f; break;
        case 3: {
          if (px[0] >= palette.size())
            throw ParseError(concat(origin, ": palette index ", int(px[0]),
                                    " out of range"));
          for (int k = 0; k < 3; ++k) rgb[k] = palette[px[0]][k];
          break;
        }
        case 4:
          rgb[0] = rgb[1] = rgb[2] = px[0] / 255.f;
          alpha = px[1] / 255.f;
          break;
        default:
          for (int k = 0; k < 3; ++k) rgb[k] = px[k] / 255.f;
          alpha = px[3] / 255.f;
          break;
      }
      for (int k = 0; k < 3; ++k) out.at(r, col, k) = rgb[k] * alpha;
    }
    std::swap(prev, line);
  }
  return out;
}

inline Image load_png(const std::string& path) {
  return decode_png(detail::read_file(path), path);
}

// Minimal RGB8 PNG writer (filter 0, single IDAT); used by tests and the
// image-folder round-trip.
inline std::string encode_png(const Image& im) {
  if (im.channels != 3) throw ContractError("encode_png: expects 3 channels");
  const std::size_t stride = static_cast<std::size_t>(im.width) * 3;
  std::vector<unsigned char> raw((stride + 1) * im.height, 0);
  for (std::size_t r = 0; r < im.height; ++r) {
    unsigned char* dst = raw.data() + r * (stride + 1);
    *dst++ = 0;
    for (std::size_t c = 0; c < im.width; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch)
        *dst++ = static_cast<unsigned char>(
            std::round(std::clamp(im.at(r, c, ch), 0.f, 1.f) * 255.f));
  }

  uLongf comp_bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> comp(comp_bound);
  if (compress2(comp.data(), &comp_bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error("encode_png: deflate failed");
  comp.resize(comp_bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  auto put_chunk = [&out](const char* type, const unsigned char* data,
                          std::size_t len) {
    unsigned char hdr[8] = {
        static_cast<unsigned char>(len >> 24), static_cast<unsigned char>(len >> 16),
        static_cast<unsigned char>(len >> 8),  static_cast<unsigned char>(len),
        static_cast<unsigned char>(type[0]),   static_cast<unsigned char>(type[1]),
        static_cast<unsigned char>(type[2]),   static_cast<unsigned char>(type[3])};
    out.append(reinterpret_cast<char*>(hdr), 8);
    if (len) out.append(reinterpret_cast<const char*>(data), len);
    uLong crc = crc32(0, hdr + 4, 4);
    crc = crc32(crc, data, static_cast<uInt>(len));
    unsigned char tail[4] = {
        static_cast<unsigned char>(crc >> 24), static_cast<unsigned char>(crc >> 16),
        static_cast<unsigned char>(crc >> 8), static_cast<unsigned char>(crc)};
    out.append(reinterpret_cast<char*>(tail), 4);
  };

  unsigned char ihdr[13] = {0, 0, 0, 0, 0, 0, 0, 0, 8, 2, 0, 0, 0};
  ihdr[0] = static_cast<unsigned char>(im.width >> 24);
  ihdr[1] = static_cast<unsigned char>(im.width >> 16);
  ihdr[2] = static_cast<unsigned char>(im.width >> 8);
  ihdr[3] = static_cast<unsigned char>(im.width);
  ihdr[4] = static_cast<unsigned char>(im.height >> 24);
  ihdr[5] = static_cast<unsigned char>(im.height >> 16);
  ihdr[6] = static_cast<unsigned char>(im.height >> 8);
  ihdr[7] = static_cast<unsigned char>(im.height);
  put_chunk("IHDR", ihdr, 13);
  put_chunk("IDAT", comp.data(), comp.size());
  put_chunk("IEND", nullptr, 0);
  return out;
}

inline void save_png(const std::string& path, const Image& im) {
  detail::write_file(path, encode_png(im));
}

}  // namespace owrlab
