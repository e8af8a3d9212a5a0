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
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "owrlab/common.hpp"
#include "owrlab/image.hpp"
#include "owrlab/png.hpp"
#include "owrlab/tensor.hpp"

namespace owrlab {

struct Sample {
  Image image;
  std::uint16_t class_id = 0;
  std::uint16_t domain_id = 0;
  std::uint32_t instance_id = 0;
};

struct Dataset {
  std::uint16_t height = 16, width = 16, channels = 3;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width * channels;
  }

  std::vector<std::uint16_t> class_ids() const {
    std::set<std::uint16_t> ids;
    for (const Sample& s : samples) ids.insert(s.class_id);
    return {ids.begin(), ids.end()};
  }

  std::vector<std::size_t> indices_of_class(std::uint16_t cls) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i].class_id == cls) out.push_back(i);
    return out;
  }

  std::set<std::uint32_t> instances_of_class(std::uint16_t cls) const {
    std::set<std::uint32_t> out;
    for (const Sample& s : samples)
      if (s.class_id == cls) out.insert(s.instance_id);
    return out;
  }
};

// Flatten samples (row-major, channel-last) into a [B x H*W*C] float64 batch.
inline Tensor samples_to_batch(const Dataset& ds, const std::vector<std::size_t>& idx) {
  if (idx.empty()) throw ContractError("samples_to_batch: empty index list");
  const std::size_t f = ds.pixel_count();
  Tensor t = Tensor::zeros({idx.size(), f});
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto& px = ds.samples[idx[b]].image.px;
    if (px.size() != f)
      throw DimensionError(concat("samples_to_batch: sample has ", px.size(),
                                  " pixels, dataset wants ", f));
    for (std::size_t i = 0; i < f; ++i) t.at(b * f + i) = px[i];
  }
  return t;
}

inline Tensor image_to_row(const Image& im) {
  Tensor t = Tensor::zeros({1, im.px.size()});
  for (std::size_t i = 0; i < im.px.size(); ++i) t.at(i) = im.px[i];
  return t;
}

// ---------------------------------------------------------------------------
// Dataset file: magic "OWRD", version u16, u32 num_samples, u16 H, W, C, then
// per sample u16 class, u16 domain, u32 instance, H*W*C float32 little-endian.

inline constexpr std::uint16_t kDatasetVersion = 1;

inline std::string dataset_to_bytes(const Dataset& ds) {
  std::string out;
  out += "OWRD";
  detail::put_u16(out, kDatasetVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(ds.samples.size()));
  detail::put_u16(out, ds.height);
  detail::put_u16(out, ds.width);
  detail::put_u16(out, ds.channels);
  for (const Sample& s : ds.samples) {
    if (s.image.px.size() != ds.pixel_count())
      throw DimensionError(concat("dataset_io: sample has ", s.image.px.size(),
                                  " pixels, header says ", ds.pixel_count()));
    detail::put_u16(out, s.class_id);
    detail::put_u16(out, s.domain_id);
    detail::put_u32(out, s.instance_id);
    for (float v : s.image.px) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      detail::put_u32(out, bits);
    }
  }
  return out;
}

inline Dataset dataset_from_bytes(const std::string& bytes,
                                  const std::string& origin = "dataset") {
  detail::ByteReader r(bytes, origin);
  r.expect_magic("OWRD");
  const std::uint16_t version = r.u16();
  if (version != kDatasetVersion) r.fail(concat("unsupported version ", version));
  const std::uint32_t n = r.u32();
  Dataset ds;
  ds.height = r.u16();
  ds.width = r.u16();
  ds.channels = r.u16();
  if (ds.pixel_count() == 0 || ds.pixel_count() > (1u << 24))
    r.fail(concat("extent overflow: ", ds.height, "x", ds.width, "x", ds.channels));
  ds.samples.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Sample s;
    s.class_id = r.u16();
    s.domain_id = r.u16();
    s.instance_id = r.u32();
    s.image = Image(ds.height, ds.width, ds.channels);
    for (auto& v : s.image.px) v = r.f32();
    ds.samples.push_back(std::move(s));
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  detail::write_file(path, dataset_to_bytes(ds));
}

inline Dataset load_dataset(const std::string& path) {
  return dataset_from_bytes(detail::read_file(path), path);
}

// Imports `<root>/<class_name>/*.png`, class ids assigned by sorted class
// name, instance id by sorted file order within a class. Images are resized
// to (height, width) RGB.
inline Dataset import_image_folder(const std::string& root, std::uint16_t height = 16,
                                   std::uint16_t width = 16) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw ParseError(concat(root, ": not a directory"));
  std::vector<std::string> class_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty())
    throw ParseError(concat(root, ": no class directories found"));

  Dataset ds;
  ds.height = height;
  ds.width = width;
  ds.channels = 3;
  for (std::size_t cls = 0; cls < class_dirs.size(); ++cls) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(fs::path(root) / class_dirs[cls]))
      if (e.is_regular_file() && e.path().extension() == ".png")
        files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); ++i) {
      Sample s;
      Image im = load_png(files[i]);
      s.image = (im.height == height && im.width == width)
                    ? im
                    : resize_bilinear(im, height, width);
      clamp01(s.image);
      s.class_id = static_cast<std::uint16_t>(cls);
      s.domain_id = 0;
      s.instance_id = static_cast<std::uint32_t>(i);
      ds.samples.push_back(std::move(s));
    }
  }
  if (ds.samples.empty()) throw ParseError(concat(root, ": no PNG files found"));
  return ds;
}

}  // namespace owrlab
