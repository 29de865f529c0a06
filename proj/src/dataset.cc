/* Copyright 2026 The qcascade Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "qcascade/dataset.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

namespace qcascade {
namespace {

constexpr char kRawMagic[4] = {'A', 'H', 'Q', 'T'};
constexpr double kPixelMax = 255.0;

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[at + i]} << (8 * i);
  return v;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::string_view dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kCifar10:
      return "cifar10";
    case DatasetKind::kCifar100:
      return "cifar100";
    case DatasetKind::kRaw:
      return "raw";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "cifar10") return DatasetKind::kCifar10;
  if (name == "cifar100") return DatasetKind::kCifar100;
  if (name == "raw") return DatasetKind::kRaw;
  throw DatasetError("unknown dataset variant '" + std::string(name) + "'");
}

std::size_t cifar_record_size(DatasetKind variant) {
  switch (variant) {
    case DatasetKind::kCifar10:
      return 1 + kCifarPixels;
    case DatasetKind::kCifar100:
      return 2 + kCifarPixels;
    case DatasetKind::kRaw:
      break;
  }
  throw DatasetError("not a CIFAR variant");
}

Dataset ingest_cifar(std::span<const std::uint8_t> bytes, DatasetKind variant) {
  const std::size_t record = cifar_record_size(variant);
  if (bytes.size() % record != 0) {
    throw DatasetError("truncated " + std::string(dataset_kind_name(variant)) + " file: " +
                       std::to_string(bytes.size()) + " bytes is not a multiple of " +
                       std::to_string(record));
  }
  const std::size_t n = bytes.size() / record;
  const std::size_t label_bytes = record - kCifarPixels;
  const std::size_t max_label = variant == DatasetKind::kCifar10 ? 9 : 99;

  // The 256 possible pixel values map to codes through the quantizer.
  std::array<std::uint8_t, 256> lut{};
  for (int p = 0; p < 256; ++p) lut[p] = quantize_value(p / kPixelMax, 1.0 / kMaxCode);

  Dataset d;
  d.has_labels = true;
  d.labels.reserve(n);
  std::vector<std::uint8_t> codes(n * kCifarPixels);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * record;
    const std::uint8_t label = rec[label_bytes - 1];  // fine label for CIFAR-100
    if (label > max_label) {
      throw DatasetError("record " + std::to_string(i) + " has label " + std::to_string(label));
    }
    d.labels.push_back(label);
    for (std::size_t p = 0; p < kCifarPixels; ++p) {
      codes[i * kCifarPixels + p] = lut[rec[label_bytes + p]];
    }
  }
  d.images = QTensor({n, 3, 32, 32}, std::move(codes), 1.0 / kMaxCode);
  return d;
}

std::vector<std::uint8_t> write_cifar(std::span<const CifarRecord> records, DatasetKind variant) {
  const std::size_t record = cifar_record_size(variant);
  std::vector<std::uint8_t> out;
  out.reserve(records.size() * record);
  for (const CifarRecord& r : records) {
    if (variant == DatasetKind::kCifar100) out.push_back(r.coarse_label);
    out.push_back(r.label);
    out.insert(out.end(), r.pixels.begin(), r.pixels.end());
  }
  return out;
}

Dataset read_raw(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 4 + 4 + 16 + 8 + 1;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kRawMagic, 4) != 0) {
    throw DatasetError("raw tensor file: bad magic");
  }
  if (bytes.size() < kHeader) throw DatasetError("raw tensor file: truncated header");
  if (get_u32(bytes, 4) != 1) throw DatasetError("raw tensor file: version mismatch");
  const Shape4 shape{get_u32(bytes, 8), get_u32(bytes, 12), get_u32(bytes, 16),
                     get_u32(bytes, 20)};
  std::uint64_t scale_bits = 0;
  for (int i = 0; i < 8; ++i) scale_bits |= std::uint64_t{bytes[24 + i]} << (8 * i);
  const double scale = std::bit_cast<double>(scale_bits);
  const std::uint8_t has_labels = bytes[32];
  if (has_labels > 1) throw DatasetError("raw tensor file: bad label flag");
  const std::uint64_t expected =
      kHeader + std::uint64_t{shape.n} * shape.c * shape.h * shape.w + (has_labels ? 4ull * shape.n : 0);
  if (bytes.size() != expected) {
    throw DatasetError("raw tensor file: expected " + std::to_string(expected) + " bytes, got " +
                       std::to_string(bytes.size()));
  }
  Dataset d;
  try {
    d.images = QTensor(shape,
                       std::vector<std::uint8_t>(bytes.begin() + kHeader,
                                                 bytes.begin() + kHeader + shape.count()),
                       scale);
  } catch (const std::invalid_argument& e) {
    throw DatasetError(std::string("raw tensor file: ") + e.what());
  }
  d.has_labels = has_labels == 1;
  if (d.has_labels) {
    for (std::size_t i = 0; i < shape.n; ++i) {
      d.labels.push_back(get_u32(bytes, kHeader + shape.count() + 4 * i));
    }
  }
  return d;
}

std::vector<std::uint8_t> write_raw(const Dataset& data) {
  std::vector<std::uint8_t> out(kRawMagic, kRawMagic + 4);
  put_u32(out, 1);
  const Shape4& s = data.images.shape();
  for (std::size_t v : {s.n, s.c, s.h, s.w}) put_u32(out, static_cast<std::uint32_t>(v));
  const auto bits = std::bit_cast<std::uint64_t>(data.images.scale());
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  out.push_back(data.has_labels ? 1 : 0);
  out.insert(out.end(), data.images.data().begin(), data.images.data().end());
  if (data.has_labels) {
    for (std::size_t l : data.labels) put_u32(out, static_cast<std::uint32_t>(l));
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Dataset load_dataset_file(const std::filesystem::path& path, DatasetKind kind) {
  const auto bytes = read_file_bytes(path);
  return kind == DatasetKind::kRaw ? read_raw(bytes) : ingest_cifar(bytes, kind);
}

std::vector<CifarRecord> synthetic_cifar(std::size_t count, std::size_t num_classes,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CifarRecord> out(count);
  for (CifarRecord& r : out) {
    r.label = static_cast<std::uint8_t>(rng() % num_classes);
    r.coarse_label = static_cast<std::uint8_t>(r.label / 5);
    for (std::size_t p = 0; p < kCifarPixels; p += 8) {
      std::uint64_t bits = rng();
      for (std::size_t b = 0; b < 8 && p + b < kCifarPixels; ++b, bits >>= 8) {
        r.pixels[p + b] = static_cast<std::uint8_t>(bits);
      }
    }
  }
  return out;
}

}  // namespace qcascade
