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

#ifndef QCASCADE_DATASET_H_
#define QCASCADE_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcascade/qtensor.h"

namespace qcascade {

enum class DatasetKind { kCifar10, kCifar100, kRaw };

std::string_view dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kCifarPixels = 3 * 32 * 32;

// One CIFAR binary record. CIFAR-10 records are <label><3072 pixels>; CIFAR-100
// records are <coarse label><fine label><3072 pixels>. Pixels are channel-major
// (R, G, B planes), each plane row-major.
struct CifarRecord {
  std::uint8_t coarse_label = 0;  // CIFAR-100 only
  std::uint8_t label = 0;
  std::array<std::uint8_t, kCifarPixels> pixels{};
};

std::size_t cifar_record_size(DatasetKind variant);

struct Dataset {
  QTensor images;                   // codes round(pixel / 255 * 31), scale 1/31
  std::vector<std::size_t> labels;  // empty for unlabeled raw files
  bool has_labels = false;
};

// Parses CIFAR binary batches. An empty buffer yields zero images. Throws
// DatasetError on a length that is not a whole number of records or an
// out-of-range label.
Dataset ingest_cifar(std::span<const std::uint8_t> bytes, DatasetKind variant);
std::vector<std::uint8_t> write_cifar(std::span<const CifarRecord> records, DatasetKind variant);

// Raw tensor file, little-endian: magic "AHQT", u32 version = 1, u32 n, c, h,
// w, f64 scale, u8 has_labels, n*c*h*w code bytes, then n u32 labels when
// has_labels is 1.
Dataset read_raw(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_raw(const Dataset& data);

Dataset load_dataset_file(const std::filesystem::path& path, DatasetKind kind);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Seeded synthetic records with uniform pixels and labels below num_classes.
std::vector<CifarRecord> synthetic_cifar(std::size_t count, std::size_t num_classes,
                                         std::uint64_t seed);

}  // namespace qcascade

#endif  // QCASCADE_DATASET_H_
