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

#ifndef QCASCADE_QLAYERS_H_
#define QCASCADE_QLAYERS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qcascade/kernels.h"
#include "qcascade/qtensor.h"

namespace qcascade {

// Extents of a binary weight tensor: (out, in, kh, kw). Fully connected
// weights use kh = kw = 1.
struct WeightShape {
  std::size_t out = 0;
  std::size_t in = 0;
  std::size_t kh = 1;
  std::size_t kw = 1;

  std::size_t row_bits() const { return in * kh * kw; }
  std::size_t count() const { return out * row_bits(); }

  friend bool operator==(const WeightShape&, const WeightShape&) = default;
};

// {-1, +1} weights, one bit each. Bit 1 is +1, bit 0 is -1. The canonical
// packing is row-major over (out, in, kh, kw), least-significant bit first in
// each 64-bit word; bits past count() in the last word are zero.
//
// A second, row-aligned copy (each output row starts on a word boundary) is
// kept for the popcount kernels.
class BinaryWeights {
 public:
  BinaryWeights() = default;
  // Throws std::invalid_argument if the word count is wrong or padding bits
  // are set.
  BinaryWeights(WeightShape shape, std::vector<std::uint64_t> packed);

  // Packs explicit signs; every entry must be -1 or +1.
  static BinaryWeights from_signs(WeightShape shape,
                                  std::span<const std::int8_t> signs);

  const WeightShape& shape() const { return shape_; }
  std::span<const std::uint64_t> packed() const { return packed_; }

  int sign(std::size_t flat_index) const {
    return (packed_[flat_index / 64] >> (flat_index % 64)) & 1u ? 1 : -1;
  }
  int sign(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const {
    return sign(((o * shape_.in + i) * shape_.kh + y) * shape_.kw + x);
  }
  std::vector<std::int8_t> unpack() const;

  std::size_t row_words() const { return row_words_; }
  std::span<const std::uint64_t> row(std::size_t o) const {
    return std::span(rows_).subspan(o * row_words_, row_words_);
  }
  std::span<const std::uint64_t> rows() const { return rows_; }

  friend bool operator==(const BinaryWeights& a, const BinaryWeights& b) {
    return a.shape_ == b.shape_ && a.packed_ == b.packed_;
  }

 private:
  WeightShape shape_{};
  std::vector<std::uint64_t> packed_;
  std::size_t row_words_ = 0;
  std::vector<std::uint64_t> rows_;
};

// Per-channel integer staircase: output code = number of thresholds <= acc.
class ThresholdParams {
 public:
  static constexpr std::size_t kSteps = kMaxCode;  // 31 thresholds per channel

  ThresholdParams() = default;
  // `values` is channels x 31, row-major. Throws std::invalid_argument if a
  // row is decreasing or the size is wrong.
  ThresholdParams(std::size_t channels, std::vector<std::int32_t> values);

  // t[c][k] = k for every channel (k = 1..31), so code = clamp(acc, 0, 31).
  static ThresholdParams identity(std::size_t channels);

  std::size_t channels() const { return channels_; }
  std::span<const std::int32_t> values() const { return values_; }
  std::span<const std::int32_t> channel(std::size_t c) const {
    return std::span(values_).subspan(c * kSteps, kSteps);
  }

  friend bool operator==(const ThresholdParams&,
                         const ThresholdParams&) = default;

 private:
  std::size_t channels_ = 0;
  std::vector<std::int32_t> values_;
};

// Row-major (batch x classes) matrix of reals.
template <class Tag>
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span(data_).subspan(r * cols_, cols_);
  }

  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LogitsTag {};
struct ProbsTag {};
using Logits = RowMatrix<LogitsTag>;        // pre-softmax FC output z
using Probabilities = RowMatrix<ProbsTag>;  // softmax(z), rows sum to 1

extern template class RowMatrix<LogitsTag>;
extern template class RowMatrix<ProbsTag>;

// out[n][o][y][x] = sum_{i,ky,kx} w(o,i,ky,kx) * in(n,i,y*s+ky-p,x*s+kx-p),
// with code 0 outside the input.
AccumTensor binary_conv2d(const QTensor& input, const BinaryWeights& w,
                          std::size_t stride, std::size_t pad,
                          const kernels::KernelSet& k = kernels::best_kernels());

QTensor threshold_activate(
    const AccumTensor& acc, const ThresholdParams& t, double out_scale,
    const kernels::KernelSet& k = kernels::best_kernels());

// No padding; output extent floor((H - k) / stride) + 1.
QTensor maxpool2d(const QTensor& input, std::size_t k, std::size_t stride);

// Per-channel mean of the dequantized values; shape (N, C, 1, 1).
FloatTensor global_avgpool(const QTensor& input);

// z[n][o] = sum_i w(o,i) x[n][i] + bias[o], x flattened per sample.
Logits fully_connected(const FloatTensor& input, const BinaryWeights& w,
                       std::span<const double> bias,
                       const kernels::KernelSet& k = kernels::best_kernels());

// Max-subtracted softmax per row. Throws std::invalid_argument on NaN or an
// empty row.
Probabilities softmax(const Logits& z);

// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> v);

}  // namespace qcascade

#endif  // QCASCADE_QLAYERS_H_
