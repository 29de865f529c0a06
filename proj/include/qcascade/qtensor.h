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

#ifndef QCASCADE_QTENSOR_H_
#define QCASCADE_QTENSOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qcascade {

// Largest activation code. Activations are unsigned 5-bit values.
inline constexpr std::uint8_t kMaxCode = 31;
inline constexpr int kActivationBits = 5;

// NCHW extents.
struct Shape4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t count() const { return n * c * h * w; }
  std::size_t per_sample() const { return c * h * w; }
  std::size_t offset(std::size_t in, std::size_t ic, std::size_t iy,
                     std::size_t ix) const {
    return ((in * c + ic) * h + iy) * w + ix;
  }
  std::string str() const;

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

// Activation tensor of 5-bit unsigned codes sharing one scale. The real value
// of an element is code * scale.
class QTensor {
 public:
  QTensor() = default;
  // Throws std::invalid_argument on length mismatch, codes above kMaxCode or
  // a non-positive scale.
  QTensor(Shape4 shape, std::vector<std::uint8_t> data, double scale);

  const Shape4& shape() const { return shape_; }
  std::span<const std::uint8_t> data() const { return data_; }
  double scale() const { return scale_; }

  std::uint8_t at(std::size_t n, std::size_t c, std::size_t y,
                  std::size_t x) const {
    return data_[shape_.offset(n, c, y, x)];
  }
  std::span<const std::uint8_t> sample(std::size_t n) const {
    return std::span(data_).subspan(n * shape_.per_sample(),
                                    shape_.per_sample());
  }

  // Copies the listed samples, in order, into a new tensor.
  QTensor gather(std::span<const std::size_t> indices) const;

  friend bool operator==(const QTensor&, const QTensor&) = default;

 private:
  Shape4 shape_{};
  std::vector<std::uint8_t> data_;
  double scale_ = 1.0;
};

// Wide signed pre-activation accumulators (convolution outputs).
class AccumTensor {
 public:
  AccumTensor() = default;
  AccumTensor(Shape4 shape, std::vector<std::int32_t> data);

  const Shape4& shape() const { return shape_; }
  std::span<const std::int32_t> data() const { return data_; }
  std::int32_t at(std::size_t n, std::size_t c, std::size_t y,
                  std::size_t x) const {
    return data_[shape_.offset(n, c, y, x)];
  }

  friend bool operator==(const AccumTensor&, const AccumTensor&) = default;

 private:
  Shape4 shape_{};
  std::vector<std::int32_t> data_;
};

class FloatTensor {
 public:
  FloatTensor() = default;
  FloatTensor(Shape4 shape, std::vector<double> data);

  const Shape4& shape() const { return shape_; }
  std::span<const double> data() const { return data_; }
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[shape_.offset(n, c, y, x)];
  }
  std::span<const double> sample(std::size_t n) const {
    return std::span(data_).subspan(n * shape_.per_sample(),
                                    shape_.per_sample());
  }

  friend bool operator==(const FloatTensor&, const FloatTensor&) = default;

 private:
  Shape4 shape_{};
  std::vector<double> data_;
};

// code = clamp(round_half_away(x / scale), 0, 31). Throws
// std::invalid_argument for a non-positive or non-finite scale and for NaN
// inputs; infinities saturate.
QTensor quantize(const FloatTensor& x, double scale);
std::uint8_t quantize_value(double x, double scale);

FloatTensor dequantize(const QTensor& q);

}  // namespace qcascade

#endif  // QCASCADE_QTENSOR_H_
