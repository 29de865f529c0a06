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

#include "qcascade/qtensor.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcascade {

std::string Shape4::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + ")";
}

QTensor::QTensor(Shape4 shape, std::vector<std::uint8_t> data, double scale)
    : shape_(shape), data_(std::move(data)), scale_(scale) {
  if (data_.size() != shape_.count()) {
    throw std::invalid_argument("QTensor: data length " +
                                std::to_string(data_.size()) +
                                " does not match shape " + shape_.str());
  }
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) {
    throw std::invalid_argument("QTensor: scale must be positive and finite");
  }
  if (std::any_of(data_.begin(), data_.end(),
                  [](std::uint8_t v) { return v > kMaxCode; })) {
    throw std::invalid_argument("QTensor: code outside the 5-bit range");
  }
}

QTensor QTensor::gather(std::span<const std::size_t> indices) const {
  const std::size_t per = shape_.per_sample();
  std::vector<std::uint8_t> out;
  out.reserve(indices.size() * per);
  for (std::size_t idx : indices) {
    if (idx >= shape_.n) {
      throw std::out_of_range("QTensor::gather: sample index out of range");
    }
    auto s = sample(idx);
    out.insert(out.end(), s.begin(), s.end());
  }
  Shape4 shape = shape_;
  shape.n = indices.size();
  return QTensor(shape, std::move(out), scale_);
}

AccumTensor::AccumTensor(Shape4 shape, std::vector<std::int32_t> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.count()) {
    throw std::invalid_argument("AccumTensor: data length does not match " +
                                shape_.str());
  }
}

FloatTensor::FloatTensor(Shape4 shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.count()) {
    throw std::invalid_argument("FloatTensor: data length does not match " +
                                shape_.str());
  }
}

std::uint8_t quantize_value(double x, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("quantize: scale must be positive and finite");
  }
  if (std::isnan(x)) {
    throw std::invalid_argument("quantize: NaN input");
  }
  // std::round rounds half away from zero.
  const double r = std::round(x / scale);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, double{kMaxCode}));
}

QTensor quantize(const FloatTensor& x, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("quantize: scale must be positive and finite");
  }
  std::vector<std::uint8_t> codes(x.data().size());
  std::transform(x.data().begin(), x.data().end(), codes.begin(),
                 [scale](double v) { return quantize_value(v, scale); });
  return QTensor(x.shape(), std::move(codes), scale);
}

FloatTensor dequantize(const QTensor& q) {
  std::vector<double> out(q.data().size());
  std::transform(q.data().begin(), q.data().end(), out.begin(),
                 [s = q.scale()](std::uint8_t v) { return v * s; });
  return FloatTensor(q.shape(), std::move(out));
}

}  // namespace qcascade
