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

#include "qcascade/qlayers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qcascade {

template <class Tag>
RowMatrix<Tag>::RowMatrix(std::size_t rows, std::size_t cols,
                          std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("RowMatrix: data length does not match shape");
  }
}

template class RowMatrix<LogitsTag>;
template class RowMatrix<ProbsTag>;

BinaryWeights::BinaryWeights(WeightShape shape,
                             std::vector<std::uint64_t> packed)
    : shape_(shape), packed_(std::move(packed)) {
  const std::size_t bits = shape_.count();
  if (packed_.size() != kernels::words_for_bits(bits)) {
    throw std::invalid_argument("BinaryWeights: expected " +
                                std::to_string(kernels::words_for_bits(bits)) +
                                " words, got " +
                                std::to_string(packed_.size()));
  }
  if (bits % 64 != 0 && !packed_.empty() &&
      (packed_.back() >> (bits % 64)) != 0) {
    throw std::invalid_argument("BinaryWeights: padding bits must be zero");
  }
  const std::size_t row_bits = shape_.row_bits();
  row_words_ = kernels::words_for_bits(row_bits);
  rows_.assign(shape_.out * row_words_, 0);
  for (std::size_t o = 0; o < shape_.out; ++o) {
    std::uint64_t* dst = rows_.data() + o * row_words_;
    for (std::size_t b = 0; b < row_bits; ++b) {
      const std::size_t src = o * row_bits + b;
      dst[b / 64] |= ((packed_[src / 64] >> (src % 64)) & 1u) << (b % 64);
    }
  }
}

BinaryWeights BinaryWeights::from_signs(WeightShape shape,
                                        std::span<const std::int8_t> signs) {
  if (signs.size() != shape.count()) {
    throw std::invalid_argument("BinaryWeights: sign count does not match");
  }
  std::vector<std::uint64_t> packed(kernels::words_for_bits(signs.size()), 0);
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 1) {
      packed[i / 64] |= std::uint64_t{1} << (i % 64);
    } else if (signs[i] != -1) {
      throw std::invalid_argument("BinaryWeights: weights must be -1 or +1");
    }
  }
  return BinaryWeights(shape, std::move(packed));
}

std::vector<std::int8_t> BinaryWeights::unpack() const {
  std::vector<std::int8_t> out(shape_.count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int8_t>(sign(i));
  }
  return out;
}

ThresholdParams::ThresholdParams(std::size_t channels,
                                 std::vector<std::int32_t> values)
    : channels_(channels), values_(std::move(values)) {
  if (values_.size() != channels_ * kSteps) {
    throw std::invalid_argument("ThresholdParams: expected channels x 31");
  }
  for (std::size_t c = 0; c < channels_; ++c) {
    auto row = channel(c);
    if (!std::is_sorted(row.begin(), row.end())) {
      throw std::invalid_argument("ThresholdParams: channel " +
                                  std::to_string(c) + " is decreasing");
    }
  }
}

ThresholdParams ThresholdParams::identity(std::size_t channels) {
  std::vector<std::int32_t> v(channels * kSteps);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < kSteps; ++k) {
      v[c * kSteps + k] = static_cast<std::int32_t>(k + 1);
    }
  }
  return ThresholdParams(channels, std::move(v));
}

AccumTensor binary_conv2d(const QTensor& input, const BinaryWeights& w,
                          std::size_t stride, std::size_t pad,
                          const kernels::KernelSet& k) {
  const Shape4& in = input.shape();
  const WeightShape& ws = w.shape();
  if (in.c != ws.in) {
    throw std::invalid_argument("binary_conv2d: input has " +
                                std::to_string(in.c) + " channels, weights " +
                                std::to_string(ws.in));
  }
  if (stride == 0) {
    throw std::invalid_argument("binary_conv2d: stride must be positive");
  }
  if (in.h + 2 * pad < ws.kh || in.w + 2 * pad < ws.kw || ws.out == 0) {
    throw std::invalid_argument("binary_conv2d: kernel does not fit input " +
                                in.str());
  }
  const Shape4 out_shape{in.n, ws.out, (in.h + 2 * pad - ws.kh) / stride + 1,
                         (in.w + 2 * pad - ws.kw) / stride + 1};
  const std::size_t words = w.row_words();
  const std::size_t spatial = out_shape.h * out_shape.w;

  std::vector<std::int32_t> out(out_shape.count());
  std::vector<std::uint64_t> planes(kActivationBits * words);
  const auto ipad = static_cast<std::ptrdiff_t>(pad);

  for (std::size_t n = 0; n < in.n; ++n) {
    auto sample = input.sample(n);
    for (std::size_t oy = 0; oy < out_shape.h; ++oy) {
      for (std::size_t ox = 0; ox < out_shape.w; ++ox) {
        std::fill(planes.begin(), planes.end(), 0);
        std::int32_t patch_sum = 0;
        std::size_t bit = 0;
        for (std::size_t i = 0; i < in.c; ++i) {
          for (std::size_t ky = 0; ky < ws.kh; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride + ky) - ipad;
            for (std::size_t kx = 0; kx < ws.kw; ++kx, ++bit) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - ipad;
              if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(in.h) ||
                  ix >= static_cast<std::ptrdiff_t>(in.w)) {
                continue;
              }
              const std::uint8_t code =
                  sample[(i * in.h + static_cast<std::size_t>(iy)) * in.w +
                         static_cast<std::size_t>(ix)];
              if (code == 0) continue;
              patch_sum += code;
              const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
              for (int p = 0; p < kActivationBits; ++p) {
                if ((code >> p) & 1u) planes[p * words + bit / 64] |= mask;
              }
            }
          }
        }
        std::int32_t* dst =
            out.data() + n * ws.out * spatial + oy * out_shape.w + ox;
        k.conv_patch(planes.data(), words, w.rows().data(), ws.out, patch_sum,
                     dst, spatial);
      }
    }
  }
  return AccumTensor(out_shape, std::move(out));
}

QTensor threshold_activate(const AccumTensor& acc, const ThresholdParams& t,
                           double out_scale, const kernels::KernelSet& k) {
  const Shape4& s = acc.shape();
  if (s.c != t.channels()) {
    throw std::invalid_argument("threshold_activate: accumulator has " +
                                std::to_string(s.c) +
                                " channels, thresholds " +
                                std::to_string(t.channels()));
  }
  const std::size_t spatial = s.h * s.w;
  std::vector<std::uint8_t> out(s.count());
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = (n * s.c + c) * spatial;
      k.threshold(acc.data().data() + base, spatial, t.channel(c).data(),
                  out.data() + base);
    }
  }
  return QTensor(s, std::move(out), out_scale);
}

QTensor maxpool2d(const QTensor& input, std::size_t k, std::size_t stride) {
  const Shape4& in = input.shape();
  if (k == 0 || stride == 0) {
    throw std::invalid_argument("maxpool2d: window and stride must be positive");
  }
  if (k > in.h || k > in.w) {
    throw std::invalid_argument("maxpool2d: window larger than input " +
                                in.str());
  }
  const Shape4 os{in.n, in.c, (in.h - k) / stride + 1, (in.w - k) / stride + 1};
  std::vector<std::uint8_t> out(os.count());
  auto src = input.data();
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t c = 0; c < in.c; ++c) {
      const std::uint8_t* plane = src.data() + in.offset(n, c, 0, 0);
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          std::uint8_t m = 0;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::uint8_t* r = plane + (oy * stride + ky) * in.w + ox * stride;
            m = std::max(m, *std::max_element(r, r + k));
          }
          out[os.offset(n, c, oy, ox)] = m;
        }
      }
    }
  }
  return QTensor(os, std::move(out), input.scale());
}

FloatTensor global_avgpool(const QTensor& input) {
  const Shape4& in = input.shape();
  const std::size_t spatial = in.h * in.w;
  std::vector<double> out(in.n * in.c, 0.0);
  if (spatial == 0) {
    throw std::invalid_argument("global_avgpool: empty spatial extent");
  }
  auto src = input.data();
  for (std::size_t nc = 0; nc < in.n * in.c; ++nc) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < spatial; ++i) sum += src[nc * spatial + i];
    out[nc] = static_cast<double>(sum) * input.scale() /
              static_cast<double>(spatial);
  }
  return FloatTensor(Shape4{in.n, in.c, 1, 1}, std::move(out));
}

Logits fully_connected(const FloatTensor& input, const BinaryWeights& w,
                       std::span<const double> bias,
                       const kernels::KernelSet& k) {
  const Shape4& in = input.shape();
  const WeightShape& ws = w.shape();
  if (ws.kh != 1 || ws.kw != 1 || ws.in != in.per_sample()) {
    throw std::invalid_argument(
        "fully_connected: weights expect " + std::to_string(ws.row_bits()) +
        " features, input has " + std::to_string(in.per_sample()));
  }
  if (bias.size() != ws.out) {
    throw std::invalid_argument("fully_connected: bias length mismatch");
  }
  std::vector<double> z(in.n * ws.out);
  for (std::size_t n = 0; n < in.n; ++n) {
    auto x = input.sample(n);
    for (std::size_t o = 0; o < ws.out; ++o) {
      z[n * ws.out + o] = k.signed_sum(x.data(), x.size(), w.row(o).data()) + bias[o];
    }
  }
  return Logits(in.n, ws.out, std::move(z));
}

Probabilities softmax(const Logits& z) {
  if (z.cols() == 0) {
    throw std::invalid_argument("softmax: at least one class is required");
  }
  std::vector<double> out(z.data().size());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    if (std::any_of(row.begin(), row.end(),
                    [](double v) { return std::isnan(v); })) {
      throw std::invalid_argument("softmax: NaN logit");
    }
    const double m = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    double* dst = out.data() + r * z.cols();
    for (std::size_t j = 0; j < row.size(); ++j) {
      dst[j] = std::exp(row[j] - m);
      total += dst[j];
    }
    for (std::size_t j = 0; j < row.size(); ++j) dst[j] /= total;
  }
  return Probabilities(z.rows(), z.cols(), std::move(out));
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty vector");
  // max_element returns the first maximum.
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

}  // namespace qcascade
