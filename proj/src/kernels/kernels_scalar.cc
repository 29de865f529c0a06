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

#include <algorithm>
#include <bit>

#include "kernels_internal.h"
#include "qcascade/qtensor.h"

namespace qcascade::kernels::internal {

void conv_patch_scalar(const std::uint64_t* planes, std::size_t words,
                       const std::uint64_t* weight_rows,
                       std::size_t out_channels, std::int32_t patch_sum,
                       std::int32_t* out, std::size_t out_stride) {
  for (std::size_t o = 0; o < out_channels; ++o) {
    const std::uint64_t* row = weight_rows + o * words;
    std::int64_t positive = 0;
    for (int p = 0; p < kActivationBits; ++p) {
      const std::uint64_t* plane = planes + p * words;
      std::int64_t count = 0;
      for (std::size_t w = 0; w < words; ++w) {
        count += std::popcount(plane[w] & row[w]);
      }
      positive += count << p;
    }
    // sum_k (2 b_k - 1) x_k = 2 * sum_{b_k = 1} x_k - sum_k x_k
    out[o * out_stride] = static_cast<std::int32_t>(2 * positive - patch_sum);
  }
}

void threshold_scalar(const std::int32_t* acc, std::size_t n,
                      const std::int32_t* thresholds, std::uint8_t* out) {
  const std::int32_t* end = thresholds + kMaxCode;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::uint8_t>(
        std::upper_bound(thresholds, end, acc[i]) - thresholds);
  }
}

double signed_sum_scalar(const double* x, std::size_t n,
                         const std::uint64_t* weight_row) {
  double lanes[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const bool plus = (weight_row[i / 64] >> (i % 64)) & 1u;
    lanes[i % 4] += plus ? x[i] : -x[i];
  }
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace qcascade::kernels::internal
