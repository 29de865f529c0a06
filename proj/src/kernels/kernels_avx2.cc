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

// Compiled with -mavx2 -mpopcnt. Only reached after a runtime CPU check.

#include <immintrin.h>

#include <bit>

#include "kernels_internal.h"
#include "qcascade/qtensor.h"

namespace qcascade::kernels::internal {
namespace {

// Per-64-bit-lane population count (nibble lookup + SAD).
inline __m256i popcount_epi64(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2,
                                       3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                       2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  const __m256i bytes = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo),
                                        _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(bytes, _mm256_setzero_si256());
}

inline std::int64_t hsum_epi64(__m256i v) {
  const __m128i s = _mm_add_epi64(_mm256_castsi256_si128(v),
                                  _mm256_extracti128_si256(v, 1));
  return _mm_cvtsi128_si64(s) + _mm_extract_epi64(s, 1);
}

}  // namespace

void conv_patch_avx2(const std::uint64_t* planes, std::size_t words,
                     const std::uint64_t* weight_rows,
                     std::size_t out_channels, std::int32_t patch_sum,
                     std::int32_t* out, std::size_t out_stride) {
  const std::size_t vec_words = words & ~std::size_t{3};
  for (std::size_t o = 0; o < out_channels; ++o) {
    const std::uint64_t* row = weight_rows + o * words;
    __m256i acc = _mm256_setzero_si256();
    for (std::size_t w = 0; w < vec_words; w += 4) {
      const __m256i wv =
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + w));
      for (int p = 0; p < kActivationBits; ++p) {
        const __m256i pv = _mm256_loadu_si256(
            reinterpret_cast<const __m256i*>(planes + p * words + w));
        const __m256i cnt = popcount_epi64(_mm256_and_si256(pv, wv));
        acc = _mm256_add_epi64(acc, _mm256_slli_epi64(cnt, p));
      }
    }
    std::int64_t positive = hsum_epi64(acc);
    for (std::size_t w = vec_words; w < words; ++w) {
      for (int p = 0; p < kActivationBits; ++p) {
        positive += static_cast<std::int64_t>(
                        std::popcount(planes[p * words + w] & row[w]))
                    << p;
      }
    }
    out[o * out_stride] = static_cast<std::int32_t>(2 * positive - patch_sum);
  }
}

void threshold_avx2(const std::int32_t* acc, std::size_t n,
                    const std::int32_t* thresholds, std::uint8_t* out) {
  __m256i t[kMaxCode];
  for (int k = 0; k < kMaxCode; ++k) t[k] = _mm256_set1_epi32(thresholds[k]);
  const __m256i max_code = _mm256_set1_epi32(kMaxCode);

  std::size_t i = 0;
  alignas(32) std::int32_t lanes[8];
  for (; i + 8 <= n; i += 8) {
    const __m256i a =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    // Each t[k] > a contributes -1.
    __m256i cnt = max_code;
    for (int k = 0; k < kMaxCode; ++k) {
      cnt = _mm256_add_epi32(cnt, _mm256_cmpgt_epi32(t[k], a));
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), cnt);
    for (int j = 0; j < 8; ++j) out[i + j] = static_cast<std::uint8_t>(lanes[j]);
  }
  if (i < n) threshold_scalar(acc + i, n - i, thresholds, out + i);
}

double signed_sum_avx2(const double* x, std::size_t n,
                       const std::uint64_t* weight_row) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  // Lane j of the mask selects bit j of a 4-bit weight group.
  const __m256i bit_select = _mm256_setr_epi64x(1, 2, 4, 8);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const std::uint64_t group = (weight_row[i / 64] >> (i % 64)) & 0xfu;
    const __m256i g = _mm256_set1_epi64x(static_cast<long long>(group));
    const __m256i is_minus = _mm256_cmpeq_epi64(
        _mm256_and_si256(g, bit_select), _mm256_setzero_si256());
    const __m256d flip = _mm256_and_pd(_mm256_castsi256_pd(is_minus), sign);
    acc = _mm256_add_pd(acc, _mm256_xor_pd(_mm256_loadu_pd(x + i), flip));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (; i < n; ++i) {
    const bool plus = (weight_row[i / 64] >> (i % 64)) & 1u;
    lanes[i % 4] += plus ? x[i] : -x[i];
  }
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace qcascade::kernels::internal
