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

#ifndef QCASCADE_KERNELS_KERNELS_INTERNAL_H_
#define QCASCADE_KERNELS_KERNELS_INTERNAL_H_

#include <cstddef>
#include <cstdint>

namespace qcascade::kernels::internal {

void conv_patch_scalar(const std::uint64_t* planes, std::size_t words,
                       const std::uint64_t* weight_rows,
                       std::size_t out_channels, std::int32_t patch_sum,
                       std::int32_t* out, std::size_t out_stride);
void threshold_scalar(const std::int32_t* acc, std::size_t n,
                      const std::int32_t* thresholds, std::uint8_t* out);
double signed_sum_scalar(const double* x, std::size_t n,
                         const std::uint64_t* weight_row);

#if defined(QCASCADE_HAVE_AVX2)
void conv_patch_avx2(const std::uint64_t* planes, std::size_t words,
                     const std::uint64_t* weight_rows,
                     std::size_t out_channels, std::int32_t patch_sum,
                     std::int32_t* out, std::size_t out_stride);
void threshold_avx2(const std::int32_t* acc, std::size_t n,
                    const std::int32_t* thresholds, std::uint8_t* out);
double signed_sum_avx2(const double* x, std::size_t n,
                       const std::uint64_t* weight_row);
#endif

}  // namespace qcascade::kernels::internal

#endif  // QCASCADE_KERNELS_KERNELS_INTERNAL_H_
