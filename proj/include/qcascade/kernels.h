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

#ifndef QCASCADE_KERNELS_H_
#define QCASCADE_KERNELS_H_

// Inner loops of the quantized layers. Every entry has a portable scalar
// implementation and, where the build and CPU allow it, an AVX2 variant. The
// variants are bit-identical: the floating-point kernel fixes its summation
// order so that scalar and vector code produce the same result.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace qcascade::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Number of 64-bit words needed for `bits` bits.
constexpr std::size_t words_for_bits(std::size_t bits) {
  return (bits + 63) / 64;
}

struct KernelSet {
  Isa isa;

  // One output position of a binary-weight convolution.
  //
  // `planes` holds kActivationBits bit-planes of the input patch, each
  // `words` long: bit k of plane p is bit p of patch element k. `weight_rows`
  // holds `out_channels` rows of `words` words each, where bit k set means
  // weight +1 and clear means -1 (trailing bits zero). `patch_sum` is the sum
  // of the patch codes. Writes sum_k w_k * x_k for every output channel to
  // out[o * out_stride].
  void (*conv_patch)(const std::uint64_t* planes, std::size_t words,
                     const std::uint64_t* weight_rows,
                     std::size_t out_channels, std::int32_t patch_sum,
                     std::int32_t* out, std::size_t out_stride);

  // out[i] = |{k in [0,31) : thresholds[k] <= acc[i]}|. `thresholds` has 31
  // non-decreasing entries.
  void (*threshold)(const std::int32_t* acc, std::size_t n,
                    const std::int32_t* thresholds, std::uint8_t* out);

  // Sum over i < n of (+x[i] if bit i of `weight_row` is set else -x[i]).
  // The sum is accumulated in four interleaved partial sums (element i goes to
  // lane i % 4) combined as (l0 + l1) + (l2 + l3).
  double (*signed_sum)(const double* x, std::size_t n,
                       const std::uint64_t* weight_row);
};

const KernelSet& scalar_kernels();

// Null when AVX2 support was not compiled in or the CPU lacks it.
const KernelSet* avx2_kernels();

// The fastest set usable on this machine.
const KernelSet& best_kernels();

const KernelSet& kernels_for(Isa isa);  // throws if unavailable
bool isa_available(Isa isa);

}  // namespace qcascade::kernels

#endif  // QCASCADE_KERNELS_H_
