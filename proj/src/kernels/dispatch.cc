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

#include <stdexcept>

#include "kernels_internal.h"
#include "qcascade/kernels.h"

namespace qcascade::kernels {
namespace {

constexpr KernelSet kScalar{Isa::kScalar, &internal::conv_patch_scalar,
                            &internal::threshold_scalar,
                            &internal::signed_sum_scalar};

#if defined(QCASCADE_HAVE_AVX2)
constexpr KernelSet kAvx2{Isa::kAvx2, &internal::conv_patch_avx2,
                          &internal::threshold_avx2,
                          &internal::signed_sum_avx2};

bool cpu_supports_avx2() {
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
  }();
  return supported;
}
#endif

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

const KernelSet& scalar_kernels() { return kScalar; }

const KernelSet* avx2_kernels() {
#if defined(QCASCADE_HAVE_AVX2)
  return cpu_supports_avx2() ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& best_kernels() {
  if (const KernelSet* k = avx2_kernels()) return *k;
  return kScalar;
}

bool isa_available(Isa isa) {
  return isa == Isa::kScalar || avx2_kernels() != nullptr;
}

const KernelSet& kernels_for(Isa isa) {
  if (isa == Isa::kScalar) return kScalar;
  if (const KernelSet* k = avx2_kernels()) return *k;
  throw std::runtime_error("AVX2 kernels are not available on this machine");
}

}  // namespace qcascade::kernels
