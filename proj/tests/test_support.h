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

#ifndef QCASCADE_TESTS_TEST_SUPPORT_H_
#define QCASCADE_TESTS_TEST_SUPPORT_H_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qcascade/kernels.h"
#include "qcascade/model_factory.h"
#include "qcascade/qlayers.h"

namespace qcascade::testing {

// Every kernel set this machine can run, scalar first.
inline std::vector<const kernels::KernelSet*> kernel_sets() {
  std::vector<const kernels::KernelSet*> out{&kernels::scalar_kernels()};
  if (const auto* avx = kernels::avx2_kernels()) out.push_back(avx);
  return out;
}

inline std::filesystem::path temp_path(const std::string& stem) {
  static std::atomic<int> counter{0};
  return std::filesystem::temp_directory_path() /
         ("qcascade_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + stem);
}

inline BinaryWeights random_weights(WeightShape shape, std::mt19937_64& rng) {
  std::vector<std::int8_t> signs(shape.count());
  for (auto& s : signs) s = (rng() & 1u) ? 1 : -1;
  return BinaryWeights::from_signs(shape, signs);
}

inline QTensor random_codes(Shape4 shape, std::mt19937_64& rng, double scale = 1.0 / 31) {
  std::vector<std::uint8_t> codes(shape.count());
  for (auto& c : codes) c = static_cast<std::uint8_t>(rng() % 32);
  return QTensor(shape, std::move(codes), scale);
}

inline ThresholdParams random_thresholds(std::size_t channels, std::mt19937_64& rng,
                                         int spread = 40) {
  std::vector<std::int32_t> v;
  std::uniform_int_distribution<int> start(-spread, spread);
  std::uniform_int_distribution<int> step(0, 4);
  for (std::size_t c = 0; c < channels; ++c) {
    int t = start(rng);
    for (int k = 0; k < 31; ++k) {
      v.push_back(t);
      t += step(rng);
    }
  }
  return ThresholdParams(channels, std::move(v));
}

// Small three-stage model on 16x16 inputs.
inline StagedModel toy_model(std::uint64_t seed, std::uint32_t classes = 10) {
  return build_random_model(toy_recipe(classes, {3, 16, 16}), seed);
}

}  // namespace qcascade::testing

#endif  // QCASCADE_TESTS_TEST_SUPPORT_H_
