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

#ifndef QCASCADE_MODEL_FACTORY_H_
#define QCASCADE_MODEL_FACTORY_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "qcascade/staged_model.h"

namespace qcascade {

struct ConvBlockRecipe {
  std::size_t out_channels = 16;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 1;
  // Optional max pooling after the activation: {kernel, stride}.
  std::optional<MaxPoolLayer> pool;
};

struct StageRecipe {
  std::vector<ConvBlockRecipe> blocks;
  double config_ms = 40.0;
  double fpga_exec_ms_per_image = 2.0;
  double cpu_exec_ms_per_image = 50.0;
};

struct ModelRecipe {
  ImageShape input{3, 32, 32};
  std::uint32_t num_classes = 10;
  std::vector<StageRecipe> stages;
};

// Three-part plain ResNet-18 trunk for 32x32x3 inputs: a 3x3/2 stem with
// 2x2 max pooling and four 64-wide convs, then four 128-wide and four
// 256-wide convs, each part opening with a stride-2 conv. Part timings use
// the measured hardware figures (40 ms configuration, 2 ms per image on the
// FPGA, 98/57/49 ms per image on the CPU).
ModelRecipe resnet18_desk_recipe(std::uint32_t num_classes = 10);

// Small three-stage model for tests and quick runs (8/16/32 channels).
ModelRecipe toy_recipe(std::uint32_t num_classes = 10, ImageShape input = {3, 32, 32});

// Builds a model with seeded random +-1 weights. Each threshold layer is
// fitted to the channel's accumulator distribution on `calibration` (or on
// seeded random images when absent): t[c][k] is the (1 + k/32)/2 quantile, so
// roughly half of the pre-activations map to code 0 and the rest spread over
// 1..31. Head biases are zero. Stage flops are computed from the geometry.
StagedModel build_random_model(const ModelRecipe& recipe, std::uint64_t seed,
                               const QTensor* calibration = nullptr);

// Seeded uniform random codes of the given shape with scale 1/31.
QTensor random_images(Shape4 shape, std::uint64_t seed);

}  // namespace qcascade

#endif  // QCASCADE_MODEL_FACTORY_H_
