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

#include "qcascade/model_factory.h"

#include <algorithm>
#include <random>

namespace qcascade {
namespace {

BinaryWeights random_weights(WeightShape shape, std::mt19937_64& rng) {
  std::vector<std::uint64_t> words(kernels::words_for_bits(shape.count()));
  for (auto& w : words) w = rng();
  if (const std::size_t tail = shape.count() % 64; tail != 0) {
    words.back() &= (std::uint64_t{1} << tail) - 1;
  }
  return BinaryWeights(shape, std::move(words));
}

ThresholdParams fit_thresholds(const AccumTensor& acc) {
  const Shape4& s = acc.shape();
  const std::size_t spatial = s.h * s.w;
  std::vector<std::int32_t> values(s.c * ThresholdParams::kSteps);
  std::vector<std::int32_t> sample;
  for (std::size_t c = 0; c < s.c; ++c) {
    sample.clear();
    for (std::size_t n = 0; n < s.n; ++n) {
      auto base = acc.data().begin() + static_cast<std::ptrdiff_t>((n * s.c + c) * spatial);
      sample.insert(sample.end(), base, base + static_cast<std::ptrdiff_t>(spatial));
    }
    std::sort(sample.begin(), sample.end());
    for (std::size_t k = 1; k <= ThresholdParams::kSteps; ++k) {
      const double q = 0.5 + 0.5 * static_cast<double>(k) / 32.0;
      const auto idx = static_cast<std::size_t>(q * static_cast<double>(sample.size() - 1));
      // Strictly above the quantile so that a constant channel still yields 0.
      values[c * ThresholdParams::kSteps + k - 1] = sample[idx] + 1;
    }
  }
  return ThresholdParams(s.c, std::move(values));
}

}  // namespace

ModelRecipe resnet18_desk_recipe(std::uint32_t num_classes) {
  auto conv = [](std::size_t out, std::size_t stride) {
    return ConvBlockRecipe{out, 3, stride, 1, std::nullopt};
  };
  ModelRecipe r;
  r.input = {3, 32, 32};
  r.num_classes = num_classes;

  StageRecipe part1;
  ConvBlockRecipe stem = conv(64, 2);
  stem.pool = MaxPoolLayer{2, 2};
  part1.blocks = {stem, conv(64, 1), conv(64, 1), conv(64, 1), conv(64, 1)};
  part1.cpu_exec_ms_per_image = 98.0;

  StageRecipe part2;
  part2.blocks = {conv(128, 2), conv(128, 1), conv(128, 1), conv(128, 1)};
  part2.cpu_exec_ms_per_image = 57.0;

  StageRecipe part3;
  part3.blocks = {conv(256, 2), conv(256, 1), conv(256, 1), conv(256, 1)};
  part3.cpu_exec_ms_per_image = 49.0;

  r.stages = {part1, part2, part3};
  return r;
}

ModelRecipe toy_recipe(std::uint32_t num_classes, ImageShape input) {
  ModelRecipe r;
  r.input = input;
  r.num_classes = num_classes;
  StageRecipe a{{{8, 3, 1, 1, MaxPoolLayer{2, 2}}}, 40.0, 2.0, 98.0};
  StageRecipe b{{{16, 3, 2, 1, std::nullopt}, {16, 3, 1, 1, std::nullopt}}, 40.0, 2.0, 57.0};
  StageRecipe c{{{32, 3, 2, 1, std::nullopt}}, 40.0, 2.0, 49.0};
  r.stages = {a, b, c};
  return r;
}

QTensor random_images(Shape4 shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> codes(shape.count());
  // 32 divides 2^64, so the low five bits are unbiased.
  for (auto& c : codes) c = static_cast<std::uint8_t>(rng() & 31u);
  return QTensor(shape, std::move(codes), 1.0 / kMaxCode);
}

StagedModel build_random_model(const ModelRecipe& recipe, std::uint64_t seed,
                               const QTensor* calibration) {
  std::mt19937_64 rng(seed);
  QTensor activations =
      calibration ? *calibration
                  : random_images({16, recipe.input.c, recipe.input.h, recipe.input.w},
                                  seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<StageSpec> stages;
  std::vector<LayerSpec> head;
  ImageShape shape = recipe.input;
  std::uint32_t id = 1;
  for (const StageRecipe& sr : recipe.stages) {
    StageSpec stage;
    stage.id = id++;
    stage.config_ms = sr.config_ms;
    stage.fpga_exec_ms_per_image = sr.fpga_exec_ms_per_image;
    stage.cpu_exec_ms_per_image = sr.cpu_exec_ms_per_image;
    const ImageShape stage_in = shape;
    for (const ConvBlockRecipe& b : sr.blocks) {
      BinaryWeights w = random_weights({b.out_channels, shape.c, b.kernel, b.kernel}, rng);
      const AccumTensor acc = binary_conv2d(activations, w, b.stride, b.pad);
      ThresholdParams t = fit_thresholds(acc);
      activations = threshold_activate(acc, t, 1.0 / kMaxCode);
      stage.layers.push_back(ConvLayer{std::move(w), b.stride, b.pad});
      stage.layers.push_back(ThresholdLayer{std::move(t), 1.0 / kMaxCode});
      if (b.pool) {
        activations = maxpool2d(activations, b.pool->kernel, b.pool->stride);
        stage.layers.push_back(*b.pool);
      }
      const Shape4& as = activations.shape();
      shape = {as.c, as.h, as.w};
    }
    stage.flops = stage_flops(stage.layers, stage_in);
    stages.push_back(std::move(stage));

    head.push_back(GlobalAvgPoolLayer{});
    head.push_back(FullyConnectedLayer{random_weights({recipe.num_classes, shape.c, 1, 1}, rng),
                                       std::vector<float>(recipe.num_classes, 0.0f)});
  }

  StageSpec head_stage;
  head_stage.id = kHeadStageId;
  head_stage.config_ms = 0.0;
  head_stage.flops = 0;
  for (std::size_t i = 0; i + 1 < head.size(); i += 2) {
    head_stage.flops += stage_flops(std::span(head).subspan(i, 2),
                                    ImageShape{std::get<FullyConnectedLayer>(head[i + 1])
                                                   .weights.shape()
                                                   .in,
                                               1, 1});
  }
  head_stage.layers = std::move(head);
  stages.push_back(std::move(head_stage));
  return StagedModel(recipe.num_classes, recipe.input, std::move(stages));
}

}  // namespace qcascade
