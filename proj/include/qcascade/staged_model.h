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

#ifndef QCASCADE_STAGED_MODEL_H_
#define QCASCADE_STAGED_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qcascade/kernels.h"
#include "qcascade/qlayers.h"
#include "qcascade/qtensor.h"

namespace qcascade {

// Stage ids: conv parts are numbered 1..3 from the shallowest; the shared
// classification head always has id 4.
inline constexpr std::uint32_t kHeadStageId = 4;
inline constexpr std::uint32_t kMaxConvStages = 3;

enum class LayerKind : std::uint8_t {
  kBinaryConv = 0,
  kThresholdActivate = 1,
  kMaxPool = 2,
  kGlobalAvgPool = 3,
  kFullyConnected = 4,
};

std::string_view layer_kind_name(LayerKind kind);

struct ConvLayer {
  BinaryWeights weights;  // (out, in, k, k)
  std::size_t stride = 1;
  std::size_t pad = 0;
  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct ThresholdLayer {
  ThresholdParams thresholds;
  double out_scale = 1.0 / kMaxCode;
  friend bool operator==(const ThresholdLayer&, const ThresholdLayer&) = default;
};

struct MaxPoolLayer {
  std::size_t kernel = 2;
  std::size_t stride = 2;
  friend bool operator==(const MaxPoolLayer&, const MaxPoolLayer&) = default;
};

struct GlobalAvgPoolLayer {
  friend bool operator==(const GlobalAvgPoolLayer&,
                         const GlobalAvgPoolLayer&) = default;
};

struct FullyConnectedLayer {
  BinaryWeights weights;  // (out_features, in_features, 1, 1)
  std::vector<float> bias;
  friend bool operator==(const FullyConnectedLayer&,
                         const FullyConnectedLayer&) = default;
};

using LayerSpec = std::variant<ConvLayer, ThresholdLayer, MaxPoolLayer,
                               GlobalAvgPoolLayer, FullyConnectedLayer>;

LayerKind kind_of(const LayerSpec& layer);

struct StageSpec {
  std::uint32_t id = 0;
  std::uint64_t flops = 0;  // multiply-accumulates per image
  double config_ms = 0.0;   // bitstream load time; 0 for the static head
  double fpga_exec_ms_per_image = 0.0;
  double cpu_exec_ms_per_image = 0.0;
  std::vector<LayerSpec> layers;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct ImageShape {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

enum class ModelErrorCode {
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kShapeMismatch,
  kInvalidField,
  kTrailingBytes,
};

std::string_view model_error_name(ModelErrorCode code);

// Raised by model validation and by the weight-file parser.
class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorCode code, const std::string& detail);
  ModelErrorCode code() const { return code_; }

 private:
  ModelErrorCode code_;
};

// Conv stages 1..K (K <= 3) followed by the head stage. The head holds one
// (global_avgpool, fully_connected) pair per conv stage, in stage order, so
// stages of different widths each get their own classifier.
class StagedModel {
 public:
  StagedModel() = default;
  // Validates ids, timing fields and shape composition; throws ModelError.
  StagedModel(std::uint32_t num_classes, ImageShape input,
              std::vector<StageSpec> stages,
              std::vector<std::string> class_names = {});

  std::uint32_t num_classes() const { return num_classes_; }
  const ImageShape& input_shape() const { return input_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<StageSpec>& stages() const { return stages_; }

  std::size_t num_conv_stages() const { return stages_.size() - 1; }
  const StageSpec& conv_stage(std::uint32_t id) const;
  const StageSpec& head() const { return stages_.back(); }
  std::vector<StageSpec> conv_stages() const;

  // Input/output feature shapes of a conv stage (batch dimension omitted).
  ImageShape stage_input_shape(std::uint32_t id) const;
  ImageShape stage_output_shape(std::uint32_t id) const;

  // The head's pooling + classifier for conv stage `id`.
  std::span<const LayerSpec> head_layers(std::uint32_t id) const;

  friend bool operator==(const StagedModel&, const StagedModel&) = default;

 private:
  std::uint32_t num_classes_ = 0;
  ImageShape input_{};
  std::vector<StageSpec> stages_;
  std::vector<std::string> class_names_;
  std::vector<ImageShape> stage_outputs_;
};

struct StageOutput {
  QTensor features;  // input to the next conv stage
  Logits logits;
  Probabilities probs;
};

// Runs conv stage `stage_id` on `input` and classifies its features with the
// stage's head pair.
StageOutput forward_stage(
    const StagedModel& model, std::uint32_t stage_id, const QTensor& input,
    const kernels::KernelSet& k = kernels::best_kernels());

// Applies a conv-group layer list (conv / threshold / maxpool).
QTensor run_conv_layers(std::span<const LayerSpec> layers, const QTensor& input,
                        const kernels::KernelSet& k = kernels::best_kernels());

// Applies a (global_avgpool, fully_connected) head pair.
Logits run_head(std::span<const LayerSpec> head, const QTensor& features,
                const kernels::KernelSet& k = kernels::best_kernels());

// MACs per image: conv out_elems * in_channels * kh * kw plus FC in * out.
// `input` is the shape entering the first layer.
std::uint64_t stage_flops(std::span<const LayerSpec> layers, ImageShape input);

// Shape after a layer list; throws ModelError(kShapeMismatch) when the layers
// do not compose.
ImageShape infer_output_shape(std::span<const LayerSpec> layers,
                              ImageShape input);

std::vector<std::uint8_t> save_model(const StagedModel& model);
StagedModel load_model(std::span<const std::uint8_t> bytes);

StagedModel load_model_file(const std::filesystem::path& path);
void save_model_file(const StagedModel& model,
                     const std::filesystem::path& path);

// 64-bit FNV-1a of the serialized model, as 16 hex digits.
std::string model_hash(const StagedModel& model);

}  // namespace qcascade

#endif  // QCASCADE_STAGED_MODEL_H_
