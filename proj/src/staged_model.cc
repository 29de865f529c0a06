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

#include "qcascade/staged_model.h"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>

namespace qcascade {
namespace {

constexpr char kMagic[4] = {'A', 'H', 'Q', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void fail(ModelErrorCode code, const std::string& detail) {
  throw ModelError(code, detail);
}

enum class Domain { kCodes, kAccum, kReal, kLogits };

struct FlowState {
  ImageShape shape;
  Domain domain;
};

FlowState apply_layer(const LayerSpec& layer, FlowState s, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + " (" +
                            std::string(layer_kind_name(kind_of(layer))) + ")";
  auto require = [&](Domain d, const char* what) {
    if (s.domain != d) fail(ModelErrorCode::kShapeMismatch, where + " expects " + what);
  };
  return std::visit(
      Overloaded{
          [&](const ConvLayer& l) {
            require(Domain::kCodes, "quantized codes");
            const WeightShape& ws = l.weights.shape();
            if (ws.in != s.shape.c) {
              fail(ModelErrorCode::kShapeMismatch,
                   where + ": in_channels " + std::to_string(ws.in) +
                       " != " + std::to_string(s.shape.c));
            }
            if (l.stride == 0 || ws.out == 0 || ws.kh == 0 || ws.kw == 0 ||
                s.shape.h + 2 * l.pad < ws.kh || s.shape.w + 2 * l.pad < ws.kw) {
              fail(ModelErrorCode::kShapeMismatch, where + ": kernel does not fit");
            }
            return FlowState{{ws.out, (s.shape.h + 2 * l.pad - ws.kh) / l.stride + 1,
                              (s.shape.w + 2 * l.pad - ws.kw) / l.stride + 1},
                             Domain::kAccum};
          },
          [&](const ThresholdLayer& l) {
            require(Domain::kAccum, "accumulators");
            if (l.thresholds.channels() != s.shape.c) {
              fail(ModelErrorCode::kShapeMismatch, where + ": channel mismatch");
            }
            return FlowState{s.shape, Domain::kCodes};
          },
          [&](const MaxPoolLayer& l) {
            require(Domain::kCodes, "quantized codes");
            if (l.kernel == 0 || l.stride == 0 || l.kernel > s.shape.h ||
                l.kernel > s.shape.w) {
              fail(ModelErrorCode::kShapeMismatch, where + ": window does not fit");
            }
            return FlowState{{s.shape.c, (s.shape.h - l.kernel) / l.stride + 1,
                              (s.shape.w - l.kernel) / l.stride + 1},
                             Domain::kCodes};
          },
          [&](const GlobalAvgPoolLayer&) {
            require(Domain::kCodes, "quantized codes");
            return FlowState{{s.shape.c, 1, 1}, Domain::kReal};
          },
          [&](const FullyConnectedLayer& l) {
            require(Domain::kReal, "real features");
            const WeightShape& ws = l.weights.shape();
            if (ws.kh != 1 || ws.kw != 1 ||
                ws.in != s.shape.c * s.shape.h * s.shape.w) {
              fail(ModelErrorCode::kShapeMismatch, where + ": in_features mismatch");
            }
            if (l.bias.size() != ws.out) {
              fail(ModelErrorCode::kShapeMismatch, where + ": bias length mismatch");
            }
            return FlowState{{ws.out, 1, 1}, Domain::kLogits};
          },
      },
      layer);
}

void check_fields(const LayerSpec& layer) {
  if (const auto* t = std::get_if<ThresholdLayer>(&layer)) {
    if (!(t->out_scale > 0.0) || !std::isfinite(t->out_scale)) {
      fail(ModelErrorCode::kInvalidField, "threshold out_scale must be positive");
    }
  }
  if (const auto* f = std::get_if<FullyConnectedLayer>(&layer)) {
    for (float b : f->bias) {
      if (!std::isfinite(b)) fail(ModelErrorCode::kInvalidField, "non-finite bias");
    }
  }
}

// Little-endian byte stream helpers.
class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void size32(std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
      fail(ModelErrorCode::kInvalidField, "dimension exceeds u32");
    }
    u32(static_cast<std::uint32_t>(v));
  }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }

  void need(std::uint64_t n, const char* what) {
    if (n > remaining()) {
      fail(ModelErrorCode::kTruncated, std::string("truncated payload reading ") + what);
    }
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto b = take(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
  }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::size_t geometry_count(LayerKind kind) {
  switch (kind) {
    case LayerKind::kBinaryConv:
      return 6;  // in, out, kh, kw, stride, pad
    case LayerKind::kThresholdActivate:
      return 1;  // channels
    case LayerKind::kMaxPool:
      return 2;  // kernel, stride
    case LayerKind::kGlobalAvgPool:
      return 0;
    case LayerKind::kFullyConnected:
      return 2;  // in_features, out_features
  }
  return 0;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    fail(ModelErrorCode::kInvalidField, "layer geometry overflows");
  }
  return a * b;
}

void write_words(Writer& w, std::span<const std::uint64_t> words) {
  for (std::uint64_t v : words) w.u64(v);
}

void write_layer(Writer& w, const LayerSpec& layer) {
  w.u8(static_cast<std::uint8_t>(kind_of(layer)));
  std::visit(
      Overloaded{
          [&](const ConvLayer& l) {
            const WeightShape& s = l.weights.shape();
            w.size32(s.in);
            w.size32(s.out);
            w.size32(s.kh);
            w.size32(s.kw);
            w.size32(l.stride);
            w.size32(l.pad);
            w.u64(l.weights.packed().size() * 8);
            write_words(w, l.weights.packed());
          },
          [&](const ThresholdLayer& l) {
            w.size32(l.thresholds.channels());
            w.u64(8 + l.thresholds.values().size() * 4);
            w.f64(l.out_scale);
            for (std::int32_t v : l.thresholds.values()) w.i32(v);
          },
          [&](const MaxPoolLayer& l) {
            w.size32(l.kernel);
            w.size32(l.stride);
            w.u64(0);
          },
          [&](const GlobalAvgPoolLayer&) { w.u64(0); },
          [&](const FullyConnectedLayer& l) {
            const WeightShape& s = l.weights.shape();
            w.size32(s.in);
            w.size32(s.out);
            w.u64(l.weights.packed().size() * 8 + l.bias.size() * 4);
            write_words(w, l.weights.packed());
            for (float b : l.bias) w.f32(b);
          },
      },
      layer);
}

std::vector<std::uint64_t> read_words(Reader& r, std::size_t n) {
  std::vector<std::uint64_t> words(n);
  for (auto& v : words) v = r.u64("weights");
  return words;
}

BinaryWeights make_weights(WeightShape shape, std::vector<std::uint64_t> words) {
  try {
    return BinaryWeights(shape, std::move(words));
  } catch (const std::invalid_argument& e) {
    fail(ModelErrorCode::kInvalidField, e.what());
  }
}

LayerSpec read_layer(Reader& r) {
  const std::uint8_t raw_kind = r.u8("layer kind");
  if (raw_kind > static_cast<std::uint8_t>(LayerKind::kFullyConnected)) {
    fail(ModelErrorCode::kInvalidField, "unknown layer kind " + std::to_string(raw_kind));
  }
  const auto kind = static_cast<LayerKind>(raw_kind);
  std::uint32_t g[6] = {};
  for (std::size_t i = 0; i < geometry_count(kind); ++i) g[i] = r.u32("layer geometry");
  const std::uint64_t payload_len = r.u64("payload length");
  r.need(payload_len, "layer payload");

  auto expect_len = [&](std::uint64_t expected) {
    if (payload_len != expected) {
      fail(ModelErrorCode::kInvalidField,
           std::string(layer_kind_name(kind)) + " payload length " +
               std::to_string(payload_len) + ", expected " + std::to_string(expected));
    }
  };

  switch (kind) {
    case LayerKind::kBinaryConv: {
      const WeightShape ws{g[1], g[0], g[2], g[3]};
      const std::uint64_t bits =
          checked_mul(checked_mul(checked_mul(g[1], g[0]), g[2]), g[3]);
      const std::uint64_t words = (bits + 63) / 64;
      expect_len(checked_mul(words, 8));
      return ConvLayer{make_weights(ws, read_words(r, words)), g[4], g[5]};
    }
    case LayerKind::kThresholdActivate: {
      const std::uint64_t count = checked_mul(g[0], ThresholdParams::kSteps);
      expect_len(8 + checked_mul(count, 4));
      const double scale = r.f64("out_scale");
      std::vector<std::int32_t> values(count);
      for (auto& v : values) v = r.i32("thresholds");
      try {
        return ThresholdLayer{ThresholdParams(g[0], std::move(values)), scale};
      } catch (const std::invalid_argument& e) {
        fail(ModelErrorCode::kInvalidField, e.what());
      }
    }
    case LayerKind::kMaxPool:
      expect_len(0);
      return MaxPoolLayer{g[0], g[1]};
    case LayerKind::kGlobalAvgPool:
      expect_len(0);
      return GlobalAvgPoolLayer{};
    case LayerKind::kFullyConnected: {
      const WeightShape ws{g[1], g[0], 1, 1};
      const std::uint64_t words = (checked_mul(g[0], g[1]) + 63) / 64;
      expect_len(checked_mul(words, 8) + checked_mul(g[1], 4));
      auto weights = make_weights(ws, read_words(r, words));
      std::vector<float> bias(g[1]);
      for (auto& b : bias) b = r.f32("bias");
      return FullyConnectedLayer{std::move(weights), std::move(bias)};
    }
  }
  fail(ModelErrorCode::kInvalidField, "unknown layer kind");
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kBinaryConv:
      return "binary_conv";
    case LayerKind::kThresholdActivate:
      return "threshold_activate";
    case LayerKind::kMaxPool:
      return "maxpool";
    case LayerKind::kGlobalAvgPool:
      return "global_avgpool";
    case LayerKind::kFullyConnected:
      return "fully_connected";
  }
  return "unknown";
}

LayerKind kind_of(const LayerSpec& layer) {
  return static_cast<LayerKind>(layer.index());
}

std::string_view model_error_name(ModelErrorCode code) {
  switch (code) {
    case ModelErrorCode::kBadMagic:
      return "bad magic";
    case ModelErrorCode::kVersionMismatch:
      return "version mismatch";
    case ModelErrorCode::kTruncated:
      return "truncated payload";
    case ModelErrorCode::kShapeMismatch:
      return "shape mismatch";
    case ModelErrorCode::kInvalidField:
      return "invalid field";
    case ModelErrorCode::kTrailingBytes:
      return "trailing bytes";
  }
  return "unknown";
}

ModelError::ModelError(ModelErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(model_error_name(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code) {}

ImageShape infer_output_shape(std::span<const LayerSpec> layers, ImageShape input) {
  FlowState s{input, Domain::kCodes};
  for (std::size_t i = 0; i < layers.size(); ++i) s = apply_layer(layers[i], s, i);
  if (s.domain != Domain::kCodes) {
    fail(ModelErrorCode::kShapeMismatch, "layer list must end in quantized codes");
  }
  return s.shape;
}

StagedModel::StagedModel(std::uint32_t num_classes, ImageShape input,
                         std::vector<StageSpec> stages,
                         std::vector<std::string> class_names)
    : num_classes_(num_classes),
      input_(input),
      stages_(std::move(stages)),
      class_names_(std::move(class_names)) {
  if (num_classes_ == 0) fail(ModelErrorCode::kInvalidField, "num_classes must be positive");
  if (input_.c == 0 || input_.h == 0 || input_.w == 0) {
    fail(ModelErrorCode::kInvalidField, "input shape must be non-empty");
  }
  if (stages_.size() < 2 || stages_.size() > kMaxConvStages + 1) {
    fail(ModelErrorCode::kInvalidField,
         "expected 1-3 conv stages plus the head, got " + std::to_string(stages_.size()) +
             " stages");
  }
  if (!class_names_.empty() && class_names_.size() != num_classes_) {
    fail(ModelErrorCode::kInvalidField, "class name count != num_classes");
  }
  const std::size_t conv_count = stages_.size() - 1;
  ImageShape shape = input_;
  for (std::size_t i = 0; i < conv_count; ++i) {
    const StageSpec& s = stages_[i];
    const std::string tag = "stage " + std::to_string(s.id);
    if (s.id != i + 1) fail(ModelErrorCode::kInvalidField, "stage ids must be 1..K in order");
    if (s.flops == 0) fail(ModelErrorCode::kInvalidField, tag + ": flops must be positive");
    if (!(s.config_ms > 0) || !(s.fpga_exec_ms_per_image > 0) ||
        !(s.cpu_exec_ms_per_image > 0) || !std::isfinite(s.config_ms) ||
        !std::isfinite(s.fpga_exec_ms_per_image) || !std::isfinite(s.cpu_exec_ms_per_image)) {
      fail(ModelErrorCode::kInvalidField, tag + ": times must be positive");
    }
    if (s.layers.empty()) fail(ModelErrorCode::kShapeMismatch, tag + " has no layers");
    for (const LayerSpec& l : s.layers) {
      const LayerKind k = kind_of(l);
      if (k == LayerKind::kGlobalAvgPool || k == LayerKind::kFullyConnected) {
        fail(ModelErrorCode::kShapeMismatch, tag + ": head layers belong to stage 4");
      }
      check_fields(l);
    }
    try {
      shape = infer_output_shape(s.layers, shape);
    } catch (const ModelError& e) {
      fail(e.code(), tag + ": " + e.what());
    }
    stage_outputs_.push_back(shape);
  }

  const StageSpec& head = stages_.back();
  if (head.id != kHeadStageId) fail(ModelErrorCode::kInvalidField, "last stage must be the head (id 4)");
  if (head.config_ms != 0.0) fail(ModelErrorCode::kInvalidField, "head config_ms must be 0");
  if (!(head.fpga_exec_ms_per_image >= 0) || !(head.cpu_exec_ms_per_image >= 0)) {
    fail(ModelErrorCode::kInvalidField, "head times must be non-negative");
  }
  if (head.layers.size() != 2 * conv_count) {
    fail(ModelErrorCode::kShapeMismatch,
         "head must hold one (global_avgpool, fully_connected) pair per conv stage");
  }
  for (std::size_t i = 0; i < conv_count; ++i) {
    const LayerSpec& pool = head.layers[2 * i];
    const LayerSpec& fc = head.layers[2 * i + 1];
    if (kind_of(pool) != LayerKind::kGlobalAvgPool ||
        kind_of(fc) != LayerKind::kFullyConnected) {
      fail(ModelErrorCode::kShapeMismatch, "head pair " + std::to_string(i + 1) +
                                               " must be global_avgpool + fully_connected");
    }
    check_fields(fc);
    FlowState s{stage_outputs_[i], Domain::kCodes};
    s = apply_layer(pool, s, 2 * i);
    s = apply_layer(fc, s, 2 * i + 1);
    if (s.shape.c != num_classes_) {
      fail(ModelErrorCode::kShapeMismatch, "head classifier " + std::to_string(i + 1) +
                                               " does not output num_classes");
    }
  }
}

const StageSpec& StagedModel::conv_stage(std::uint32_t id) const {
  if (id == 0 || id > num_conv_stages()) {
    throw std::invalid_argument("no conv stage with id " + std::to_string(id));
  }
  return stages_[id - 1];
}

std::vector<StageSpec> StagedModel::conv_stages() const {
  return {stages_.begin(), stages_.end() - 1};
}

ImageShape StagedModel::stage_input_shape(std::uint32_t id) const {
  conv_stage(id);
  return id == 1 ? input_ : stage_outputs_[id - 2];
}

ImageShape StagedModel::stage_output_shape(std::uint32_t id) const {
  conv_stage(id);
  return stage_outputs_[id - 1];
}

std::span<const LayerSpec> StagedModel::head_layers(std::uint32_t id) const {
  conv_stage(id);
  return std::span(head().layers).subspan(2 * (id - 1), 2);
}

QTensor run_conv_layers(std::span<const LayerSpec> layers, const QTensor& input,
                        const kernels::KernelSet& k) {
  QTensor codes = input;
  AccumTensor acc;
  for (const LayerSpec& layer : layers) {
    std::visit(Overloaded{
                   [&](const ConvLayer& l) {
                     acc = binary_conv2d(codes, l.weights, l.stride, l.pad, k);
                   },
                   [&](const ThresholdLayer& l) {
                     codes = threshold_activate(acc, l.thresholds, l.out_scale, k);
                   },
                   [&](const MaxPoolLayer& l) { codes = maxpool2d(codes, l.kernel, l.stride); },
                   [&](const auto&) {
                     throw std::invalid_argument("run_conv_layers: head layer in conv group");
                   },
               },
               layer);
  }
  return codes;
}

Logits run_head(std::span<const LayerSpec> head, const QTensor& features,
                const kernels::KernelSet& k) {
  if (head.size() != 2 || kind_of(head[0]) != LayerKind::kGlobalAvgPool ||
      kind_of(head[1]) != LayerKind::kFullyConnected) {
    throw std::invalid_argument("run_head: expected global_avgpool + fully_connected");
  }
  const auto& fc = std::get<FullyConnectedLayer>(head[1]);
  const std::vector<double> bias(fc.bias.begin(), fc.bias.end());
  return fully_connected(global_avgpool(features), fc.weights, bias, k);
}

StageOutput forward_stage(const StagedModel& model, std::uint32_t stage_id,
                          const QTensor& input, const kernels::KernelSet& k) {
  const StageSpec& stage = model.conv_stage(stage_id);
  const ImageShape expected = model.stage_input_shape(stage_id);
  const Shape4& s = input.shape();
  if (s.c != expected.c || s.h != expected.h || s.w != expected.w) {
    throw std::invalid_argument("forward_stage: stage " + std::to_string(stage_id) +
                                " expects (" + std::to_string(expected.c) + "," +
                                std::to_string(expected.h) + "," +
                                std::to_string(expected.w) + ") input, got " + s.str());
  }
  StageOutput out;
  out.features = run_conv_layers(stage.layers, input, k);
  out.logits = run_head(model.head_layers(stage_id), out.features, k);
  out.probs = softmax(out.logits);
  return out;
}

std::uint64_t stage_flops(std::span<const LayerSpec> layers, ImageShape input) {
  std::uint64_t total = 0;
  FlowState s{input, Domain::kCodes};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const FlowState next = apply_layer(layers[i], s, i);
    if (const auto* c = std::get_if<ConvLayer>(&layers[i])) {
      const WeightShape& ws = c->weights.shape();
      total += std::uint64_t{next.shape.c} * next.shape.h * next.shape.w * ws.in * ws.kh * ws.kw;
    } else if (const auto* f = std::get_if<FullyConnectedLayer>(&layers[i])) {
      total += std::uint64_t{f->weights.shape().in} * f->weights.shape().out;
    }
    s = next;
  }
  return total;
}

std::vector<std::uint8_t> save_model(const StagedModel& model) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kFormatVersion);
  w.u32(model.num_classes());
  w.size32(model.input_shape().c);
  w.size32(model.input_shape().h);
  w.size32(model.input_shape().w);
  w.size32(model.stages().size());
  for (const StageSpec& s : model.stages()) {
    w.u32(s.id);
    w.u64(s.flops);
    w.f64(s.config_ms);
    w.f64(s.fpga_exec_ms_per_image);
    w.f64(s.cpu_exec_ms_per_image);
    w.size32(s.layers.size());
    for (const LayerSpec& l : s.layers) write_layer(w, l);
  }
  if (!model.class_names().empty()) {
    w.size32(model.class_names().size());
    for (const std::string& name : model.class_names()) {
      w.size32(name.size());
      w.bytes(name.data(), name.size());
    }
  }
  return std::move(w.buffer());
}

StagedModel load_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic),
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    fail(ModelErrorCode::kBadMagic, "");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kFormatVersion) {
    fail(ModelErrorCode::kVersionMismatch,
         "file version " + std::to_string(version) + ", supported " +
             std::to_string(kFormatVersion));
  }
  const std::uint32_t num_classes = r.u32("num_classes");
  ImageShape input;
  input.c = r.u32("input shape");
  input.h = r.u32("input shape");
  input.w = r.u32("input shape");
  const std::uint32_t stage_count = r.u32("stage count");
  if (stage_count > kMaxConvStages + 1) {
    fail(ModelErrorCode::kInvalidField, "too many stages: " + std::to_string(stage_count));
  }
  std::vector<StageSpec> stages(stage_count);
  for (StageSpec& s : stages) {
    s.id = r.u32("stage id");
    s.flops = r.u64("stage flops");
    s.config_ms = r.f64("config_ms");
    s.fpga_exec_ms_per_image = r.f64("fpga_ms");
    s.cpu_exec_ms_per_image = r.f64("cpu_ms");
    const std::uint32_t layer_count = r.u32("layer count");
    // Every layer occupies at least kind + payload length.
    r.need(std::uint64_t{layer_count} * 9, "layer descriptors");
    s.layers.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) s.layers.push_back(read_layer(r));
  }
  std::vector<std::string> names;
  if (!r.done()) {
    const std::uint32_t count = r.u32("class name count");
    if (count == 0) fail(ModelErrorCode::kInvalidField, "empty class name table");
    if (count != num_classes) fail(ModelErrorCode::kInvalidField, "class name count != num_classes");
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t len = r.u32("class name length");
      auto b = r.take(len, "class name");
      names.emplace_back(b.begin(), b.end());
    }
    if (!r.done()) {
      fail(ModelErrorCode::kTrailingBytes, std::to_string(r.remaining()) + " bytes after model");
    }
  }
  return StagedModel(num_classes, input, std::move(stages), std::move(names));
}

StagedModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_model(bytes);
}

void save_model_file(const StagedModel& model, const std::filesystem::path& path) {
  const auto bytes = save_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string model_hash(const StagedModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : save_model(model)) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qcascade
