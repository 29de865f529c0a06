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

#ifndef QCASCADE_PIPELINE_H_
#define QCASCADE_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcascade/gating.h"
#include "qcascade/kernels.h"
#include "qcascade/reconfig_sim.h"
#include "qcascade/staged_model.h"

namespace qcascade {

enum class RunMode { kFpgaSim, kCpuSim, kComputeOnly };

std::string_view run_mode_name(RunMode mode);
RunMode parse_run_mode(std::string_view name);  // "fpga", "cpu" or "compute"

struct RunConfig {
  GateConfig gate;
  std::size_t batch_size = 512;
  RunMode mode = RunMode::kFpgaSim;
  bool force_full = false;  // bypass the gate; every image runs every stage
  SimOptions sim;
  const kernels::KernelSet* kernels = nullptr;  // null selects best_kernels()
};

struct ImageResult {
  std::size_t predicted = 0;
  std::uint32_t exit_stage = 0;
  double beta = 0.0;  // confidence at the exit stage
  std::vector<double> stage_confidences;  // one per visited stage
  std::vector<Decision> decisions;        // one per gate evaluated
};

struct InferenceResult {
  std::vector<ImageResult> images;
  std::vector<std::uint64_t> exit_counts;  // per conv stage
  std::vector<double> stop_ratios;         // exit_counts / images
  std::vector<std::uint64_t> survivors;    // images evaluated per conv stage
  std::vector<std::uint64_t> stage_flops;  // conv stage + its head pair
  double flops_fraction = 0.0;
  std::optional<double> accuracy;  // present only when labels were given
  std::optional<SimReport> sim;    // absent in compute-only mode
};

// Runs the staged cascade over `images` in chunks of cfg.batch_size. Within a
// chunk every surviving image is evaluated by stage s before any image reaches
// stage s + 1; after the last stage every remaining image exits. Throws
// std::invalid_argument on an input-shape or label-count mismatch.
InferenceResult run_batch(const StagedModel& model, const QTensor& images,
                          std::optional<std::span<const std::size_t>> labels,
                          const RunConfig& cfg);

struct SweepRow {
  double gamma = 0.0;
  std::optional<double> accuracy;
  double forwarded_fraction = 0.0;  // share of images continuing past stage 1
  double flops_fraction = 0.0;
  std::optional<double> throughput;

  SweepPoint point() const { return {gamma, accuracy.value_or(0.0), forwarded_fraction}; }
};

// One run per trigger point (applied at every decision point), sorted by gamma.
std::vector<SweepRow> sweep_gamma(const StagedModel& model, const QTensor& images,
                                  std::optional<std::span<const std::size_t>> labels,
                                  std::span<const double> gammas, const RunConfig& base);

}  // namespace qcascade

#endif  // QCASCADE_PIPELINE_H_
