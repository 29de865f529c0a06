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

#ifndef QCASCADE_RECONFIG_SIM_H_
#define QCASCADE_RECONFIG_SIM_H_

// Deterministic cost model of an MPSoC with a static region (shared head,
// interfaces) and one partially reconfigurable slot that holds one conv stage
// at a time.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcascade/staged_model.h"

namespace qcascade {

enum class SimMode { kFpga, kCpu };

std::string_view sim_mode_name(SimMode mode);

struct Resources {
  std::uint64_t bram = 0;
  std::uint64_t dsp = 0;
  std::uint64_t ff = 0;
};

struct StageResources {
  std::uint32_t stage_id = 0;
  Resources used;
};

struct ResourceViolation {
  std::uint32_t stage_id = 0;
  std::string resource;  // "bram", "dsp" or "ff"
  std::uint64_t used = 0;
  std::uint64_t available = 0;

  friend bool operator==(const ResourceViolation&, const ResourceViolation&) = default;
};

class DeviceModel {
 public:
  DeviceModel(Resources totals, std::vector<StageResources> stages);

  // Zynq XC7Z020 totals with the measured utilisation of parts 1-4.
  static DeviceModel zynq7020();

  const Resources& totals() const { return totals_; }
  const std::vector<StageResources>& stages() const { return stages_; }

  std::optional<std::uint32_t> loaded_stage() const { return slot_; }
  // Returns true when a bitstream swap was needed.
  bool configure(std::uint32_t stage_id);

 private:
  Resources totals_;
  std::vector<StageResources> stages_;
  std::optional<std::uint32_t> slot_;
};

// Every stage whose bram, dsp or ff exceeds the device totals.
std::vector<ResourceViolation> validate_resources(const DeviceModel& device);

enum class EventKind { kConfigure, kExecute };

struct TimelineEvent {
  EventKind kind = EventKind::kExecute;
  std::uint32_t stage_id = 0;
  std::uint64_t images = 0;  // 0 for configure events
  double start_ms = 0.0;
  double duration_ms = 0.0;
};

struct SimReport {
  SimMode mode = SimMode::kFpga;
  std::uint64_t batch = 0;
  std::vector<TimelineEvent> events;
  double total_ms = 0.0;
  double throughput_imgs_per_s = 0.0;
  std::vector<std::uint32_t> stage_ids;
  std::vector<std::uint64_t> survivors;  // images evaluated per conv stage
  std::vector<std::uint64_t> stage_flops;
  double flops_fraction = 0.0;
  double cpu_baseline_ms = 0.0;  // every image through every stage on the CPU
};

struct SimOptions {
  // Added to each image's execution time at every visited stage.
  double gate_cost_ms_per_image = 0.0;
  // Replaces every stage's config_ms when set.
  std::optional<double> config_ms_override;
};

// FPGA: each stage with survivors is configured once and then run on its
// survivors, in ascending stage order. CPU: execution only. Throws
// std::invalid_argument for a zero batch, survivors[0] != batch, increasing
// survivors or a length mismatch with `stages`.
SimReport simulate_batch(std::span<const StageSpec> stages,
                         std::span<const std::uint64_t> survivors, std::uint64_t batch,
                         SimMode mode, const SimOptions& options = {});

// sum_s survivors[s] flops[s] / (batch sum_s flops[s]).
double computation_fraction(std::span<const std::uint64_t> survivors,
                            std::span<const std::uint64_t> flops, std::uint64_t batch);

// Concatenates consecutive batch reports into one timeline.
SimReport combine_reports(std::span<const SimReport> reports);

std::string sim_report_to_json(const SimReport& report, int indent = 2);
// One row per stage: stage,survivors,config_ms,exec_ms,flops.
std::string sim_report_to_csv(const SimReport& report);

}  // namespace qcascade

#endif  // QCASCADE_RECONFIG_SIM_H_
