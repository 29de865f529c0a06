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

#include "qcascade/reconfig_sim.h"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qcascade {

std::string_view sim_mode_name(SimMode mode) {
  return mode == SimMode::kFpga ? "fpga" : "cpu";
}

DeviceModel::DeviceModel(Resources totals, std::vector<StageResources> stages)
    : totals_(totals), stages_(std::move(stages)) {}

DeviceModel DeviceModel::zynq7020() {
  return DeviceModel({280, 220, 106400}, {{1, {81, 120, 15672}},
                                          {2, {91, 96, 16647}},
                                          {3, {96, 96, 34069}},
                                          {4, {31, 24, 9908}}});
}

bool DeviceModel::configure(std::uint32_t stage_id) {
  if (slot_ == stage_id) return false;
  slot_ = stage_id;
  return true;
}

std::vector<ResourceViolation> validate_resources(const DeviceModel& device) {
  std::vector<ResourceViolation> out;
  const Resources& t = device.totals();
  for (const StageResources& s : device.stages()) {
    if (s.used.bram > t.bram) out.push_back({s.stage_id, "bram", s.used.bram, t.bram});
    if (s.used.dsp > t.dsp) out.push_back({s.stage_id, "dsp", s.used.dsp, t.dsp});
    if (s.used.ff > t.ff) out.push_back({s.stage_id, "ff", s.used.ff, t.ff});
  }
  return out;
}

double computation_fraction(std::span<const std::uint64_t> survivors,
                            std::span<const std::uint64_t> flops, std::uint64_t batch) {
  if (batch == 0) throw std::invalid_argument("computation_fraction: zero batch");
  if (survivors.size() != flops.size() || survivors.empty()) {
    throw std::invalid_argument("computation_fraction: survivors/flops length mismatch");
  }
  if (survivors[0] != batch) {
    throw std::invalid_argument("computation_fraction: survivors[0] must equal batch");
  }
  double done = 0.0;
  double full = 0.0;
  for (std::size_t s = 0; s < flops.size(); ++s) {
    done += static_cast<double>(survivors[s]) * static_cast<double>(flops[s]);
    full += static_cast<double>(batch) * static_cast<double>(flops[s]);
  }
  if (full == 0.0) throw std::invalid_argument("computation_fraction: zero total flops");
  return done / full;
}

SimReport simulate_batch(std::span<const StageSpec> stages,
                         std::span<const std::uint64_t> survivors, std::uint64_t batch,
                         SimMode mode, const SimOptions& options) {
  if (batch == 0) throw std::invalid_argument("simulate_batch: batch must be positive");
  if (stages.empty() || survivors.size() != stages.size()) {
    throw std::invalid_argument("simulate_batch: need one survivor count per stage");
  }
  if (survivors[0] != batch) {
    throw std::invalid_argument("simulate_batch: survivors[0] must equal the batch size");
  }
  for (std::size_t s = 1; s < survivors.size(); ++s) {
    if (survivors[s] > survivors[s - 1]) {
      throw std::invalid_argument("simulate_batch: survivors must be non-increasing");
    }
  }
  if (!(options.gate_cost_ms_per_image >= 0.0) ||
      (options.config_ms_override && !(*options.config_ms_override >= 0.0))) {
    throw std::invalid_argument("simulate_batch: costs must be non-negative");
  }

  SimReport r;
  r.mode = mode;
  r.batch = batch;
  r.survivors.assign(survivors.begin(), survivors.end());
  double clock = 0.0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StageSpec& st = stages[s];
    const double exec = mode == SimMode::kFpga ? st.fpga_exec_ms_per_image
                                               : st.cpu_exec_ms_per_image;
    const double config = options.config_ms_override.value_or(st.config_ms);
    if (!(exec > 0.0) || !(config >= 0.0)) {
      throw std::invalid_argument("simulate_batch: stage " + std::to_string(st.id) +
                                  " has non-positive execution time");
    }
    r.stage_ids.push_back(st.id);
    r.stage_flops.push_back(st.flops);
    r.cpu_baseline_ms += static_cast<double>(batch) * st.cpu_exec_ms_per_image;
    if (survivors[s] == 0) continue;
    if (mode == SimMode::kFpga) {
      r.events.push_back({EventKind::kConfigure, st.id, 0, clock, config});
      clock += config;
    }
    const double run = static_cast<double>(survivors[s]) * (exec + options.gate_cost_ms_per_image);
    r.events.push_back({EventKind::kExecute, st.id, survivors[s], clock, run});
    clock += run;
  }
  r.total_ms = clock;
  r.throughput_imgs_per_s = static_cast<double>(batch) / (r.total_ms / 1000.0);
  r.flops_fraction = computation_fraction(survivors, r.stage_flops, batch);
  return r;
}

SimReport combine_reports(std::span<const SimReport> reports) {
  if (reports.empty()) throw std::invalid_argument("combine_reports: nothing to combine");
  SimReport out;
  out.mode = reports.front().mode;
  out.stage_ids = reports.front().stage_ids;
  out.stage_flops = reports.front().stage_flops;
  out.survivors.assign(reports.front().survivors.size(), 0);
  for (const SimReport& r : reports) {
    if (r.mode != out.mode || r.survivors.size() != out.survivors.size()) {
      throw std::invalid_argument("combine_reports: incompatible reports");
    }
    for (TimelineEvent e : r.events) {
      e.start_ms += out.total_ms;
      out.events.push_back(e);
    }
    out.total_ms += r.total_ms;
    out.batch += r.batch;
    out.cpu_baseline_ms += r.cpu_baseline_ms;
    for (std::size_t s = 0; s < r.survivors.size(); ++s) out.survivors[s] += r.survivors[s];
  }
  out.throughput_imgs_per_s = static_cast<double>(out.batch) / (out.total_ms / 1000.0);
  out.flops_fraction = computation_fraction(out.survivors, out.stage_flops, out.batch);
  return out;
}

std::string sim_report_to_json(const SimReport& report, int indent) {
  nlohmann::ordered_json j;
  j["mode"] = sim_mode_name(report.mode);
  j["batch"] = report.batch;
  j["total_ms"] = report.total_ms;
  j["throughput_imgs_per_s"] = report.throughput_imgs_per_s;
  j["stage_ids"] = report.stage_ids;
  j["survivors"] = report.survivors;
  j["stage_flops"] = report.stage_flops;
  j["flops_fraction"] = report.flops_fraction;
  j["cpu_baseline_ms"] = report.cpu_baseline_ms;
  j["events"] = nlohmann::ordered_json::array();
  for (const TimelineEvent& e : report.events) {
    j["events"].push_back({{"kind", e.kind == EventKind::kConfigure ? "configure" : "execute"},
                           {"stage", e.stage_id},
                           {"images", e.images},
                           {"start_ms", e.start_ms},
                           {"duration_ms", e.duration_ms}});
  }
  return j.dump(indent);
}

std::string sim_report_to_csv(const SimReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "stage,survivors,config_ms,exec_ms,flops\n";
  for (std::size_t s = 0; s < report.survivors.size(); ++s) {
    double config = 0.0;
    double exec = 0.0;
    const std::uint32_t id = report.stage_ids[s];
    for (const TimelineEvent& e : report.events) {
      if (e.stage_id != id) continue;
      (e.kind == EventKind::kConfigure ? config : exec) += e.duration_ms;
    }
    out << id << ',' << report.survivors[s] << ',' << config << ',' << exec << ','
        << report.stage_flops[s] << '\n';
  }
  return out.str();
}

}  // namespace qcascade
