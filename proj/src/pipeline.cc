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

#include "qcascade/pipeline.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qcascade {

std::string_view run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kFpgaSim:
      return "fpga";
    case RunMode::kCpuSim:
      return "cpu";
    case RunMode::kComputeOnly:
      return "compute";
  }
  return "unknown";
}

RunMode parse_run_mode(std::string_view name) {
  if (name == "fpga") return RunMode::kFpgaSim;
  if (name == "cpu") return RunMode::kCpuSim;
  if (name == "compute") return RunMode::kComputeOnly;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

InferenceResult run_batch(const StagedModel& model, const QTensor& images,
                          std::optional<std::span<const std::size_t>> labels,
                          const RunConfig& cfg) {
  const Shape4& shape = images.shape();
  const ImageShape& in = model.input_shape();
  if (shape.c != in.c || shape.h != in.h || shape.w != in.w) {
    throw std::invalid_argument("run_batch: images " + shape.str() +
                                " do not match the model input");
  }
  if (labels && labels->size() != shape.n) {
    throw std::invalid_argument("run_batch: " + std::to_string(labels->size()) +
                                " labels for " + std::to_string(shape.n) + " images");
  }
  if (cfg.batch_size == 0) throw std::invalid_argument("run_batch: batch size must be positive");
  const std::size_t num_stages = model.num_conv_stages();
  if (!cfg.force_full) {
    GateConfig gate = cfg.gate;
    gate.num_branches = num_stages;
    gate.validate(model.num_classes());
  }
  const kernels::KernelSet& k = cfg.kernels ? *cfg.kernels : kernels::best_kernels();

  // Each visited stage also evaluates its head pair.
  std::vector<StageSpec> sim_stages = model.conv_stages();
  InferenceResult result;
  for (StageSpec& s : sim_stages) {
    s.flops += stage_flops(model.head_layers(s.id), ImageShape{model.stage_output_shape(s.id).c, 1, 1});
    s.layers.clear();
    result.stage_flops.push_back(s.flops);
  }

  result.images.resize(shape.n);
  result.exit_counts.assign(num_stages, 0);
  result.survivors.assign(num_stages, 0);
  std::vector<SimReport> reports;

  for (std::size_t begin = 0; begin < shape.n; begin += cfg.batch_size) {
    const std::size_t end = std::min(shape.n, begin + cfg.batch_size);
    std::vector<std::size_t> active(end - begin);
    std::iota(active.begin(), active.end(), begin);
    QTensor features = images.gather(active);
    std::vector<std::uint64_t> chunk_survivors(num_stages, 0);

    for (std::uint32_t stage = 1; stage <= num_stages && !active.empty(); ++stage) {
      chunk_survivors[stage - 1] = active.size();
      StageOutput out = forward_stage(model, stage, features, k);
      const bool last = stage == num_stages;
      std::vector<std::size_t> next_active;
      std::vector<std::size_t> next_rows;
      for (std::size_t row = 0; row < active.size(); ++row) {
        ImageResult& img = result.images[active[row]];
        auto probs = out.probs.row(row);
        const double beta = confidence(probs);
        img.stage_confidences.push_back(beta);
        bool stop = last;
        if (!last && !cfg.force_full) {
          Decision d = decide(probs, cfg.gate, stage);
          stop = d.action == Action::kStop;
          img.decisions.push_back(d);
        }
        if (stop) {
          img.exit_stage = stage;
          img.predicted = argmax(probs);
          img.beta = beta;
          ++result.exit_counts[stage - 1];
        } else {
          next_active.push_back(active[row]);
          next_rows.push_back(row);
        }
      }
      if (!next_active.empty()) features = out.features.gather(next_rows);
      active = std::move(next_active);
    }

    for (std::size_t s = 0; s < num_stages; ++s) result.survivors[s] += chunk_survivors[s];
    if (cfg.mode != RunMode::kComputeOnly) {
      reports.push_back(simulate_batch(sim_stages, chunk_survivors, end - begin,
                                       cfg.mode == RunMode::kFpgaSim ? SimMode::kFpga : SimMode::kCpu,
                                       cfg.sim));
    }
  }

  const double n = static_cast<double>(shape.n);
  for (std::uint64_t c : result.exit_counts) {
    result.stop_ratios.push_back(shape.n ? static_cast<double>(c) / n : 0.0);
  }
  if (shape.n > 0) {
    result.flops_fraction = computation_fraction(result.survivors, result.stage_flops, shape.n);
  }
  if (labels && shape.n > 0) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < shape.n; ++i) {
      if (result.images[i].predicted == (*labels)[i]) ++correct;
    }
    result.accuracy = static_cast<double>(correct) / n;
  }
  if (!reports.empty()) result.sim = combine_reports(reports);
  return result;
}

std::vector<SweepRow> sweep_gamma(const StagedModel& model, const QTensor& images,
                                  std::optional<std::span<const std::size_t>> labels,
                                  std::span<const double> gammas, const RunConfig& base) {
  if (gammas.empty()) throw std::invalid_argument("sweep_gamma: empty gamma list");
  std::vector<double> sorted(gammas.begin(), gammas.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SweepRow> rows;
  for (double g : sorted) {
    RunConfig cfg = base;
    cfg.force_full = false;
    cfg.gate.gammas = {g};
    const InferenceResult r = run_batch(model, images, labels, cfg);
    SweepRow row;
    row.gamma = g;
    row.accuracy = r.accuracy;
    row.flops_fraction = r.flops_fraction;
    if (images.shape().n > 0 && r.survivors.size() > 1) {
      row.forwarded_fraction =
          static_cast<double>(r.survivors[1]) / static_cast<double>(images.shape().n);
    }
    if (r.sim) row.throughput = r.sim->throughput_imgs_per_s;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcascade
