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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcascade/dataset.h"
#include "qcascade/gating.h"
#include "qcascade/kernels.h"
#include "qcascade/model_factory.h"
#include "qcascade/pipeline.h"
#include "qcascade/reconfig_sim.h"
#include "qcascade/report.h"
#include "qcascade/staged_model.h"

namespace {

using namespace qcascade;

// Thrown for flag combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GateFlags {
  std::string kind = "confidence";
  std::vector<double> gammas;
  double theta = 0.1;
  std::size_t top_n = 5;
  std::vector<std::size_t> priority;
  std::optional<double> lambda;
};

struct DataFlags {
  std::string model;
  std::string data;
  std::string dataset = "cifar10";
};

struct RunFlags {
  std::size_t batch = 512;
  std::string mode = "fpga";
  std::optional<double> config_ms;
  double gate_cost = 0.0;
  std::string isa = "auto";
  bool force_full = false;
};

void add_gate_flags(CLI::App* app, GateFlags& g) {
  app->add_option("--gate", g.kind, "confidence or entropy")
      ->check(CLI::IsMember({"confidence", "entropy"}));
  app->add_option("--gamma", g.gammas, "trigger point(s), one per decision point")->delimiter(',');
  app->add_option("--theta", g.theta, "priority boost");
  app->add_option("--top-n", g.top_n, "top-n window for priority classes");
  app->add_option("--priority", g.priority, "priority class indices")->delimiter(',');
}

void add_data_flags(CLI::App* app, DataFlags& d, bool data_required) {
  app->add_option("--model", d.model, "weight file")->required();
  auto* data = app->add_option("--data", d.data, "dataset file");
  if (data_required) data->required();
  app->add_option("--dataset", d.dataset, "cifar10, cifar100 or raw")
      ->check(CLI::IsMember({"cifar10", "cifar100", "raw"}));
}

void add_run_flags(CLI::App* app, RunFlags& r) {
  app->add_option("--batch", r.batch, "images per batch")->check(CLI::PositiveNumber);
  app->add_option("--mode", r.mode, "fpga, cpu or compute")
      ->check(CLI::IsMember({"fpga", "cpu", "compute"}));
  app->add_option("--config-ms", r.config_ms, "override every stage's configuration time")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--gate-cost", r.gate_cost, "gate cost per image and stage (ms)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--isa", r.isa, "kernel variant: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
}

GateConfig make_gate(const GateFlags& g) {
  GateConfig cfg;
  cfg.kind = parse_gate_kind(g.kind);
  if (!g.gammas.empty()) cfg.gammas = g.gammas;
  cfg.theta = g.theta;
  cfg.top_n = g.top_n;
  cfg.priority_classes = {g.priority.begin(), g.priority.end()};
  cfg.desired_accuracy = g.lambda;
  return cfg;
}

const kernels::KernelSet& pick_kernels(const std::string& isa) {
  if (isa == "scalar") return kernels::kernels_for(kernels::Isa::kScalar);
  if (isa == "avx2") return kernels::kernels_for(kernels::Isa::kAvx2);
  return kernels::best_kernels();
}

RunConfig make_run_config(const GateFlags& g, const RunFlags& r) {
  RunConfig cfg;
  cfg.gate = make_gate(g);
  cfg.batch_size = r.batch;
  cfg.mode = parse_run_mode(r.mode);
  cfg.force_full = r.force_full;
  cfg.sim.gate_cost_ms_per_image = r.gate_cost;
  cfg.sim.config_ms_override = r.config_ms;
  cfg.kernels = &pick_kernels(r.isa);
  return cfg;
}

std::optional<std::span<const std::size_t>> labels_of(const Dataset& d) {
  if (!d.has_labels) return std::nullopt;
  return std::span<const std::size_t>(d.labels);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<double> parse_range(const std::string& spec) {
  double lo = 0, hi = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo) {
    throw UsageError("--config-sweep expects min:max:step with step > 0, got '" + spec + "'");
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>((hi - lo) / step + 1e-9);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

// Measured part timings and operation counts of the desk model's hardware
// counterpart.
std::vector<StageSpec> default_sim_stages() {
  return {StageSpec{1, 10'240'000, 40.0, 2.0, 98.0, {}},
          StageSpec{2, 8'600'000, 40.0, 2.0, 57.0, {}},
          StageSpec{3, 8'500'000, 40.0, 2.0, 49.0, {}}};
}

std::vector<StageSpec> sim_stages_of(const StagedModel& model) {
  std::vector<StageSpec> stages = model.conv_stages();
  for (StageSpec& s : stages) {
    s.flops += stage_flops(model.head_layers(s.id),
                           ImageShape{model.stage_output_shape(s.id).c, 1, 1});
    s.layers.clear();
  }
  return stages;
}

int cmd_init_model(std::uint32_t classes, std::uint64_t seed, const std::string& arch,
                   const std::string& out) {
  const ModelRecipe recipe =
      arch == "toy" ? toy_recipe(classes) : resnet18_desk_recipe(classes);
  const StagedModel model = build_random_model(recipe, seed);
  save_model_file(model, out);
  nlohmann::ordered_json j;
  j["model_hash"] = model_hash(model);
  j["stages"] = model.num_conv_stages();
  for (const StageSpec& s : model.conv_stages()) j["stage_flops"].push_back(s.flops);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_gen_data(std::size_t count, std::uint64_t seed, const std::string& dataset,
                 std::size_t classes, const std::string& out) {
  const DatasetKind kind = parse_dataset_kind(dataset);
  if (kind == DatasetKind::kRaw) {
    Dataset d;
    d.images = random_images({count, 3, 32, 32}, seed);
    d.has_labels = true;
    for (std::size_t i = 0; i < count; ++i) d.labels.push_back(i % classes);
    write_file_bytes(out, write_raw(d));
  } else {
    const std::size_t limit = kind == DatasetKind::kCifar10 ? 10 : 100;
    const auto records = synthetic_cifar(count, std::min(classes, limit), seed);
    write_file_bytes(out, write_cifar(records, kind));
  }
  return 0;
}

int cmd_calibrate(const DataFlags& d, const RunFlags& r, const std::string& out) {
  const StagedModel model = load_model_file(d.model);
  const Dataset data = load_dataset_file(d.data, parse_dataset_kind(d.dataset));
  RunConfig cfg;
  cfg.batch_size = r.batch;
  cfg.mode = RunMode::kComputeOnly;
  cfg.force_full = true;
  cfg.kernels = &pick_kernels(r.isa);
  const InferenceResult res = run_batch(model, data.images, std::nullopt, cfg);
  const std::size_t points = model.num_conv_stages() > 1 ? model.num_conv_stages() - 1 : 1;
  std::vector<std::vector<double>> conf(points);
  for (const ImageResult& img : res.images) {
    for (std::size_t s = 0; s < points; ++s) conf[s].push_back(img.stage_confidences[s]);
  }
  emit(calibration_to_json(calibrate_stages(conf)), out);
  return 0;
}

int cmd_run(const DataFlags& d, GateFlags g, const RunFlags& r, const std::string& sweep_path,
            const std::string& out, const std::string& csv) {
  const StagedModel model = load_model_file(d.model);
  const Dataset data = load_dataset_file(d.data, parse_dataset_kind(d.dataset));
  if (!sweep_path.empty()) {
    if (!g.gammas.empty()) throw UsageError("--gamma and --gamma-from-sweep are exclusive");
    std::vector<SweepPoint> points;
    for (const SweepRow& row : sweep_from_csv(read_text(sweep_path))) {
      points.push_back(row.point());
    }
    if (points.empty()) throw UsageError("sweep file " + sweep_path + " has no rows");
    const double target = g.lambda.value_or(std::numeric_limits<double>::infinity());
    g.gammas = {trigger_from_accuracy(target, points)};
  } else if (g.lambda) {
    throw UsageError("--lambda needs --gamma-from-sweep");
  }
  const RunConfig cfg = make_run_config(g, r);
  const InferenceResult res = run_batch(model, data.images, labels_of(data), cfg);
  RunMetadata meta;
  meta.model_hash = model_hash(model);
  meta.dataset = d.dataset;
  meta.gate = cfg.gate;
  meta.gate.num_branches = model.num_conv_stages();
  meta.batch_size = cfg.batch_size;
  meta.mode = cfg.mode;
  meta.force_full = cfg.force_full;
  meta.isa = std::string(kernels::isa_name(cfg.kernels->isa));
  emit(report_to_json(meta, res), out);
  if (!csv.empty()) emit(stage_summary_csv(res), csv);
  return 0;
}

int cmd_sweep(const DataFlags& d, const GateFlags& g, const RunFlags& r,
              const std::vector<double>& gammas, const std::string& calibration,
              const std::string& out) {
  const StagedModel model = load_model_file(d.model);
  const Dataset data = load_dataset_file(d.data, parse_dataset_kind(d.dataset));
  std::vector<double> grid = gammas;
  if (grid.empty() && !calibration.empty()) grid = load_calibration_file(calibration).gamma_grid();
  if (grid.empty()) {
    for (int i = 0; i <= 8; ++i) grid.push_back(i / 8.0);
  }
  const RunConfig cfg = make_run_config(g, r);
  const auto rows = sweep_gamma(model, data.images, labels_of(data), grid, cfg);
  emit(sweep_to_csv(rows), out);
  return 0;
}

int cmd_simulate(const std::string& model_path, const DataFlags& d, const GateFlags& g,
                 const RunFlags& r, std::vector<std::uint64_t> survivors,
                 const std::string& config_sweep, const std::string& out,
                 const std::string& csv) {
  std::vector<StageSpec> stages = default_sim_stages();
  std::optional<StagedModel> model;
  if (!model_path.empty()) {
    model = load_model_file(model_path);
    stages = sim_stages_of(*model);
  }
  std::uint64_t batch = r.batch;
  if (!d.data.empty()) {
    if (!model) throw UsageError("--data needs --model");
    if (!survivors.empty()) throw UsageError("--survivors and --data are exclusive");
    const Dataset data = load_dataset_file(d.data, parse_dataset_kind(d.dataset));
    RunConfig cfg = make_run_config(g, r);
    cfg.mode = RunMode::kComputeOnly;
    cfg.batch_size = std::max<std::size_t>(1, data.images.shape().n);
    const InferenceResult res = run_batch(*model, data.images, std::nullopt, cfg);
    survivors = res.survivors;
    batch = data.images.shape().n;
  }
  if (survivors.empty()) survivors.assign(stages.size(), batch);
  if (survivors.size() != stages.size()) {
    throw UsageError("--survivors needs " + std::to_string(stages.size()) + " values");
  }
  if (r.mode == "compute") throw UsageError("simulate needs --mode fpga or cpu");
  const SimMode mode = r.mode == "cpu" ? SimMode::kCpu : SimMode::kFpga;
  SimOptions opts;
  opts.gate_cost_ms_per_image = r.gate_cost;
  opts.config_ms_override = r.config_ms;

  if (!config_sweep.empty()) {
    std::string table = "config_ms,total_ms,throughput\n";
    for (double c : parse_range(config_sweep)) {
      opts.config_ms_override = c;
      const SimReport rep = simulate_batch(stages, survivors, batch, mode, opts);
      char line[96];
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", c, rep.total_ms,
                    rep.throughput_imgs_per_s);
      table += line;
    }
    emit(table, out);
    return 0;
  }
  const SimReport rep = simulate_batch(stages, survivors, batch, mode, opts);
  emit(sim_report_to_json(rep) + "\n", out);
  if (!csv.empty()) emit(sim_report_to_csv(rep), csv);
  return 0;
}

int cmd_resources() {
  const DeviceModel device = DeviceModel::zynq7020();
  nlohmann::ordered_json j;
  j["totals"] = {{"bram", device.totals().bram},
                 {"dsp", device.totals().dsp},
                 {"ff", device.totals().ff}};
  j["stages"] = nlohmann::ordered_json::array();
  for (const StageResources& s : device.stages()) {
    j["stages"].push_back(
        {{"stage", s.stage_id}, {"bram", s.used.bram}, {"dsp", s.used.dsp}, {"ff", s.used.ff}});
  }
  j["violations"] = nlohmann::ordered_json::array();
  for (const ResourceViolation& v : validate_resources(device)) {
    j["violations"].push_back({{"stage", v.stage_id},
                               {"resource", v.resource},
                               {"used", v.used},
                               {"available", v.available}});
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int report_error(std::string_view code, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged quantized CNN cascade with reconfiguration simulation"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::uint32_t classes = 10;
  std::string out, csv, arch = "resnet18";

  auto* init = app.add_subcommand("init-model", "write a seeded random weight file");
  init->add_option("--out", out, "weight file")->required();
  init->add_option("--seed", seed);
  init->add_option("--classes", classes)->check(CLI::Range(2u, 1000u));
  init->add_option("--arch", arch, "resnet18 or toy")->check(CLI::IsMember({"resnet18", "toy"}));

  std::size_t count = 64;
  std::string gen_dataset = "cifar10";
  auto* gen = app.add_subcommand("gen-data", "write a seeded synthetic dataset file");
  gen->add_option("--out", out, "dataset file")->required();
  gen->add_option("--count", count);
  gen->add_option("--seed", seed);
  gen->add_option("--classes", classes)->check(CLI::Range(1u, 1000u));
  gen->add_option("--dataset", gen_dataset)->check(CLI::IsMember({"cifar10", "cifar100", "raw"}));

  DataFlags data;
  GateFlags gate;
  RunFlags run_flags;

  auto* calib = app.add_subcommand("calibrate", "collect confidence statistics");
  add_data_flags(calib, data, true);
  calib->add_option("--batch", run_flags.batch)->check(CLI::PositiveNumber);
  calib->add_option("--isa", run_flags.isa)->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  calib->add_option("--out", out, "calibration JSON (default stdout)");

  std::string sweep_path;
  auto* run = app.add_subcommand("run", "gated inference over a dataset");
  add_data_flags(run, data, true);
  add_gate_flags(run, gate);
  add_run_flags(run, run_flags);
  run->add_option("--lambda", gate.lambda, "desired accuracy, resolved against a sweep");
  run->add_option("--gamma-from-sweep", sweep_path, "sweep CSV to pick the trigger point from");
  run->add_flag("--force-full", run_flags.force_full, "bypass the gate");
  run->add_option("--out", out, "report JSON (default stdout)");
  run->add_option("--csv", csv, "per-stage summary CSV");

  std::vector<double> gammas;
  std::string calibration;
  auto* sweep = app.add_subcommand("sweep", "accuracy and cost over trigger points");
  add_data_flags(sweep, data, true);
  add_gate_flags(sweep, gate);
  add_run_flags(sweep, run_flags);
  sweep->add_option("--gammas", gammas, "trigger grid")->delimiter(',');
  sweep->add_option("--calibration", calibration, "calibration JSON supplying the grid");
  sweep->add_option("--out", out, "sweep CSV (default stdout)");

  std::string model_path, config_sweep;
  std::vector<std::uint64_t> survivors;
  auto* sim = app.add_subcommand("simulate", "reconfiguration timeline for one batch");
  sim->add_option("--model", model_path, "take stage costs from a weight file");
  sim->add_option("--data", data.data, "derive survivors by running the gate");
  sim->add_option("--dataset", data.dataset)->check(CLI::IsMember({"cifar10", "cifar100", "raw"}));
  add_gate_flags(sim, gate);
  add_run_flags(sim, run_flags);
  sim->add_option("--survivors", survivors, "images evaluated per stage")->delimiter(',');
  sim->add_option("--config-sweep", config_sweep, "min:max:step configuration times");
  sim->add_option("--out", out, "report JSON (default stdout)");
  sim->add_option("--csv", csv, "per-stage CSV");

  auto* res = app.add_subcommand("resources", "check part utilisation against the device");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    if (*init) return cmd_init_model(classes, seed, arch, out);
    if (*gen) return cmd_gen_data(count, seed, gen_dataset, classes, out);
    if (*calib) return cmd_calibrate(data, run_flags, out);
    if (*run) return cmd_run(data, gate, run_flags, sweep_path, out, csv);
    if (*sweep) return cmd_sweep(data, gate, run_flags, gammas, calibration, out);
    if (*sim) {
      return cmd_simulate(model_path, data, gate, run_flags, survivors, config_sweep, out, csv);
    }
    if (*res) return cmd_resources();
  } catch (const UsageError& e) {
    return report_error("usage", e.what());
  } catch (const ModelError& e) {
    std::string code = "model_" + std::string(model_error_name(e.code()));
    std::replace(code.begin(), code.end(), ' ', '_');
    return report_error(code, e.what());
  } catch (const DatasetError& e) {
    return report_error("dataset", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error("invalid_argument", e.what());
  } catch (const std::exception& e) {
    return report_error("runtime", e.what());
  }
  return 0;
}
