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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../oracles.h"
#include "../test_support.h"
#include "qcascade/gating.h"
#include "qcascade/model_factory.h"
#include "qcascade/pipeline.h"
#include "qcascade/reconfig_sim.h"
#include "qcascade/staged_model.h"

namespace qcascade {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<StageSpec> reference_stages() {
  return {StageSpec{1, 10'240'000, 40.0, 2.0, 98.0, {}},
          StageSpec{2, 8'600'000, 40.0, 2.0, 57.0, {}},
          StageSpec{3, 8'500'000, 40.0, 2.0, 49.0, {}}};
}

SimReport full_batch() {
  const auto stages = reference_stages();
  const std::vector<std::uint64_t> s{512, 512, 512};
  return simulate_batch(stages, s, 512, SimMode::kFpga);
}

Outcome throughput() {
  const auto t0 = std::chrono::steady_clock::now();
  const SimReport r = full_batch();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rel = std::abs(r.throughput_imgs_per_s - 160.0) / 160.0;
  return {rel <= 0.03 && secs < 1.0,
          fmt("%.1f img/s (total %.0f ms), %.2f%% from 160, %.3g s", r.throughput_imgs_per_s,
              r.total_ms, 100 * rel, secs)};
}

Outcome cpu_speedup() {
  const SimReport r = full_batch();
  const auto stages = reference_stages();
  const std::vector<std::uint64_t> one{1, 1, 1};
  const double cpu = simulate_batch(stages, one, 1, SimMode::kCpu).total_ms;
  const double speedup = cpu / (r.total_ms / 512.0);
  const double rel = std::abs(speedup - 32.0) / 32.0;
  return {rel <= 0.05 && cpu == 204.0,
          fmt("%.0f ms / %.3f ms = %.1fx, %.2f%% from 32x", cpu, r.total_ms / 512.0, speedup,
              100 * rel)};
}

Outcome adaptive_throughput() {
  const auto stages = reference_stages();
  const std::vector<std::uint64_t> s{512, 256, 128};
  const SimReport r = simulate_batch(stages, s, 512, SimMode::kFpga);
  const double rel = std::abs(r.throughput_imgs_per_s - 268.0) / 268.0;
  return {rel <= 0.01, fmt("%.1f img/s (total %.0f ms), %.2f%% from 268", r.throughput_imgs_per_s,
                           r.total_ms, 100 * rel)};
}

Outcome computation_fraction_check() {
  const std::vector<std::uint64_t> flops{10'240'000, 8'600'000, 8'500'000};
  const double frac = computation_fraction(std::vector<std::uint64_t>{512, 0, 0}, flops, 512);
  const double exact = 10.24 / 27.34;
  const bool arithmetic = std::abs(frac - exact) <= 1e-6;

  const StagedModel model = testing::toy_model(31);
  const QTensor images = random_images({256, 3, 16, 16}, 32);
  RunConfig probe;
  probe.force_full = true;
  probe.mode = RunMode::kComputeOnly;
  std::vector<double> conf;
  for (const ImageResult& img : run_batch(model, images, std::nullopt, probe).images) {
    conf.push_back(img.stage_confidences[0]);
  }
  const auto grid = calibrate(conf).gamma_grid();
  RunConfig base;
  base.gate.top_n = 1;
  base.gate.theta = 0.0;
  const auto rows = sweep_gamma(model, images, std::nullopt, grid, base);
  bool monotone = rows.size() == 9;
  std::string fracs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].flops_fraction < rows[i - 1].flops_fraction) monotone = false;
    fracs += fmt("%s%.3f", i ? " " : "", rows[i].flops_fraction);
  }
  return {arithmetic && monotone,
          fmt("part-1-only fraction %.7f vs 10.24/27.34 = %.7f; sweep [%s]", frac, exact,
              fracs.c_str())};
}

Outcome kernel_oracles() {
  std::mt19937_64 rng(2024);
  std::size_t checked = 0, mismatched = 0;
  double worst_softmax = 0.0;
  for (const kernels::KernelSet* k : testing::kernel_sets()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t kh = 1 + rng() % 3, stride = 1 + rng() % 2, pad = rng() % 2;
      const Shape4 in{1 + rng() % 2, 1 + rng() % 10, kh + rng() % 6, kh + rng() % 6};
      const QTensor x = testing::random_codes(in, rng);
      const BinaryWeights w = testing::random_weights({1 + rng() % 8, in.c, kh, kh}, rng);
      Shape4 os;
      const auto ref = oracle::conv(x, w, stride, pad, &os);
      const AccumTensor acc = binary_conv2d(x, w, stride, pad, *k);
      mismatched += !(acc.shape() == os && std::ranges::equal(acc.data(), ref));

      const ThresholdParams t = testing::random_thresholds(os.c, rng);
      mismatched += !std::ranges::equal(threshold_activate(acc, t, 1.0 / 31, *k).data(),
                                        oracle::threshold_all(ref, os, t));

      const std::size_t pk = 1 + rng() % 2;
      if (x.shape().h >= pk && x.shape().w >= pk) {
        mismatched += !(maxpool2d(x, pk, pk) == oracle::maxpool(x, pk, pk));
      }
      mismatched += !(global_avgpool(x) == oracle::avgpool(x));

      const std::size_t fin = 1 + rng() % 200, fout = 1 + rng() % 10;
      std::vector<double> feats(fin);
      for (auto& v : feats) v = static_cast<double>(rng() % 32);
      const std::vector<double> bias(fout, 1.0);
      const FloatTensor f({1, fin, 1, 1}, feats);
      const BinaryWeights fw = testing::random_weights({fout, fin, 1, 1}, rng);
      const Logits z = fully_connected(f, fw, bias, *k);
      mismatched += !std::ranges::equal(z.data(), oracle::fc(f, fw, bias));

      std::vector<double> logits(fout);
      std::normal_distribution<double> nd(0.0, 15.0);
      for (auto& v : logits) v = nd(rng);
      const Probabilities p = softmax(Logits(1, fout, logits));
      worst_softmax = std::max(
          worst_softmax, std::abs(std::accumulate(p.data().begin(), p.data().end(), 0.0) - 1.0));
      ++checked;
    }
  }
  return {mismatched == 0 && worst_softmax <= 1e-9,
          fmt("%zu instances x %zu ISA(s) x 5 layers, %zu mismatches, max |sum p - 1| = %.2e",
              checked / testing::kernel_sets().size(), testing::kernel_sets().size(), mismatched,
              worst_softmax)};
}

Outcome algorithm_equivalence() {
  const StagedModel model = testing::toy_model(41);
  RunConfig probe;
  probe.force_full = true;
  probe.mode = RunMode::kComputeOnly;
  std::vector<double> conf;
  for (const ImageResult& img :
       run_batch(model, random_images({128, 3, 16, 16}, 42), std::nullopt, probe).images) {
    conf.insert(conf.end(), img.stage_confidences.begin(), img.stage_confidences.end() - 1);
  }
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t batches = 0, images = 0, mismatches = 0, boosted = 0, mixed = 0;
  for (int b = 0; b < 110; ++b) {
    const std::size_t n = 1 + rng() % 32;
    const QTensor x = random_images({n, 3, 16, 16}, 5000 + b);
    RunConfig cfg;
    cfg.batch_size = 1 + rng() % 40;
    GateConfig& g = cfg.gate;
    g.gammas = {conf[rng() % conf.size()], conf[rng() % conf.size()]};
    g.theta = b % 4 == 0 ? 0.0 : u(rng) * 0.04;
    g.top_n = 1 + rng() % 5;
    for (int k = 0, m = 1 + static_cast<int>(rng() % 3); k < m; ++k) {
      g.priority_classes.insert(rng() % 10);
    }
    const InferenceResult r = run_batch(model, x, std::nullopt, cfg);
    std::set<std::uint32_t> exits;
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<std::size_t> one{i};
      QTensor feat = x.gather(one);
      const oracle::Route route = oracle::route_image(3, g, [&](std::uint32_t s) {
        const StageOutput out = forward_stage(model, s, feat, kernels::scalar_kernels());
        feat = out.features;
        return std::vector<double>(out.probs.row(0).begin(), out.probs.row(0).end());
      });
      mismatches += route.exit_stage != r.images[i].exit_stage ||
                    route.predicted != r.images[i].predicted;
      exits.insert(route.exit_stage);
      for (const Decision& d : r.images[i].decisions) boosted += d.boosted && g.theta > 0.0;
      ++images;
    }
    mixed += exits.size() > 1;
    ++batches;
  }
  return {mismatches == 0 && batches >= 100 && boosted > 0,
          fmt("%zu batches, %zu images, %zu mismatches; %zu batches with mixed exits, %zu "
              "boosted gate evaluations",
              batches, images, mismatches, mixed, boosted)};
}

Outcome gate_monotonicity() {
  std::mt19937_64 rng(53);
  std::size_t checks = 0, violations = 0;
  for (int b = 0; b < 200; ++b) {
    const std::size_t classes = 2 + rng() % 12;
    std::vector<std::vector<double>> probs;
    for (int i = 0; i < 64; ++i) probs.push_back(oracle::random_probs(rng, classes, 2.0));
    GateConfig g;
    g.top_n = 1 + rng() % classes;
    g.priority_classes = {rng() % classes, rng() % classes};
    for (GateKind kind : {GateKind::kConfidence, GateKind::kEntropy}) {
      g.kind = kind;
      const double span = kind == GateKind::kConfidence ? 1.0 : std::log(double(classes));
      auto continues = [&](double gamma, double theta) {
        GateConfig c = g;
        c.gammas = {gamma};
        c.theta = theta;
        std::vector<bool> out;
        for (const auto& p : probs) out.push_back(decide(p, c).action == Action::kContinue);
        return out;
      };
      auto subset = [&](const std::vector<bool>& a, const std::vector<bool>& bset) {
        for (std::size_t i = 0; i < a.size(); ++i) {
          ++checks;
          if (a[i] && !bset[i]) ++violations;
        }
      };
      std::vector<bool> prev;
      for (int step = 0; step <= 20; ++step) {
        // Walk the trigger in the direction that loosens the gate.
        const double gamma =
            kind == GateKind::kConfidence ? span * step / 20 : span * (20 - step) / 20;
        const auto base = continues(gamma, 0.0);
        if (!prev.empty()) subset(prev, base);
        subset(base, continues(gamma, 0.1));
        prev = base;
      }
    }
  }
  return {violations == 0 && checks > 0,
          fmt("%zu nesting checks over 200 random batches, %zu violations", checks, violations)};
}

Outcome serialization() {
  std::size_t round_trips = 0, failures = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const StagedModel m = testing::toy_model(seed);
    const auto bytes = save_model(m);
    const StagedModel back = load_model(bytes);
    failures += !(back == m) || save_model(back) != bytes;
    ++round_trips;
  }
  const StagedModel desk = build_random_model(resnet18_desk_recipe(100), 9);
  const auto desk_bytes = save_model(desk);
  failures += save_model(load_model(desk_bytes)) != desk_bytes;
  ++round_trips;

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> conf(2, std::vector<double>(500));
  for (auto& s : conf) {
    for (double& v : s) v = u(rng);
  }
  const std::string calib = calibration_to_json(calibrate_stages(conf));
  failures += calibration_to_json(calibration_from_json(calib)) != calib;
  ++round_trips;

  const auto good = save_model(build_random_model(toy_recipe(3, {3, 8, 8}), 4));
  std::vector<std::vector<std::uint8_t>> corrupt(3, good);
  corrupt[0][0] ^= 0xff;                                       // magic
  corrupt[1][4] = 7;                                           // version
  corrupt[2].resize(good.size() - 5);                          // truncated
  auto named = save_model(StagedModel(3, {3, 8, 8}, load_model(good).stages(), {"a", "b", "c"}));
  named.push_back(0);                                          // trailing
  corrupt.push_back(named);
  std::set<ModelErrorCode> codes;
  std::string names;
  for (const auto& bytes : corrupt) {
    try {
      load_model(bytes);
    } catch (const ModelError& e) {
      codes.insert(e.code());
      names += std::string(names.empty() ? "" : ", ") + std::string(model_error_name(e.code()));
    }
  }
  return {failures == 0 && codes.size() == corrupt.size(),
          fmt("%zu byte-exact round trips, %zu failures; corruptions -> %s", round_trips,
              failures, names.c_str())};
}

}  // namespace
}  // namespace qcascade

int main() {
  using namespace qcascade;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"full-batch throughput", throughput},
      {"CPU speedup", cpu_speedup},
      {"adaptive-throughput consistency", adaptive_throughput},
      {"computation-fraction arithmetic", computation_fraction_check},
      {"kernel oracle equivalence", kernel_oracles},
      {"batched routing equals per-image cascade", algorithm_equivalence},
      {"gate monotonicity", gate_monotonicity},
      {"serialization", serialization},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += !o.pass;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
