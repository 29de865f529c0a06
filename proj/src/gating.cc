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

#include "qcascade/gating.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qcascade {
namespace {

void check_probs(std::span<const double> probs, const char* who) {
  if (probs.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty probability vector");
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (!(std::abs(total - 1.0) <= 1e-6)) {
    throw std::invalid_argument(std::string(who) + ": probabilities sum to " +
                                std::to_string(total));
  }
}

}  // namespace

std::string_view gate_kind_name(GateKind kind) {
  return kind == GateKind::kConfidence ? "confidence" : "entropy";
}

GateKind parse_gate_kind(std::string_view name) {
  if (name == "confidence") return GateKind::kConfidence;
  if (name == "entropy") return GateKind::kEntropy;
  throw std::invalid_argument("unknown gate kind '" + std::string(name) + "'");
}

double GateConfig::gamma_for(std::size_t decision_point) const {
  if (gammas.empty()) throw std::invalid_argument("GateConfig: no trigger points");
  if (gammas.size() == 1) return gammas.front();
  if (decision_point == 0 || decision_point > gammas.size()) {
    throw std::invalid_argument("GateConfig: no trigger point for decision point " +
                                std::to_string(decision_point));
  }
  return gammas[decision_point - 1];
}

void GateConfig::validate(std::size_t num_classes) const {
  if (gammas.empty()) throw std::invalid_argument("gate: at least one trigger point required");
  if (num_branches == 0) throw std::invalid_argument("gate: num_branches must be positive");
  if (gammas.size() != 1 && gammas.size() + 1 < num_branches) {
    throw std::invalid_argument("gate: need one trigger point per decision point");
  }
  for (double g : gammas) {
    if (std::isnan(g)) throw std::invalid_argument("gate: NaN trigger point");
    if (kind == GateKind::kConfidence && (g < 0.0 || g > 1.0)) {
      throw std::invalid_argument("gate: confidence trigger point must lie in [0, 1]");
    }
    if (kind == GateKind::kEntropy && g < 0.0) {
      throw std::invalid_argument("gate: entropy threshold must be non-negative");
    }
  }
  if (!(theta >= 0.0)) throw std::invalid_argument("gate: theta must be non-negative");
  if (top_n == 0 || top_n > num_classes) {
    throw std::invalid_argument("gate: top_n must lie in [1, " + std::to_string(num_classes) +
                                "]");
  }
  for (std::size_t c : priority_classes) {
    if (c >= num_classes) throw std::invalid_argument("gate: priority class out of range");
  }
  if (desired_accuracy && !(*desired_accuracy > 0.0 && *desired_accuracy <= 1.0)) {
    throw std::invalid_argument("gate: desired accuracy must lie in (0, 1]");
  }
}

double confidence(std::span<const double> probs) {
  check_probs(probs, "confidence");
  return *std::max_element(probs.begin(), probs.end());
}

double entropy(std::span<const double> probs) {
  check_probs(probs, "entropy");
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<std::size_t> top_n_classes(std::span<const double> probs, std::size_t n) {
  if (n > probs.size()) {
    throw std::invalid_argument("top_n " + std::to_string(n) + " exceeds class count " +
                                std::to_string(probs.size()));
  }
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  idx.resize(n);
  return idx;
}

Decision decide(std::span<const double> probs, const GateConfig& cfg,
                std::size_t decision_point) {
  if (cfg.top_n == 0 || cfg.top_n > probs.size()) {
    throw std::invalid_argument("decide: top_n " + std::to_string(cfg.top_n) +
                                " out of range for " + std::to_string(probs.size()) +
                                " classes");
  }
  Decision d;
  for (std::size_t c : top_n_classes(probs, cfg.top_n)) {
    if (cfg.priority_classes.contains(c)) {
      d.boosted = true;
      break;
    }
  }
  const double gamma = cfg.gamma_for(decision_point);
  if (cfg.kind == GateKind::kConfidence) {
    d.beta = confidence(probs);
    d.effective_gamma = std::clamp(d.boosted ? gamma + cfg.theta : gamma, 0.0, 1.0);
    d.action = d.beta <= d.effective_gamma ? Action::kContinue : Action::kStop;
  } else {
    d.beta = entropy(probs);
    const double max_entropy = std::log(static_cast<double>(probs.size()));
    d.effective_gamma =
        std::clamp(d.boosted ? gamma - cfg.theta : gamma, 0.0, std::max(max_entropy, 0.0));
    d.action = d.beta >= d.effective_gamma ? Action::kContinue : Action::kStop;
  }
  return d;
}

std::vector<double> Calibration::gamma_grid() const {
  std::vector<double> grid;
  for (int i = -4; i <= 4; ++i) {
    grid.push_back(std::clamp(c_mean + 0.5 * i * c_std, 0.0, 1.0));
  }
  return grid;
}

Calibration calibrate(std::span<const double> confidences) {
  if (confidences.empty()) {
    throw std::invalid_argument("calibrate: empty confidence list");
  }
  StageCalibration stage;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double b : confidences) {
    if (!(b >= 0.0 && b <= 1.0)) {
      throw std::invalid_argument("calibrate: confidence outside [0, 1]");
    }
    ++n;
    const double delta = b - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (b - mean);
    const auto bin = std::min(static_cast<std::size_t>(b * kHistogramBins), kHistogramBins - 1);
    ++stage.histogram[bin];
  }
  Calibration c;
  c.c_mean = mean;
  c.c_std = std::sqrt(std::max(m2 / static_cast<double>(n), 0.0));
  stage.gamma = mean;
  c.per_stage.push_back(stage);
  return c;
}

Calibration calibrate_stages(const std::vector<std::vector<double>>& confidences) {
  if (confidences.empty()) throw std::invalid_argument("calibrate_stages: no stages");
  Calibration out;
  for (std::size_t s = 0; s < confidences.size(); ++s) {
    Calibration c = calibrate(confidences[s]);
    if (s == 0) {
      out.c_mean = c.c_mean;
      out.c_std = c.c_std;
    }
    out.per_stage.push_back(c.per_stage.front());
  }
  return out;
}

std::string calibration_to_json(const Calibration& c) {
  nlohmann::json j;
  j["c_mean"] = c.c_mean;
  j["c_std"] = c.c_std;
  j["per_stage"] = nlohmann::json::array();
  for (const StageCalibration& s : c.per_stage) {
    j["per_stage"].push_back({{"gamma", s.gamma}, {"histogram", s.histogram}});
  }
  return j.dump(2) + "\n";
}

Calibration calibration_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("calibration: malformed JSON: ") + e.what());
  }
  Calibration c;
  try {
    c.c_mean = j.at("c_mean").get<double>();
    c.c_std = j.at("c_std").get<double>();
    for (const auto& s : j.at("per_stage")) {
      StageCalibration sc;
      sc.gamma = s.at("gamma").get<double>();
      const auto& h = s.at("histogram");
      if (!h.is_array() || h.size() != kHistogramBins) {
        throw std::invalid_argument("calibration: histogram must have 64 bins");
      }
      for (std::size_t i = 0; i < kHistogramBins; ++i) sc.histogram[i] = h[i].get<std::uint64_t>();
      c.per_stage.push_back(sc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("calibration: ") + e.what());
  }
  if (!(c.c_mean >= 0.0 && c.c_mean <= 1.0) || !(c.c_std >= 0.0)) {
    throw std::invalid_argument("calibration: c_mean must lie in [0, 1] and c_std >= 0");
  }
  return c;
}

void save_calibration_file(const Calibration& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << calibration_to_json(c);
}

Calibration load_calibration_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return calibration_from_json(ss.str());
}

double trigger_from_accuracy(double target, std::span<const SweepPoint> sweep) {
  if (sweep.empty()) throw std::invalid_argument("trigger_from_accuracy: empty sweep");
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (sweep[i].gamma < sweep[i - 1].gamma) {
      throw std::invalid_argument("trigger_from_accuracy: sweep not sorted by gamma");
    }
  }
  for (const SweepPoint& p : sweep) {
    if (p.accuracy >= target) return p.gamma;
  }
  const SweepPoint* best = &sweep.front();
  for (const SweepPoint& p : sweep) {
    if (p.accuracy > best->accuracy) best = &p;
  }
  return best->gamma;
}

}  // namespace qcascade
