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

#ifndef QCASCADE_GATING_H_
#define QCASCADE_GATING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace qcascade {

enum class GateKind { kConfidence, kEntropy };

std::string_view gate_kind_name(GateKind kind);
GateKind parse_gate_kind(std::string_view name);

// Decision-layer settings. `gammas` holds one trigger point per decision point
// (after conv stages 1..K-1); a single entry applies to every decision point.
// For the entropy gate a trigger point is an entropy threshold in nats.
struct GateConfig {
  GateKind kind = GateKind::kConfidence;
  std::vector<double> gammas{0.5};
  double theta = 0.1;       // boost added when a priority class is in top-n
  std::size_t top_n = 5;
  std::set<std::size_t> priority_classes;
  std::optional<double> desired_accuracy;
  std::size_t num_branches = 3;

  double gamma_for(std::size_t decision_point) const;  // 1-based
  // Throws std::invalid_argument when a field is out of range for a model
  // with `num_classes` classes.
  void validate(std::size_t num_classes) const;
};

enum class Action { kStop, kContinue };

struct Decision {
  Action action = Action::kStop;
  double beta = 0.0;             // confidence, or entropy for the entropy gate
  double effective_gamma = 0.0;  // trigger point after any boost
  bool boosted = false;          // a priority class is among the top-n

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Max probability. Throws std::invalid_argument on an empty vector or one
// that does not sum to 1 within 1e-6.
double confidence(std::span<const double> probs);

// Natural-log Shannon entropy with 0 ln 0 = 0.
double entropy(std::span<const double> probs);

// Indices of the n largest probabilities, ties to the lower index.
std::vector<std::size_t> top_n_classes(std::span<const double> probs, std::size_t n);

// Gate for decision point `decision_point` (1-based). The trigger point is
// raised by theta (confidence) or lowered by theta (entropy) when a priority
// class appears in the top-n, then clamped to the metric's range. Confidence:
// Continue iff beta <= gamma. Entropy: Continue iff H >= gamma.
Decision decide(std::span<const double> probs, const GateConfig& cfg,
                std::size_t decision_point = 1);

inline constexpr std::size_t kHistogramBins = 64;

struct StageCalibration {
  double gamma = 0.0;
  std::array<std::uint64_t, kHistogramBins> histogram{};
  friend bool operator==(const StageCalibration&, const StageCalibration&) = default;
};

// Confidence statistics over a calibration set. c_mean / c_std describe the
// shallowest stage; per_stage holds one entry per decision point.
struct Calibration {
  double c_mean = 0.0;
  double c_std = 0.0;
  std::vector<StageCalibration> per_stage;

  // Default trigger grid: c_mean + k c_std for k = -2, -1.5, ..., 2, clamped
  // to [0, 1] (9 points, ascending).
  std::vector<double> gamma_grid() const;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

// Mean, population standard deviation and a 64-bin histogram on [0, 1].
// The single per_stage entry has gamma = c_mean.
Calibration calibrate(std::span<const double> confidences);

// One calibration per decision point; c_mean / c_std come from the first.
Calibration calibrate_stages(const std::vector<std::vector<double>>& confidences);

std::string calibration_to_json(const Calibration& c);
Calibration calibration_from_json(std::string_view text);
void save_calibration_file(const Calibration& c, const std::filesystem::path& path);
Calibration load_calibration_file(const std::filesystem::path& path);

struct SweepPoint {
  double gamma = 0.0;
  double accuracy = 0.0;
  double forwarded_fraction = 0.0;
};

// Smallest gamma whose accuracy reaches `target`; otherwise the gamma with
// the highest accuracy (ties to the smaller gamma). `sweep` must be non-empty
// and sorted by gamma.
double trigger_from_accuracy(double target, std::span<const SweepPoint> sweep);

}  // namespace qcascade

#endif  // QCASCADE_GATING_H_
