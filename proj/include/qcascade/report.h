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

#ifndef QCASCADE_REPORT_H_
#define QCASCADE_REPORT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcascade/pipeline.h"

namespace qcascade {

struct RunMetadata {
  std::string model_hash;
  std::string dataset;
  GateConfig gate;
  std::size_t batch_size = 0;
  RunMode mode = RunMode::kFpgaSim;
  bool force_full = false;
  std::string isa;
};

// Self-contained run report: metadata, summary, per-image predictions and the
// simulated timeline (null in compute-only mode). Accuracy is omitted when
// the run had no labels.
std::string report_to_json(const RunMetadata& meta, const InferenceResult& result);

// stage,exit_count,stop_ratio,survivors,flops
std::string stage_summary_csv(const InferenceResult& result);

// gamma,accuracy,forwarded_fraction,flops_fraction,throughput. Absent values
// are empty fields; reals are written with 17 significant digits so that
// parsing recovers them exactly.
std::string sweep_to_csv(std::span<const SweepRow> rows);
std::vector<SweepRow> sweep_from_csv(std::string_view text);

}  // namespace qcascade

#endif  // QCASCADE_REPORT_H_
