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

#include "qcascade/report.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qcascade {
namespace {

using ojson = nlohmann::ordered_json;

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw std::invalid_argument("sweep CSV line " + std::to_string(line) + ": bad number '" +
                                field + "'");
  }
  return v;
}

}  // namespace

std::string report_to_json(const RunMetadata& meta, const InferenceResult& result) {
  ojson gate;
  gate["kind"] = gate_kind_name(meta.gate.kind);
  gate["gammas"] = meta.gate.gammas;
  gate["theta"] = meta.gate.theta;
  gate["top_n"] = meta.gate.top_n;
  gate["priority_classes"] = meta.gate.priority_classes;
  gate["desired_accuracy"] =
      meta.gate.desired_accuracy ? ojson(*meta.gate.desired_accuracy) : ojson(nullptr);
  gate["num_branches"] = meta.gate.num_branches;

  ojson j;
  j["metadata"] = {{"model_hash", meta.model_hash},
                   {"dataset", meta.dataset},
                   {"images", result.images.size()},
                   {"batch_size", meta.batch_size},
                   {"mode", run_mode_name(meta.mode)},
                   {"force_full", meta.force_full},
                   {"isa", meta.isa},
                   {"gate", gate}};
  ojson summary;
  summary["exit_counts"] = result.exit_counts;
  summary["stop_ratios"] = result.stop_ratios;
  summary["survivors"] = result.survivors;
  summary["stage_flops"] = result.stage_flops;
  summary["flops_fraction"] = result.flops_fraction;
  if (result.accuracy) summary["accuracy"] = *result.accuracy;
  j["summary"] = summary;

  ojson preds = ojson::array();
  for (const ImageResult& img : result.images) {
    preds.push_back({{"predicted", img.predicted},
                     {"exit_stage", img.exit_stage},
                     {"beta", img.beta}});
  }
  j["predictions"] = preds;
  j["sim"] = result.sim ? ojson::parse(sim_report_to_json(*result.sim, -1)) : ojson(nullptr);
  return j.dump(2) + "\n";
}

std::string stage_summary_csv(const InferenceResult& result) {
  std::ostringstream out;
  out << "stage,exit_count,stop_ratio,survivors,flops\n";
  for (std::size_t s = 0; s < result.exit_counts.size(); ++s) {
    out << s + 1 << ',' << result.exit_counts[s] << ',' << fmt_real(result.stop_ratios[s]) << ','
        << result.survivors[s] << ',' << result.stage_flops[s] << '\n';
  }
  return out.str();
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "gamma,accuracy,forwarded_fraction,flops_fraction,throughput\n";
  for (const SweepRow& r : rows) {
    out += fmt_real(r.gamma) + ',' + (r.accuracy ? fmt_real(*r.accuracy) : "") + ',' +
           fmt_real(r.forwarded_fraction) + ',' + fmt_real(r.flops_fraction) + ',' +
           (r.throughput ? fmt_real(*r.throughput) : "") + '\n';
  }
  return out;
}

std::vector<SweepRow> sweep_from_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("gamma,", 0) != 0) throw std::invalid_argument("sweep CSV: missing header");
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 5) {
      throw std::invalid_argument("sweep CSV line " + std::to_string(line_no) +
                                  ": expected 5 fields");
    }
    SweepRow r;
    r.gamma = parse_real(f[0], line_no);
    if (!f[1].empty()) r.accuracy = parse_real(f[1], line_no);
    r.forwarded_fraction = parse_real(f[2], line_no);
    r.flops_fraction = parse_real(f[3], line_no);
    if (!f[4].empty()) r.throughput = parse_real(f[4], line_no);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace qcascade
