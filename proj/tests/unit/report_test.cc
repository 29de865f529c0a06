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

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_support.h"

namespace qcascade {
namespace {

TEST(SweepCsv, RoundTripsExactly) {
  std::vector<SweepRow> rows(3);
  rows[0] = {0.1, 0.123456789012345678, 0.0, 1.0 / 3.0, 468.75};
  rows[1] = {0.45, std::nullopt, 0.5, 0.7, std::nullopt};
  rows[2] = {1.0, 0.9, 1.0, 1.0, 160.40100250626566};
  const std::string csv = sweep_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "gamma,accuracy,forwarded_fraction,flops_fraction,throughput");
  const auto back = sweep_from_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].gamma, rows[i].gamma);
    EXPECT_EQ(back[i].accuracy, rows[i].accuracy);
    EXPECT_EQ(back[i].forwarded_fraction, rows[i].forwarded_fraction);
    EXPECT_EQ(back[i].flops_fraction, rows[i].flops_fraction);
    EXPECT_EQ(back[i].throughput, rows[i].throughput);
  }
  EXPECT_EQ(sweep_to_csv(back), csv);
}

TEST(SweepCsv, RejectsMalformedInput) {
  EXPECT_THROW(sweep_from_csv("a,b\n1,2\n"), std::invalid_argument);
  EXPECT_THROW(sweep_from_csv("gamma,accuracy,forwarded_fraction,flops_fraction,throughput\n"
                              "0.5,0.9,0.1\n"),
               std::invalid_argument);
  EXPECT_THROW(sweep_from_csv("gamma,accuracy,forwarded_fraction,flops_fraction,throughput\n"
                              "x,0.9,0.1,0.2,3\n"),
               std::invalid_argument);
  EXPECT_TRUE(sweep_from_csv("").empty());
}

TEST(ReportJson, ContainsMetadataSummaryAndTimeline) {
  const StagedModel model = testing::toy_model(2);
  const QTensor images = random_images({10, 3, 16, 16}, 3);
  const std::vector<std::size_t> labels(10, 1);
  RunConfig cfg;
  cfg.gate.gammas = {0.0};
  cfg.gate.priority_classes = {2, 5};
  const InferenceResult r = run_batch(model, images, labels, cfg);
  RunMetadata meta{model_hash(model), "raw", cfg.gate, 512, RunMode::kFpgaSim, false, "scalar"};
  const auto j = nlohmann::json::parse(report_to_json(meta, r));
  EXPECT_EQ(j["metadata"]["model_hash"], model_hash(model));
  EXPECT_EQ(j["metadata"]["images"], 10);
  EXPECT_EQ(j["metadata"]["gate"]["kind"], "confidence");
  EXPECT_EQ(j["metadata"]["gate"]["priority_classes"], (std::vector<int>{2, 5}));
  EXPECT_TRUE(j["metadata"]["gate"]["desired_accuracy"].is_null());
  EXPECT_EQ(j["summary"]["stop_ratios"], (std::vector<double>{1, 0, 0}));
  EXPECT_TRUE(j["summary"].contains("accuracy"));
  EXPECT_EQ(j["predictions"].size(), 10u);
  EXPECT_EQ(j["predictions"][0]["exit_stage"], 1);
  EXPECT_EQ(j["sim"]["batch"], 10);

  cfg.mode = RunMode::kComputeOnly;
  const auto unlabeled =
      nlohmann::json::parse(report_to_json(meta, run_batch(model, images, std::nullopt, cfg)));
  EXPECT_FALSE(unlabeled["summary"].contains("accuracy"));
  EXPECT_TRUE(unlabeled["sim"].is_null());
}

TEST(StageSummaryCsv, OneRowPerStage) {
  InferenceResult r;
  r.exit_counts = {3, 1, 0};
  r.stop_ratios = {0.75, 0.25, 0.0};
  r.survivors = {4, 1, 0};
  r.stage_flops = {100, 50, 25};
  EXPECT_EQ(stage_summary_csv(r),
            "stage,exit_count,stop_ratio,survivors,flops\n"
            "1,3,0.75,4,100\n2,1,0.25,1,50\n3,0,0,0,25\n");
}

}  // namespace
}  // namespace qcascade
