// Copyright 2026 The distillir Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "distillir/pipeline_config.hpp"
#include "distillir/report.hpp"
#include "distillir/trainer.hpp"

namespace distillir::pipeline {

enum class Stage { kSynth, kScore, kSelect, kDistill, kTrain, kEval, kReport };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& name);

struct StageRecord {
  Stage stage = Stage::kSynth;
  std::string key;             // content hash of the stage inputs
  std::filesystem::path dir;   // <output_dir>/stages/<stage>-<key>
  bool reused = false;         // completed output found and reused
};

struct PipelineResult {
  std::string run_id;
  std::vector<StageRecord> stages;  // in execution order, skipped stages omitted
  trainer::EvalTable eval;          // empty unless the eval stage ran
  report::RunReport report;         // populated when the report stage ran
  std::filesystem::path report_dir;
};

// Identifier of a config: hash of the resolved config without output_dir
// and sweep axes.
std::string run_id(const PipelineConfig& config);

// Runs synth -> score -> select -> distill -> train -> eval -> report up to
// and including `until`. Stages whose inputs are unchanged and whose
// output directory carries a DONE marker are reused; an output directory
// without the marker is deleted and rebuilt. Scoring and selection are
// skipped when selection is disabled, distillation when both the adjuster
// and latent synthesis are disabled (or selection is). Any stage failure
// is rethrown as StageError naming the stage.
PipelineResult run_pipeline(const PipelineConfig& config, Stage until = Stage::kReport);

struct SweepResult {
  report::RunReport report;
  std::filesystem::path report_dir;
};

// One pipeline run (through eval) per value of each non-empty sweep axis
// and per seed, varying that axis alone from the base config. Each axis
// yields a table of seed-averaged PSNR/SSIM; the p axis gets an extra
// "full" row trained on the whole corpus when include_full_baseline is set.
SweepResult run_sweep(const PipelineConfig& config);

}  // namespace distillir::pipeline
