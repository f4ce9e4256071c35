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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillir/corpus.hpp"
#include "distillir/distill.hpp"
#include "distillir/scorer.hpp"
#include "distillir/trainer.hpp"

namespace distillir::pipeline {

// Environment variable that, when set, replaces output_dir from the config
// file. Explicit --set output_dir=... still wins.
inline constexpr const char* kOutputRootEnv = "DISTILLIR_OUTPUT_ROOT";

struct CorpusConfig {
  std::size_t count = 2000;
  std::size_t test_count = 100;
  int size = 64;
  std::vector<corpus::MixComponent> mix = {
      {corpus::DegradationSpec::noise(25.0), 0.5},
      {corpus::DegradationSpec::parse("rain{angle=15,density=25000,intensity=0.5,length=14}"),
       0.5}};
};

struct LearnedScorerConfig {
  int epochs = 20;
  double lr = 1e-3;
  int depth = 2;
  int width = 32;
  int patch = 8;
  std::size_t train_count = 500;  // images used to fit the scorer (0 = all)
};

struct ScoringConfig {
  scorer::ScoreSource mode = scorer::ScoreSource::kOracle;
  scorer::Resolution resolution;
  LearnedScorerConfig learned;
};

struct SelectionConfig {
  bool enabled = true;
  double p = 0.02;
};

struct AdjusterStageConfig {
  bool enabled = true;
  int depth = 8;
  int width = 16;
  int steps = 100;
  double lr = 1e-4;
  double model_lr = 3e-4;
  int batch = 8;
  int patch = 32;
  distill::DiscrepancyMode loss_mode = distill::DiscrepancyMode::kKl;
  double task_weight = 1.0;
  int reference_factor = 4;  // reference sample = factor x subset size
};

struct LatentStageConfig {
  bool enabled = false;
  std::size_t count = 4;
  int steps = 10;
  double lr = 0.05;
  double latent_weight = 0.1;
  int latent_dim = 32;
  int width = 16;
  int decoder_epochs = 10;
  double decoder_lr = 2e-3;
};

struct DistillConfig {
  AdjusterStageConfig adjuster;
  LatentStageConfig latent;
};

struct TrainingConfig {
  trainer::TrainConfig train;  // seed is derived from the global seed
  int width = 16;              // restoration model width
};

struct DiagnosticsConfig {
  bool enabled = true;
  std::size_t sample = 200;  // images per distance/KDE sample
  int qq_quantiles = 50;
  int kde_points = 100;
};

struct SweepConfig {
  std::vector<double> p;
  std::vector<int> accum;
  std::vector<std::string> resolution;
  std::vector<int> adjuster_depth;  // 0 = adjuster disabled
  std::vector<std::uint64_t> seeds;
  bool include_full_baseline = true;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  CorpusConfig corpus;
  ScoringConfig scoring;
  SelectionConfig selection;
  DistillConfig distill;
  TrainingConfig training;
  DiagnosticsConfig diagnostics;
  SweepConfig sweep;

  // Fully resolved config, every key present. Stable key order.
  nlohmann::json to_json() const;
  // Strict: unknown keys and wrong types raise ConfigError; missing keys
  // keep their defaults. Values are validated.
  static PipelineConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// Parses YAML text into the JSON tree that from_json consumes.
nlohmann::json yaml_to_json(const std::string& text);

// Applies "a.b.c=value" to `tree`; the value is parsed as a YAML scalar or
// flow sequence (so "p=[0.01,0.02]" works).
void apply_override(nlohmann::json& tree, const std::string& assignment);

// Loads `path` (may be empty for all defaults), applies the output-root
// environment variable, then `overrides` in order, then validates.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

// YAML rendering of the resolved config (written into each run directory).
std::string to_yaml(const PipelineConfig& config);

}  // namespace distillir::pipeline
