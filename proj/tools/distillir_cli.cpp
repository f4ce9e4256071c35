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

// Command-line front end: every subcommand runs the configured pipeline up
// to its stage, reusing completed stages from earlier invocations.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "distillir/errors.hpp"
#include "distillir/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string output;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "YAML config file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", o.overrides, "Override a config key, e.g. selection.p=0.05")
      ->take_all();
  cmd->add_option("-o,--output", o.output, "Output directory (overrides config and environment)");
  cmd->add_flag("--print-config", o.print_config, "Print the resolved config before running");
}

distillir::pipeline::PipelineConfig resolve(const Options& o) {
  std::vector<std::string> overrides = o.overrides;
  if (!o.output.empty()) overrides.push_back("output_dir=\"" + o.output + "\"");
  auto config = distillir::pipeline::load_config(o.config, overrides);
  if (o.print_config) fmt::print("{}", distillir::pipeline::to_yaml(config));
  return config;
}

int run_stage(const Options& o, distillir::pipeline::Stage stage) {
  using namespace distillir::pipeline;
  const auto result = run_pipeline(resolve(o), stage);
  for (const auto& s : result.stages) {
    fmt::print("{:<8} {} {}\n", to_string(s.stage), s.reused ? "reused" : "done  ",
               s.dir.generic_string());
  }
  if (!result.eval.rows.empty()) {
    fmt::print("mean psnr {:.4f} dB, mean ssim {:.4f} over {} test pairs\n",
               result.eval.mean_psnr, result.eval.mean_ssim, result.eval.rows.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using distillir::pipeline::Stage;
  CLI::App app{"Entropy-guided dataset distillation for image restoration"};
  app.require_subcommand(1);
  Options opts;

  const std::pair<const char*, Stage> stages[] = {
      {"synth", Stage::kSynth},     {"score", Stage::kScore}, {"select", Stage::kSelect},
      {"distill", Stage::kDistill}, {"train", Stage::kTrain}, {"eval", Stage::kEval},
      {"report", Stage::kReport},   {"pipeline", Stage::kReport}};
  const char* help[] = {"Generate the synthetic train/test corpora",
                        "Score training images by complexity",
                        "Select the top-p fraction by score",
                        "Fine-tune the adjuster and synthesize latent samples",
                        "Train the restoration model on the selected/distilled pool",
                        "Evaluate on the test corpus",
                        "Emit tables and diagnostics curves",
                        "Run every stage"};
  std::vector<std::pair<CLI::App*, Stage>> commands;
  for (std::size_t i = 0; i < std::size(stages); ++i) {
    CLI::App* cmd = app.add_subcommand(stages[i].first, help[i]);
    add_common(cmd, opts);
    commands.emplace_back(cmd, stages[i].second);
  }
  CLI::App* sweep = app.add_subcommand("sweep", "Run the configured ablation sweeps");
  add_common(sweep, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors share the config-error code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sweep->parsed()) {
      const auto result = distillir::pipeline::run_sweep(resolve(opts));
      for (const auto& t : result.report.tables) {
        if (t.name == "runs") continue;
        fmt::print("{}", t.to_csv());
      }
      fmt::print("report: {}\n", result.report_dir.generic_string());
      return 0;
    }
    for (const auto& [cmd, stage] : commands) {
      if (cmd->parsed()) return run_stage(opts, stage);
    }
  } catch (const distillir::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const distillir::StageError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
