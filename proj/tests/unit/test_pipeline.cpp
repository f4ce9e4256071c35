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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "distillir/errors.hpp"
#include "distillir/pipeline.hpp"
#include "helpers.hpp"

namespace distillir::pipeline {
namespace {

namespace fs = std::filesystem;

const fs::path kTinyConfig = fs::path(DISTILLIR_SOURCE_DIR) / "configs" / "tiny.yaml";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Tiny config shrunk further so each run takes a second or two.
PipelineConfig small_config(const fs::path& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> o{"output_dir=" + out.string(), "corpus.count=80",
                             "corpus.test_count=6", "distill.latent.enabled=false"};
  o.insert(o.end(), extra.begin(), extra.end());
  return load_config(kTinyConfig, o);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DISTILLIR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, DefaultsValidateAndRoundTripThroughYaml) {
  const PipelineConfig c = load_config("");
  EXPECT_EQ(c.selection.p, 0.02);
  EXPECT_EQ(c.distill.adjuster.depth, 8);
  const PipelineConfig back = PipelineConfig::from_json(yaml_to_json(to_yaml(c)));
  EXPECT_EQ(back.to_json(), c.to_json());
  const PipelineConfig tiny = load_config(kTinyConfig);
  EXPECT_EQ(PipelineConfig::from_json(yaml_to_json(to_yaml(tiny))).to_json(), tiny.to_json());
}

TEST(Config, ShippedConfigsLoad) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(DISTILLIR_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 2u);
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
  nlohmann::json j = load_config("").to_json();
  j["selection"]["fraction"] = 0.1;
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  EXPECT_THROW(load_config("", {"selection.p=1.5"}), ConfigError);
  EXPECT_THROW(load_config("", {"selection.p=lots"}), ConfigError);
  EXPECT_THROW(load_config("", {"training.accum_steps=3"}), ConfigError);
  EXPECT_THROW(load_config("", {"sweep.p=[0.01,0]"}), ConfigError);
  EXPECT_THROW(load_config("", {"nokey"}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), Error);
}

TEST(Config, OverridesAndEnvironment) {
  const PipelineConfig c = load_config(kTinyConfig, {"selection.p=0.1", "sweep.p=[0.01,0.02]",
                                                     "distill.adjuster.loss_mode=cosine"});
  EXPECT_EQ(c.selection.p, 0.1);
  EXPECT_EQ(c.sweep.p, (std::vector<double>{0.01, 0.02}));
  EXPECT_EQ(c.distill.adjuster.loss_mode, distill::DiscrepancyMode::kCosine);
  ::setenv(kOutputRootEnv, "/tmp/from-env", 1);
  EXPECT_EQ(load_config(kTinyConfig).output_dir, "/tmp/from-env");
  EXPECT_EQ(load_config(kTinyConfig, {"output_dir=/tmp/explicit"}).output_dir, "/tmp/explicit");
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(load_config(kTinyConfig).output_dir, "runs/tiny");
}

TEST(Config, RunIdIgnoresOutputDirectory) {
  EXPECT_EQ(run_id(small_config("/tmp/a")), run_id(small_config("/tmp/b")));
  EXPECT_NE(run_id(small_config("/tmp/a")), run_id(small_config("/tmp/a", {"seed=8"})));
}

TEST(Pipeline, SameConfigInTwoDirectoriesGivesIdenticalReports) {
  testing::TempDir dir;
  const auto a = run_pipeline(small_config(dir.path() / "a"));
  const auto b = run_pipeline(small_config(dir.path() / "b"));
  EXPECT_EQ(a.run_id, b.run_id);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a.report_dir)) {
    const fs::path other = b.report_dir / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_GE(files, 4u);
  EXPECT_TRUE(fs::exists(dir.path() / "a" / "config.resolved.yaml"));
  for (const auto& c : a.report.curves) {
    if (c.kind == diagnostics::CurveKind::kCdf) EXPECT_TRUE(diagnostics::is_valid_cdf(c)) << c.metric;
  }
}

TEST(Pipeline, StagesRunInOrderAndAreReused) {
  testing::TempDir dir;
  const auto first = run_pipeline(small_config(dir.path()));
  const std::vector<Stage> expected{Stage::kSynth, Stage::kScore, Stage::kSelect, Stage::kDistill,
                                    Stage::kTrain, Stage::kEval, Stage::kReport};
  ASSERT_EQ(first.stages.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(first.stages[i].stage, expected[i]);
  }
  for (std::size_t i = 0; i + 1 < first.stages.size(); ++i) {
    EXPECT_FALSE(first.stages[i].reused);
    EXPECT_TRUE(fs::exists(first.stages[i].dir / "DONE")) << to_string(first.stages[i].stage);
  }
  const auto second = run_pipeline(small_config(dir.path()));
  for (std::size_t i = 0; i + 1 < second.stages.size(); ++i) EXPECT_TRUE(second.stages[i].reused);
  EXPECT_EQ(second.eval.to_csv(), first.eval.to_csv());
}

TEST(Pipeline, IncompleteStageIsDiscardedAndRebuilt) {
  testing::TempDir dir;
  const auto first = run_pipeline(small_config(dir.path()), Stage::kTrain);
  const fs::path train_dir = first.stages.back().dir;
  ASSERT_EQ(first.stages.back().stage, Stage::kTrain);
  const std::string model = slurp(train_dir / "model.bin");
  fs::remove(train_dir / "DONE");
  std::ofstream(train_dir / "partial.tmp") << "leftover";
  const auto second = run_pipeline(small_config(dir.path()), Stage::kTrain);
  EXPECT_TRUE(second.stages[0].reused);
  EXPECT_FALSE(second.stages.back().reused);
  EXPECT_FALSE(fs::exists(train_dir / "partial.tmp"));
  EXPECT_EQ(slurp(train_dir / "model.bin"), model);
}

TEST(Pipeline, DisabledAdjusterMatchesSelectionOnlyTraining) {
  testing::TempDir dir;
  const auto off = run_pipeline(small_config(dir.path() / "off", {"distill.adjuster.enabled=false"}),
                                Stage::kEval);
  for (const auto& s : off.stages) EXPECT_NE(s.stage, Stage::kDistill);
  // A zero-step adjuster leaves the selected images untouched, so training
  // sees exactly the selected pairs again.
  const auto zero = run_pipeline(small_config(dir.path() / "zero", {"distill.adjuster.steps=0"}),
                                 Stage::kEval);
  EXPECT_EQ(off.eval.to_csv(), zero.eval.to_csv());
}

TEST(Pipeline, NoSelectionTrainsOnFullCorpus) {
  testing::TempDir dir;
  const auto r = run_pipeline(small_config(dir.path(), {"selection.enabled=false"}));
  const std::vector<Stage> expected{Stage::kSynth, Stage::kTrain, Stage::kEval, Stage::kReport};
  ASSERT_EQ(r.stages.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(r.stages[i].stage, expected[i]);
  const std::string summary = slurp(r.report_dir / "results_summary.csv");
  EXPECT_EQ(summary.substr(0, summary.find('\n')), "p,psnr,ssim");
  EXPECT_NE(summary.find("\nfull,"), std::string::npos);
}

TEST(Pipeline, StageFailureNamesTheStage) {
  testing::TempDir dir;
  try {
    run_pipeline(small_config(dir.path(), {"training.lr0=1e30"}));
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("train"), std::string::npos) << e.what();
  }
}

TEST(Sweep, PAxisGivesFourRowsPlusFullBaseline) {
  testing::TempDir dir;
  const auto r = run_sweep(small_config(dir.path(), {"sweep.p=[0.05,0.1,0.2,0.4]", "sweep.seeds=[7]",
                                                     "distill.adjuster.enabled=false"}));
  const report::ResultsTable* p_table = nullptr;
  for (const auto& t : r.report.tables) {
    if (t.name == "p") p_table = &t;
  }
  ASSERT_NE(p_table, nullptr);
  EXPECT_EQ(p_table->columns, (std::vector<std::string>{"p", "psnr", "ssim"}));
  ASSERT_EQ(p_table->rows.size(), 5u);
  EXPECT_EQ(p_table->rows.back()[0], "full");
  EXPECT_TRUE(fs::exists(r.report_dir / "results_p.csv"));
}

TEST(Cli, ExitCodes) {
  testing::TempDir dir;
  const std::string base = "-c " + kTinyConfig.string() + " -o " + (dir.path() / "run").string() +
                           " -s corpus.count=40 -s corpus.test_count=4";
  EXPECT_EQ(run_cli("synth " + base), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "run" / "stages"));
  EXPECT_EQ(run_cli("synth " + base + " -s selection.bogus=1"), 2);
  EXPECT_EQ(run_cli("synth " + base + " -s selection.p=2"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_NE(run_cli("train " + base + " -s training.lr0=1e30"), 0);
}

}  // namespace
}  // namespace distillir::pipeline
