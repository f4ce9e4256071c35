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
#include <span>
#include <string>
#include <vector>

#include "distillir/corpus.hpp"
#include "distillir/vit.hpp"

namespace distillir::scorer {

enum class ScoreSource { kOracle, kLearned };
std::string to_string(ScoreSource s);
ScoreSource parse_source(const std::string& s);

struct ComplexityScore {
  std::string id;
  // Oracle: luminance entropy in bits. Learned: the regressor's raw output.
  double raw_entropy = 0.0;
  double normalized = 0.0;  // min-max over the scoring run
  ScoreSource source = ScoreSource::kOracle;

  bool operator==(const ComplexityScore&) const = default;
};

// Scoring resolution. Zero dimensions mean "native resolution". Images
// smaller than the target are scored at native size (never upsampled).
struct Resolution {
  int height = 128;
  int width = 128;

  static Resolution full() { return {0, 0}; }
  static Resolution square(int side) { return {side, side}; }
  bool is_full() const noexcept { return height == 0 && width == 0; }
  std::string to_string() const;
  static Resolution parse(const std::string& text);  // "full", "128", "128x96"
};

// Bilinear downsample of a clean image to the scoring resolution.
Image prepare_for_scoring(const Image& hq, Resolution resolution);

struct ScoreOptions {
  Resolution resolution;
  ScoreSource mode = ScoreSource::kOracle;
  const LearnedScorer* scorer = nullptr;  // required for kLearned
};

// Scores already-loaded clean images (ids parallel to images).
std::vector<ComplexityScore> score_images(const std::vector<std::string>& ids,
                                          const std::vector<Image>& hq,
                                          const ScoreOptions& options);

// Loads every entry's HQ image and scores it. Read failures raise IoError
// naming the entry id.
std::vector<ComplexityScore> score_corpus(const corpus::CorpusManifest& manifest,
                                          const ScoreOptions& options);

// Copy normalized scores into the manifest's score field, matching by id.
void attach_scores(corpus::CorpusManifest& manifest,
                   const std::vector<ComplexityScore>& scores);

// Tab-separated "id raw_entropy normalized source" with a header line.
void save_scores(const std::vector<ComplexityScore>& scores,
                 const std::filesystem::path& path);
std::string scores_to_string(const std::vector<ComplexityScore>& scores);
std::vector<ComplexityScore> load_scores(const std::filesystem::path& path);

struct ScorerTrainOptions {
  ScorerConfig model;
  Resolution resolution;
  int epochs = 30;
  double lr = 1e-3;
  int batch = 16;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct ScorerTrainResult {
  LearnedScorer scorer;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> holdout_indices;
  std::vector<double> labels;  // normalized oracle entropies, all images
  double initial_holdout_loss = 0.0;
  double final_holdout_loss = 0.0;
  std::vector<double> epoch_train_loss;
};

// Regress normalized oracle entropy with the patch-attention scorer.
// `prepared` are clean images already at scoring resolution. Throws
// TrainingError when all labels are equal.
ScorerTrainResult train_learned_scorer(const std::vector<Image>& prepared,
                                       const ScorerTrainOptions& options);
ScorerTrainResult train_learned_scorer(const corpus::CorpusManifest& manifest,
                                       const ScorerTrainOptions& options);

struct SubsetSelection {
  std::vector<std::string> selected_ids;   // in rank order
  std::vector<std::size_t> indices;        // positions in the scores list
  double p = 0.0;
  std::string scores_used;                 // id of the scoring run

  std::string to_string() const;  // one id per line
};

// max(1, ceil(p * n)); p must lie in (0, 1].
std::size_t subset_size(std::size_t n, double p);

// Indices of the top-p scores, highest first; ties go to the lower index.
std::vector<std::size_t> top_p_indices(std::span<const double> scores, double p);

SubsetSelection select_top_p(const std::vector<ComplexityScore>& scores, double p,
                             std::string run_id = {});

}  // namespace distillir::scorer
