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

#include "distillir/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "distillir/errors.hpp"
#include "distillir/imageops.hpp"
#include "distillir/nn/optim.hpp"
#include "distillir/png_io.hpp"

namespace distillir::scorer {

std::string to_string(ScoreSource s) { return s == ScoreSource::kOracle ? "oracle" : "learned"; }

ScoreSource parse_source(const std::string& s) {
  if (s == "oracle") return ScoreSource::kOracle;
  if (s == "learned") return ScoreSource::kLearned;
  throw ConfigError("unknown scoring mode '" + s + "'");
}

std::string Resolution::to_string() const {
  if (is_full()) return "full";
  if (height == width) return std::to_string(height);
  return fmt::format("{}x{}", height, width);
}

Resolution Resolution::parse(const std::string& text) {
  if (text == "full") return full();
  try {
    const auto x = text.find('x');
    std::size_t used = 0;
    if (x == std::string::npos) {
      const int side = std::stoi(text, &used);
      if (used == text.size() && side > 0) return square(side);
    } else {
      const int h = std::stoi(text.substr(0, x));
      const int w = std::stoi(text.substr(x + 1));
      if (h > 0 && w > 0) return {h, w};
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid resolution '" + text + "'");
}

Image prepare_for_scoring(const Image& hq, Resolution resolution) {
  if (resolution.is_full()) return hq;
  if (resolution.height < 1 || resolution.width < 1) {
    throw ValidationError("scoring resolution must be positive");
  }
  const int h = std::min(resolution.height, hq.height());
  const int w = std::min(resolution.width, hq.width());
  return imageops::bilinear_downsample(hq, h, w);
}

std::vector<ComplexityScore> score_images(const std::vector<std::string>& ids,
                                          const std::vector<Image>& hq,
                                          const ScoreOptions& options) {
  if (ids.size() != hq.size()) throw ValidationError("score_images: ids and images differ in length");
  if (options.mode == ScoreSource::kLearned && options.scorer == nullptr) {
    throw ValidationError("learned scoring requires a trained scorer");
  }
  std::vector<ComplexityScore> out(ids.size());
  std::vector<double> raw(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Image small = prepare_for_scoring(hq[i], options.resolution);
    raw[i] = options.mode == ScoreSource::kOracle ? imageops::shannon_entropy(small)
                                                  : options.scorer->predict(small);
    out[i].id = ids[i];
    out[i].raw_entropy = raw[i];
    out[i].source = options.mode;
  }
  if (!raw.empty()) {
    const auto norm = imageops::min_max_normalize(raw);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].normalized = norm[i];
  }
  return out;
}

std::vector<ComplexityScore> score_corpus(const corpus::CorpusManifest& manifest,
                                          const ScoreOptions& options) {
  if (options.mode == ScoreSource::kLearned && options.scorer == nullptr) {
    throw ValidationError("learned scoring requires a trained scorer");
  }
  std::vector<ComplexityScore> out(manifest.size());
  std::vector<double> raw(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest.entries[i];
    Image hq;
    try {
      hq = read_png(manifest.resolve(e.hq_path));
    } catch (const IoError& err) {
      throw IoError("cannot score '" + e.id + "': " + err.what());
    }
    const Image small = prepare_for_scoring(hq, options.resolution);
    raw[i] = options.mode == ScoreSource::kOracle ? imageops::shannon_entropy(small)
                                                  : options.scorer->predict(small);
    out[i].id = e.id;
    out[i].raw_entropy = raw[i];
    out[i].source = options.mode;
  }
  if (!raw.empty()) {
    const auto norm = imageops::min_max_normalize(raw);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].normalized = norm[i];
  }
  return out;
}

void attach_scores(corpus::CorpusManifest& manifest, const std::vector<ComplexityScore>& scores) {
  if (scores.size() != manifest.size()) {
    throw ValidationError("attach_scores: score count does not match manifest");
  }
  std::unordered_map<std::string, double> by_id;
  for (const auto& s : scores) by_id[s.id] = s.normalized;
  for (auto& e : manifest.entries) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) throw ValidationError("attach_scores: no score for '" + e.id + "'");
    e.score = it->second;
  }
}

std::string scores_to_string(const std::vector<ComplexityScore>& scores) {
  std::string out = "id\traw_entropy\tnormalized\tsource\n";
  for (const auto& s : scores) {
    out += fmt::format("{}\t{:.17g}\t{:.17g}\t{}\n", s.id, s.raw_entropy, s.normalized,
                       to_string(s.source));
  }
  return out;
}

void save_scores(const std::vector<ComplexityScore>& scores, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write scores '" + path.string() + "'");
  out << scores_to_string(scores);
  if (!out) throw IoError("failed writing scores '" + path.string() + "'");
}

std::vector<ComplexityScore> load_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scores '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "id\traw_entropy\tnormalized\tsource") {
    throw ValidationError("scores file '" + path.string() + "' has an unexpected header");
  }
  std::vector<ComplexityScore> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    ComplexityScore s;
    std::string raw, norm, src;
    if (!std::getline(ss, s.id, '\t') || !std::getline(ss, raw, '\t') ||
        !std::getline(ss, norm, '\t') || !std::getline(ss, src, '\t')) {
      throw ValidationError("malformed scores line '" + line + "'");
    }
    s.raw_entropy = std::stod(raw);
    s.normalized = std::stod(norm);
    s.source = parse_source(src);
    out.push_back(std::move(s));
  }
  return out;
}

ScorerTrainResult train_learned_scorer(const std::vector<Image>& prepared,
                                       const ScorerTrainOptions& options) {
  if (prepared.size() < 2) throw TrainingError("scorer training needs at least 2 images");
  if (options.epochs < 0 || options.batch < 1 || !(options.lr > 0.0) ||
      !(options.holdout_fraction >= 0.0 && options.holdout_fraction < 1.0)) {
    throw ValidationError("invalid scorer training options");
  }
  std::vector<double> entropy(prepared.size());
  for (std::size_t i = 0; i < prepared.size(); ++i) entropy[i] = imageops::shannon_entropy(prepared[i]);
  const auto [lo, hi] = std::minmax_element(entropy.begin(), entropy.end());
  if (!(*hi > *lo)) throw TrainingError("scorer labels are degenerate (all entropies equal)");

  ScorerTrainResult result{LearnedScorer(options.model, options.seed), {}, {}, {}, 0.0, 0.0, {}};
  result.labels = imageops::min_max_normalize(entropy);

  std::vector<std::size_t> perm(prepared.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = substream(options.seed, "scorer.train");
  std::shuffle(perm.begin(), perm.end(), rng);
  std::size_t n_hold = static_cast<std::size_t>(std::ceil(options.holdout_fraction * prepared.size()));
  n_hold = std::min(n_hold, prepared.size() - 1);
  result.holdout_indices.assign(perm.begin(), perm.begin() + n_hold);
  result.train_indices.assign(perm.begin() + n_hold, perm.end());
  std::sort(result.holdout_indices.begin(), result.holdout_indices.end());

  LearnedScorer& model = result.scorer;
  auto holdout_loss = [&] {
    if (result.holdout_indices.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i : result.holdout_indices) {
      const double d = model.predict(prepared[i]) - result.labels[i];
      s += d * d;
    }
    return s / static_cast<double>(result.holdout_indices.size());
  };
  result.initial_holdout_loss = holdout_loss();

  nn::AdamW opt(model.parameters(), {.weight_decay = 0.0f});
  std::vector<std::size_t> order = result.train_indices;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      const std::size_t end = std::min(order.size(), start + options.batch);
      const float inv = 1.0f / static_cast<float>(end - start);
      opt.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        nn::Graph g;
        nn::Var pred = model.forward(g, prepared[i]);
        nn::Var target = g.constant(nn::Tensor::from({1, 1}, {static_cast<float>(result.labels[i])}));
        nn::Var loss = nn::mean_squared_error(g, pred, target);
        const double l = g.value(loss).item();
        if (!std::isfinite(l)) throw DivergenceError("scorer loss is not finite", static_cast<std::size_t>(epoch));
        total += l;
        g.backward(loss, nn::Tensor::scalar(inv));
      }
      opt.step(static_cast<float>(options.lr));
    }
    result.epoch_train_loss.push_back(total / static_cast<double>(order.size()));
  }
  result.final_holdout_loss = holdout_loss();
  return result;
}

ScorerTrainResult train_learned_scorer(const corpus::CorpusManifest& manifest,
                                       const ScorerTrainOptions& options) {
  std::vector<Image> prepared;
  prepared.reserve(manifest.size());
  for (const auto& e : manifest.entries) {
    Image hq;
    try {
      hq = read_png(manifest.resolve(e.hq_path));
    } catch (const IoError& err) {
      throw IoError("cannot load '" + e.id + "': " + err.what());
    }
    prepared.push_back(prepare_for_scoring(hq, options.resolution));
  }
  return train_learned_scorer(prepared, options);
}

std::size_t subset_size(std::size_t n, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("selection fraction must lie in (0, 1]");
  // The small slack keeps products such as 0.07 * 100 from rounding up.
  const double k = std::ceil(p * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 0.0)), 1, std::max<std::size_t>(n, 1));
}

std::vector<std::size_t> top_p_indices(std::span<const double> scores, double p) {
  if (scores.empty()) throw ValidationError("select_top_p: no scores");
  const std::size_t k = subset_size(scores.size(), p);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

SubsetSelection select_top_p(const std::vector<ComplexityScore>& scores, double p,
                             std::string run_id) {
  std::vector<double> values(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i].normalized)) throw ValidationError("select_top_p: non-finite score");
    values[i] = scores[i].normalized;
  }
  SubsetSelection sel;
  sel.p = p;
  sel.scores_used = std::move(run_id);
  sel.indices = top_p_indices(values, p);
  for (std::size_t i : sel.indices) sel.selected_ids.push_back(scores[i].id);
  return sel;
}

std::string SubsetSelection::to_string() const {
  std::string out;
  for (const auto& id : selected_ids) out += id + "\n";
  return out;
}

}  // namespace distillir::scorer
