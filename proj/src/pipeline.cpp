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

#include "distillir/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "distillir/diagnostics.hpp"
#include "distillir/distill.hpp"
#include "distillir/errors.hpp"
#include "distillir/imageops.hpp"
#include "distillir/rng.hpp"
#include "distillir/scorer.hpp"

namespace distillir::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string hash_json(const json& j) { return hex(fnv1a64(j.dump())); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

// Copy of `m` whose entry paths are relative to `new_root`.
corpus::CorpusManifest rebase(const corpus::CorpusManifest& m, const fs::path& new_root) {
  corpus::CorpusManifest out = m;
  out.root = new_root;
  const fs::path abs_root = fs::absolute(new_root);
  for (auto& e : out.entries) {
    e.lq_path = fs::relative(fs::absolute(m.resolve(e.lq_path)), abs_root).generic_string();
    e.hq_path = fs::relative(fs::absolute(m.resolve(e.hq_path)), abs_root).generic_string();
  }
  return out;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  return fs::relative(fs::absolute(p), fs::absolute(base)).generic_string();
}

// Runs stage bodies in content-addressed directories.
class StageCache {
 public:
  explicit StageCache(fs::path root) : root_(std::move(root)) {}

  template <typename Body>
  StageRecord run(Stage stage, const json& inputs, Body&& body) {
    StageRecord rec;
    rec.stage = stage;
    rec.key = hash_json({{"stage", to_string(stage)}, {"inputs", inputs}});
    rec.dir = root_ / (to_string(stage) + "-" + rec.key);
    if (fs::exists(rec.dir / "DONE")) {
      rec.reused = true;
      return rec;
    }
    try {
      fs::remove_all(rec.dir);
      fs::create_directories(rec.dir);
      body(rec.dir);
      write_text(rec.dir / "DONE", rec.key + "\n");
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(to_string(stage), e.what());
    }
    return rec;
  }

 private:
  fs::path root_;
};

json config_identity(const PipelineConfig& c) {
  json j = c.to_json();
  j.erase("output_dir");
  j.erase("sweep");
  return j;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed,
                                        std::string_view name) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = substream(seed, name);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n, k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<Image> load_hq(const corpus::CorpusManifest& m, const std::vector<std::size_t>& idx) {
  std::vector<Image> out;
  for (std::size_t i : idx) out.push_back(corpus::load_pair(m, i).hq);
  return out;
}

std::vector<double> entropies(const std::vector<Image>& images) {
  std::vector<double> out;
  for (const Image& img : images) out.push_back(imageops::shannon_entropy(img));
  return out;
}

diagnostics::CurveData named(diagnostics::CurveData c, std::string metric,
                             std::vector<std::string> sources) {
  c.metric = std::move(metric);
  c.sources = std::move(sources);
  return c;
}

// --- stage bodies ------------------------------------------------------------

void synth_stage(const PipelineConfig& c, const fs::path& dir) {
  corpus::SynthOptions train{c.corpus.mix, c.corpus.count, c.corpus.size, c.corpus.size,
                             substream_seed(c.seed, "corpus.train"), "train-"};
  corpus::synth_corpus(train, dir / "train");
  corpus::SynthOptions test{c.corpus.mix, c.corpus.test_count, c.corpus.size, c.corpus.size,
                            substream_seed(c.seed, "corpus.test"), "test-"};
  corpus::synth_corpus(test, dir / "test");
}

void score_stage(const PipelineConfig& c, const fs::path& synth_dir, const fs::path& dir) {
  const auto manifest = corpus::load_manifest(synth_dir / "train" / "manifest.jsonl");
  scorer::ScoreOptions opts{c.scoring.resolution, c.scoring.mode, nullptr};
  std::optional<scorer::LearnedScorer> model;
  if (c.scoring.mode == scorer::ScoreSource::kLearned) {
    const auto& l = c.scoring.learned;
    const std::size_t n = l.train_count == 0 ? manifest.size()
                                             : std::min(l.train_count, manifest.size());
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Image> prepared;
    for (const Image& img : load_hq(manifest, idx)) {
      prepared.push_back(scorer::prepare_for_scoring(img, c.scoring.resolution));
    }
    scorer::ScorerTrainOptions to;
    to.model = {l.patch, l.depth, l.width, 2};
    to.resolution = c.scoring.resolution;
    to.epochs = l.epochs;
    to.lr = l.lr;
    to.seed = substream_seed(c.seed, "score.learned");
    model = scorer::train_learned_scorer(prepared, to).scorer;
    model->save(dir / "scorer.bin");
    opts.scorer = &*model;
  }
  scorer::save_scores(scorer::score_corpus(manifest, opts), dir / "scores.tsv");
}

void select_stage(const PipelineConfig& c, const fs::path& synth_dir, const StageRecord& score,
                  const fs::path& dir) {
  const auto manifest = corpus::load_manifest(synth_dir / "train" / "manifest.jsonl");
  const auto scores = scorer::load_scores(score.dir / "scores.tsv");
  const auto sel = scorer::select_top_p(scores, c.selection.p, score.key);
  write_text(dir / "selection.txt", sel.to_string());
  corpus::CorpusManifest subset;
  subset.seed = manifest.seed;
  subset.root = manifest.root;
  for (std::size_t rank = 0; rank < sel.selected_ids.size(); ++rank) {
    corpus::ManifestEntry e = manifest.entries[manifest.index_of(sel.selected_ids[rank])];
    e.score = scores[sel.indices[rank]].normalized;
    subset.entries.push_back(std::move(e));
  }
  corpus::save_manifest(rebase(subset, dir), dir / "manifest.jsonl");
}

void distill_stage(const PipelineConfig& c, const fs::path& synth_dir, const fs::path& select_dir,
                   const fs::path& dir) {
  const auto full = corpus::load_manifest(synth_dir / "train" / "manifest.jsonl");
  const auto subset_manifest = corpus::load_manifest(select_dir / "manifest.jsonl");
  const auto subset = corpus::load_pairs(subset_manifest);
  const auto& a = c.distill.adjuster;

  const auto ref_idx = sample_indices(
      full.size(), static_cast<std::size_t>(a.reference_factor) * subset.size(), c.seed,
      "distill.reference");
  std::vector<corpus::ImagePair> reference;
  for (std::size_t i : ref_idx) reference.push_back(corpus::load_pair(full, i));

  trainer::RestorationModel model({c.training.width}, substream_seed(c.seed, "distill.model"));
  distill::AdjusterCNN adjuster({a.depth, a.width, 0}, substream_seed(c.seed, "distill.adjuster"));

  distill::DistilledSet set;
  if (a.enabled) {
    distill::FinetuneOptions fo;
    fo.steps = a.steps;
    fo.lr = a.lr;
    fo.model_lr = a.model_lr;
    fo.batch = a.batch;
    fo.patch = a.patch;
    fo.task_weight = a.task_weight;
    fo.mode = a.loss_mode;
    fo.seed = substream_seed(c.seed, "distill.finetune");
    set = distill::finetune_distribution(adjuster, subset, reference, model, fo);
  } else {
    set.adjuster = adjuster;
    for (const auto& p : subset) set.real_ids.push_back(p.id);
    set.adjusted_pairs = subset;
  }

  if (c.distill.latent.enabled) {
    const auto& l = c.distill.latent;
    std::vector<Image> hq;
    for (const auto& p : subset) hq.push_back(p.hq);
    for (const auto& p : reference) hq.push_back(p.hq);
    distill::Autoencoder ae({c.corpus.size, l.latent_dim, l.width},
                            substream_seed(c.seed, "distill.decoder"));
    const auto fit = distill::train_decoder(
        ae, hq, {l.decoder_epochs, l.decoder_lr, 16, substream_seed(c.seed, "distill.decoder")});
    ae.save(dir / "decoder.bin");
    distill::LatentOptions lo;
    lo.count = l.count;
    lo.steps = l.steps;
    lo.lr = l.lr;
    lo.latent_weight = l.latent_weight;
    lo.seed = substream_seed(c.seed, "distill.latent");
    auto latents = distill::distill_latents(ae, subset, model, lo);
    set.synthetic_pairs = std::move(latents.synthetic);
    std::string csv = "step,objective\n";
    for (std::size_t i = 0; i < latents.objective.size(); ++i) {
      csv += fmt::format("{},{}\n", i, trainer::format_metric(latents.objective[i]));
    }
    write_text(dir / "latent_objective.csv", csv);
    set.provenance["decoder_initial_loss"] = fit.initial_loss;
    set.provenance["decoder_final_loss"] = fit.final_loss;
  }
  set.provenance["selection"] = relative_to(select_dir, dir);
  distill::save_distilled(set, dir, substream_seed(c.seed, "distill.manifest"));
}

void train_stage(const PipelineConfig& c, const fs::path& pool_manifest, const fs::path& dir) {
  const auto pool = corpus::load_pairs(corpus::load_manifest(pool_manifest));
  trainer::RestorationModel model({c.training.width}, substream_seed(c.seed, "train.init"));
  trainer::TrainConfig tc = c.training.train;
  tc.seed = substream_seed(c.seed, "train");
  const auto history = trainer::train_restoration(model, pool, tc);
  model.save(dir / "model.bin", {{"train", tc.to_json()}, {"pool_size", pool.size()}});
  write_text(dir / "steps.csv", history.steps_csv());
  write_text(dir / "epochs.jsonl", history.epochs_jsonl());
}

void eval_stage(const fs::path& synth_dir, const fs::path& train_dir, const fs::path& dir) {
  const auto model = trainer::RestorationModel::load(train_dir / "model.bin");
  const auto table =
      trainer::evaluate(model, corpus::load_manifest(synth_dir / "test" / "manifest.jsonl"));
  write_text(dir / "eval.csv", table.to_csv());
  write_text(dir / "summary.json", json{{"mean_psnr", table.mean_psnr},
                                        {"mean_ssim", table.mean_ssim},
                                        {"count", table.rows.size()}}
                                       .dump(2) + "\n");
}

trainer::EvalTable load_eval(const fs::path& dir) {
  // Rebuilt from the CSV so a reused stage reports the same numbers as a
  // fresh one.
  std::ifstream f(dir / "eval.csv", std::ios::binary);
  if (!f) throw IoError("cannot read " + (dir / "eval.csv").string());
  trainer::EvalTable t;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    const std::string id = line.substr(0, a);
    auto num = [](const std::string& s) {
      return s == "inf" ? std::numeric_limits<double>::infinity() : std::stod(s);
    };
    const double psnr = num(line.substr(a + 1, b - a - 1));
    const double ssim = num(line.substr(b + 1));
    if (id == "mean") {
      t.mean_psnr = psnr;
      t.mean_ssim = ssim;
    } else {
      t.rows.push_back({id, psnr, ssim});
    }
  }
  return t;
}

std::vector<diagnostics::CurveData> diagnostic_curves(const PipelineConfig& c,
                                                      const fs::path& synth_dir,
                                                      const fs::path& select_dir,
                                                      const fs::path* distill_dir) {
  const auto full = corpus::load_manifest(synth_dir / "train" / "manifest.jsonl");
  const auto subset = corpus::load_manifest(select_dir / "manifest.jsonl");
  const std::size_t k = std::min(c.diagnostics.sample, subset.size());
  std::vector<std::size_t> sel_idx(k);
  std::iota(sel_idx.begin(), sel_idx.end(), std::size_t{0});
  const auto selected = load_hq(subset, sel_idx);
  const auto random = load_hq(full, sample_indices(full.size(), k, c.seed, "diagnostics.random"));
  const auto full_sample = load_hq(
      full, sample_indices(full.size(), c.diagnostics.sample, c.seed, "diagnostics.full"));

  distill::AdjusterCNN adjuster({c.distill.adjuster.depth, c.distill.adjuster.width, 0},
                                substream_seed(c.seed, "distill.adjuster"));
  std::vector<Image> adjusted = selected;
  if (distill_dir) {
    if (c.distill.adjuster.enabled) adjuster = distill::AdjusterCNN::load(*distill_dir / "adjuster.bin");
    const auto pairs = corpus::load_manifest(*distill_dir / "pairs" / "manifest.jsonl");
    adjusted = load_hq(pairs, sel_idx);
  }

  std::vector<diagnostics::CurveData> curves;
  if (k >= 2) {
    auto embed = [&](const std::vector<Image>& imgs, bool features) {
      std::vector<diagnostics::Embedding> e;
      for (const Image& img : imgs) {
        e.push_back(features ? diagnostics::feature_embedding(adjuster, img)
                             : diagnostics::raw_embedding(img));
      }
      return e;
    };
    using diagnostics::DistanceMetric;
    curves.push_back(named(diagnostics::pairwise_distance_cdf(embed(selected, false),
                                                              DistanceMetric::kEuclideanRaw),
                           "ped/selected", {"select"}));
    curves.push_back(named(diagnostics::pairwise_distance_cdf(embed(random, false),
                                                              DistanceMetric::kEuclideanRaw),
                           "ped/random", {"synth"}));
    curves.push_back(named(diagnostics::pairwise_distance_cdf(embed(selected, true),
                                                              DistanceMetric::kEuclideanFeature),
                           "pfd/selected", {"select", "distill"}));
    curves.push_back(named(diagnostics::pairwise_distance_cdf(embed(random, true),
                                                              DistanceMetric::kEuclideanFeature),
                           "pfd/random", {"synth", "distill"}));
  }

  const auto e_full = entropies(full_sample);
  const auto e_sel = entropies(selected);
  const auto e_adj = entropies(adjusted);
  std::vector<double> all = e_full;
  all.insert(all.end(), e_sel.begin(), e_sel.end());
  all.insert(all.end(), e_adj.begin(), e_adj.end());
  const double h = diagnostics::silverman_bandwidth(e_full);
  const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  const auto grid = diagnostics::linspace(*lo - 3.0 * h, *hi + 3.0 * h, c.diagnostics.kde_points);
  curves.push_back(named(diagnostics::kde_1d(e_full, h, grid), "kde/entropy/full", {"synth"}));
  curves.push_back(named(diagnostics::kde_1d(e_sel, h, grid), "kde/entropy/selected", {"select"}));
  curves.push_back(
      named(diagnostics::kde_1d(e_adj, h, grid), "kde/entropy/adjusted", {"distill"}));
  const int q = c.diagnostics.qq_quantiles;
  curves.push_back(named(diagnostics::qq_points(e_sel, e_full, q), "qq/entropy/selected_vs_full",
                         {"select", "synth"}));
  curves.push_back(named(diagnostics::qq_points(e_adj, e_full, q), "qq/entropy/adjusted_vs_full",
                         {"distill", "synth"}));
  return curves;
}

std::string p_label(const PipelineConfig& c) {
  return c.selection.enabled ? fmt::format("{}", c.selection.p) : "full";
}

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::kSynth: return "synth";
    case Stage::kScore: return "score";
    case Stage::kSelect: return "select";
    case Stage::kDistill: return "distill";
    case Stage::kTrain: return "train";
    case Stage::kEval: return "eval";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::kSynth, Stage::kScore, Stage::kSelect, Stage::kDistill, Stage::kTrain,
                  Stage::kEval, Stage::kReport}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + name + "'");
}

std::string run_id(const PipelineConfig& config) { return hash_json(config_identity(config)); }

PipelineResult run_pipeline(const PipelineConfig& c, Stage until) {
  c.validate();
  PipelineResult result;
  result.run_id = run_id(c);
  const fs::path out = c.output_dir;
  StageCache cache(out / "stages");
  fs::create_directories(out);
  write_text(out / "config.resolved.yaml", to_yaml(c));

  auto done = [&](Stage s) { return static_cast<int>(s) >= static_cast<int>(until); };

  const StageRecord synth = cache.run(Stage::kSynth, {{"seed", c.seed}, {"corpus", c.to_json()["corpus"]}},
                                      [&](const fs::path& d) { synth_stage(c, d); });
  result.stages.push_back(synth);
  if (done(Stage::kSynth)) return result;

  const bool selecting = c.selection.enabled;
  const bool distilling =
      selecting && (c.distill.adjuster.enabled || c.distill.latent.enabled);
  std::optional<StageRecord> score, select, distilled;
  fs::path pool = synth.dir / "train" / "manifest.jsonl";
  std::string pool_key = synth.key;

  if (selecting) {
    json scoring = c.to_json()["scoring"];
    if (c.scoring.mode != scorer::ScoreSource::kLearned) scoring.erase("learned");
    score = cache.run(Stage::kScore, {{"synth", synth.key}, {"seed", c.seed}, {"scoring", scoring}},
                      [&](const fs::path& d) { score_stage(c, synth.dir, d); });
    result.stages.push_back(*score);
    if (done(Stage::kScore)) return result;

    select = cache.run(Stage::kSelect, {{"score", score->key}, {"p", c.selection.p}},
                       [&](const fs::path& d) { select_stage(c, synth.dir, *score, d); });
    result.stages.push_back(*select);
    if (done(Stage::kSelect)) return result;
    pool = select->dir / "manifest.jsonl";
    pool_key = select->key;
  }

  if (distilling) {
    const json j = c.to_json();
    distilled = cache.run(Stage::kDistill,
                          {{"select", select->key},
                           {"seed", c.seed},
                           {"distill", j["distill"]},
                           {"model_width", c.training.width}},
                          [&](const fs::path& d) { distill_stage(c, synth.dir, select->dir, d); });
    result.stages.push_back(*distilled);
    pool = distilled->dir / "pairs" / "manifest.jsonl";
    pool_key = distilled->key;
  }
  if (done(Stage::kDistill)) return result;

  const StageRecord train =
      cache.run(Stage::kTrain, {{"pool", pool_key}, {"seed", c.seed}, {"training", c.to_json()["training"]}},
                [&](const fs::path& d) { train_stage(c, pool, d); });
  result.stages.push_back(train);
  if (done(Stage::kTrain)) return result;

  const StageRecord eval = cache.run(Stage::kEval, {{"train", train.key}, {"synth", synth.key}},
                                     [&](const fs::path& d) { eval_stage(synth.dir, train.dir, d); });
  result.stages.push_back(eval);
  result.eval = load_eval(eval.dir);
  if (done(Stage::kEval)) return result;

  result.report_dir = out / "report";
  try {
    report::RunReport& r = result.report;
    r.run_id = result.run_id;
    r.config = config_identity(c);
    r.tables.push_back({"summary",
                        {"p", "psnr", "ssim"},
                        {{p_label(c), trainer::format_metric(result.eval.mean_psnr),
                          trainer::format_metric(result.eval.mean_ssim)}}});
    report::ResultsTable per_image{"per_image", {"id", "psnr", "ssim"}, {}};
    for (const auto& row : result.eval.rows) {
      per_image.rows.push_back(
          {row.id, trainer::format_metric(row.psnr), trainer::format_metric(row.ssim)});
    }
    r.tables.push_back(std::move(per_image));
    if (c.diagnostics.enabled && select) {
      const fs::path* dd = distilled ? &distilled->dir : nullptr;
      r.curves = diagnostic_curves(c, synth.dir, select->dir, dd);
    }
    for (const auto& s : result.stages) {
      r.artifacts["stage/" + to_string(s.stage)] = relative_to(s.dir, result.report_dir);
    }
    r.artifacts["config"] = relative_to(out / "config.resolved.yaml", result.report_dir);
    report::emit_report(r, result.report_dir);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("report", e.what());
  }
  result.stages.push_back({Stage::kReport, result.run_id, result.report_dir, false});
  return result;
}

SweepResult run_sweep(const PipelineConfig& base) {
  base.validate();
  const auto& sw = base.sweep;
  const std::vector<std::uint64_t> seeds =
      sw.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : sw.seeds;

  SweepResult result;
  report::RunReport& r = result.report;
  json identity = base.to_json();
  identity.erase("output_dir");
  r.run_id = hash_json(identity);
  r.config = identity;
  report::ResultsTable runs{"runs", {"axis", "value", "seed", "psnr", "ssim"}, {}};

  struct Variant {
    std::string value;
    PipelineConfig config;
  };
  auto run_axis = [&](const std::string& axis, const std::vector<Variant>& variants) {
    report::ResultsTable table{axis, {axis, "psnr", "ssim"}, {}};
    for (const Variant& v : variants) {
      double psnr = 0.0, ssim = 0.0;
      for (std::uint64_t s : seeds) {
        PipelineConfig c = v.config;
        c.seed = s;
        const auto res = run_pipeline(c, Stage::kEval);
        psnr += res.eval.mean_psnr;
        ssim += res.eval.mean_ssim;
        runs.rows.push_back({axis, v.value, std::to_string(s),
                             trainer::format_metric(res.eval.mean_psnr),
                             trainer::format_metric(res.eval.mean_ssim)});
        const std::string key = fmt::format("{}={}/seed={}", axis, v.value, s);
        r.artifacts[key] =
            relative_to(res.stages.back().dir, fs::path(base.output_dir) / "sweep_report");
      }
      const double n = static_cast<double>(seeds.size());
      table.rows.push_back(
          {v.value, trainer::format_metric(psnr / n), trainer::format_metric(ssim / n)});
    }
    r.tables.push_back(std::move(table));
  };

  if (!sw.p.empty()) {
    std::vector<Variant> vs;
    for (double p : sw.p) {
      PipelineConfig c = base;
      c.selection.enabled = true;
      c.selection.p = p;
      vs.push_back({fmt::format("{}", p), c});
    }
    if (sw.include_full_baseline) {
      PipelineConfig c = base;
      c.selection.enabled = false;
      c.distill.adjuster.enabled = false;
      c.distill.latent.enabled = false;
      vs.push_back({"full", c});
    }
    run_axis("p", vs);
  }
  if (!sw.accum.empty()) {
    std::vector<Variant> vs;
    for (int k : sw.accum) {
      PipelineConfig c = base;
      c.training.train.accum_steps = k;
      vs.push_back({std::to_string(k), c});
    }
    run_axis("accum_steps", vs);
  }
  if (!sw.resolution.empty()) {
    std::vector<Variant> vs;
    for (const auto& res : sw.resolution) {
      PipelineConfig c = base;
      c.scoring.resolution = scorer::Resolution::parse(res);
      vs.push_back({c.scoring.resolution.to_string(), c});
    }
    run_axis("resolution", vs);
  }
  if (!sw.adjuster_depth.empty()) {
    std::vector<Variant> vs;
    for (int d : sw.adjuster_depth) {
      PipelineConfig c = base;
      c.distill.adjuster.enabled = d > 0;
      if (d > 0) c.distill.adjuster.depth = d;
      vs.push_back({std::to_string(d), c});
    }
    run_axis("adjuster_depth", vs);
  }
  r.tables.push_back(std::move(runs));
  result.report_dir = fs::path(base.output_dir) / "sweep_report";
  fs::create_directories(base.output_dir);
  write_text(fs::path(base.output_dir) / "config.resolved.yaml", to_yaml(base));
  report::emit_report(r, result.report_dir);
  return result;
}

}  // namespace distillir::pipeline
