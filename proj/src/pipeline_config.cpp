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

#include "distillir/pipeline_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <type_traits>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "distillir/errors.hpp"

namespace distillir::pipeline {

using nlohmann::json;

// --- YAML <-> JSON -------------------------------------------------------------

namespace {

json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted: always a string
  if (text == "~" || text == "null" || text.empty()) return nullptr;
  if (text == "true" || text == "True") return true;
  if (text == "false" || text == "False") return false;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) {
      if (v >= 0) return static_cast<std::uint64_t>(v);
      return v;
    }
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (obj.contains(key)) throw ConfigError("duplicate config key '" + key + "'");
        obj[key] = node_to_json(kv.second);
      }
      return obj;
    }
  }
  return nullptr;
}

void emit(YAML::Emitter& out, const json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : j.items()) {
      out << YAML::Key << k << YAML::Value;
      emit(out, v);
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    out << YAML::Flow << YAML::BeginSeq;
    for (const auto& v : j) emit(out, v);
    out << YAML::EndSeq;
  } else if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    // Keep strings that would re-read as numbers or booleans quoted.
    const bool ambiguous = !scalar_to_json(YAML::Load(s)).is_string();
    if (ambiguous) {
      out << YAML::DoubleQuoted << s;
    } else {
      out << s;
    }
  } else if (j.is_boolean()) {
    out << j.get<bool>();
  } else if (j.is_number_float()) {
    out << fmt::format("{}", j.get<double>());
  } else if (j.is_null()) {
    out << YAML::Null;
  } else {
    out << j.dump();
  }
}

// --- strict reader -------------------------------------------------------------

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed fields are read as size_t");

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ConfigError(where("") + " must be a mapping");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key '" + where(k) + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  void read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) type_error(key, "a boolean");
    out = v.get<bool>();
  }
  void read(const std::string& key, int& out) { out = static_cast<int>(integer(key, out)); }
  void read(const std::string& key, std::size_t& out) {
    const long long v = integer(key, static_cast<long long>(out));
    if (v < 0) throw ConfigError(where(key) + " must be non-negative");
    out = static_cast<std::size_t>(v);
  }
  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) type_error(key, "a number");
    out = v.get<double>();
  }
  void read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    out = string_value(key, obj_.at(key));
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    if (!obj_.contains(key) || obj_.at(key).is_null()) return empty;
    return obj_.at(key);
  }

  const json* list(const std::string& key) {
    if (!has(key)) return nullptr;
    const json& v = obj_.at(key);
    if (!v.is_array()) type_error(key, "a list");
    return &v;
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void type_error(const std::string& key, const char* expected) const {
    throw ConfigError(where(key) + " must be " + expected);
  }

  std::string string_value(const std::string& key, const json& v) const {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    type_error(key, "a string");
  }

 private:
  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) type_error(key, "an integer");
    return v.get<long long>();
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json mix_to_json(const std::vector<corpus::MixComponent>& mix) {
  json arr = json::array();
  for (const auto& m : mix) {
    arr.push_back({{"degradation", m.spec.to_string()}, {"fraction", m.fraction}});
  }
  return arr;
}

}  // namespace

json yaml_to_json(const std::string& text) {
  try {
    return node_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = yaml_to_json(value);
}

json PipelineConfig::to_json() const {
  const auto& t = training.train;
  return json{
      {"seed", seed},
      {"output_dir", output_dir},
      {"corpus",
       {{"count", corpus.count},
        {"test_count", corpus.test_count},
        {"size", corpus.size},
        {"mix", mix_to_json(corpus.mix)}}},
      {"scoring",
       {{"mode", scorer::to_string(scoring.mode)},
        {"resolution", scoring.resolution.to_string()},
        {"learned",
         {{"epochs", scoring.learned.epochs},
          {"lr", scoring.learned.lr},
          {"depth", scoring.learned.depth},
          {"width", scoring.learned.width},
          {"patch", scoring.learned.patch},
          {"train_count", scoring.learned.train_count}}}}},
      {"selection", {{"enabled", selection.enabled}, {"p", selection.p}}},
      {"distill",
       {{"adjuster",
         {{"enabled", distill.adjuster.enabled},
          {"depth", distill.adjuster.depth},
          {"width", distill.adjuster.width},
          {"steps", distill.adjuster.steps},
          {"lr", distill.adjuster.lr},
          {"model_lr", distill.adjuster.model_lr},
          {"batch", distill.adjuster.batch},
          {"patch", distill.adjuster.patch},
          {"loss_mode", distill::to_string(distill.adjuster.loss_mode)},
          {"task_weight", distill.adjuster.task_weight},
          {"reference_factor", distill.adjuster.reference_factor}}},
        {"latent",
         {{"enabled", distill.latent.enabled},
          {"count", distill.latent.count},
          {"steps", distill.latent.steps},
          {"lr", distill.latent.lr},
          {"latent_weight", distill.latent.latent_weight},
          {"latent_dim", distill.latent.latent_dim},
          {"width", distill.latent.width},
          {"decoder_epochs", distill.latent.decoder_epochs},
          {"decoder_lr", distill.latent.decoder_lr}}}}},
      {"training",
       {{"lr0", t.lr0},
        {"batch", t.batch},
        {"patch", t.patch},
        {"accum_steps", t.accum_steps},
        {"epochs", t.epochs},
        {"steps_per_epoch", t.steps_per_epoch},
        {"weight_decay", t.weight_decay},
        {"width", training.width}}},
      {"diagnostics",
       {{"enabled", diagnostics.enabled},
        {"sample", diagnostics.sample},
        {"qq_quantiles", diagnostics.qq_quantiles},
        {"kde_points", diagnostics.kde_points}}},
      {"sweep",
       {{"p", sweep.p},
        {"accum", sweep.accum},
        {"resolution", sweep.resolution},
        {"adjuster_depth", sweep.adjuster_depth},
        {"seeds", sweep.seeds},
        {"include_full_baseline", sweep.include_full_baseline}}}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  {
    Reader r(j, "");
    r.read("seed", c.seed);
    r.read("output_dir", c.output_dir);
    {
      Reader k(r.child("corpus"), "corpus");
      k.read("count", c.corpus.count);
      k.read("test_count", c.corpus.test_count);
      k.read("size", c.corpus.size);
      if (const json* mix = k.list("mix")) {
        c.corpus.mix.clear();
        for (std::size_t i = 0; i < mix->size(); ++i) {
          Reader m((*mix)[i], fmt::format("corpus.mix[{}]", i));
          std::string tag;
          corpus::MixComponent comp;
          m.read("degradation", tag);
          m.read("fraction", comp.fraction);
          if (tag.empty()) throw ConfigError(m.where("degradation") + " is required");
          comp.spec = corpus::DegradationSpec::parse(tag);
          c.corpus.mix.push_back(comp);
        }
      }
    }
    {
      Reader s(r.child("scoring"), "scoring");
      std::string mode = scorer::to_string(c.scoring.mode);
      std::string res = c.scoring.resolution.to_string();
      s.read("mode", mode);
      s.read("resolution", res);
      c.scoring.mode = scorer::parse_source(mode);
      c.scoring.resolution = scorer::Resolution::parse(res);
      Reader l(s.child("learned"), "scoring.learned");
      l.read("epochs", c.scoring.learned.epochs);
      l.read("lr", c.scoring.learned.lr);
      l.read("depth", c.scoring.learned.depth);
      l.read("width", c.scoring.learned.width);
      l.read("patch", c.scoring.learned.patch);
      l.read("train_count", c.scoring.learned.train_count);
    }
    {
      Reader s(r.child("selection"), "selection");
      s.read("enabled", c.selection.enabled);
      s.read("p", c.selection.p);
    }
    {
      Reader d(r.child("distill"), "distill");
      {
        auto& a = c.distill.adjuster;
        Reader k(d.child("adjuster"), "distill.adjuster");
        k.read("enabled", a.enabled);
        k.read("depth", a.depth);
        k.read("width", a.width);
        k.read("steps", a.steps);
        k.read("lr", a.lr);
        k.read("model_lr", a.model_lr);
        k.read("batch", a.batch);
        k.read("patch", a.patch);
        std::string mode = distill::to_string(a.loss_mode);
        k.read("loss_mode", mode);
        a.loss_mode = distill::parse_mode(mode);
        k.read("task_weight", a.task_weight);
        k.read("reference_factor", a.reference_factor);
      }
      {
        auto& l = c.distill.latent;
        Reader k(d.child("latent"), "distill.latent");
        k.read("enabled", l.enabled);
        k.read("count", l.count);
        k.read("steps", l.steps);
        k.read("lr", l.lr);
        k.read("latent_weight", l.latent_weight);
        k.read("latent_dim", l.latent_dim);
        k.read("width", l.width);
        k.read("decoder_epochs", l.decoder_epochs);
        k.read("decoder_lr", l.decoder_lr);
      }
    }
    {
      auto& t = c.training.train;
      Reader k(r.child("training"), "training");
      k.read("lr0", t.lr0);
      k.read("batch", t.batch);
      k.read("patch", t.patch);
      k.read("accum_steps", t.accum_steps);
      k.read("epochs", t.epochs);
      k.read("steps_per_epoch", t.steps_per_epoch);
      k.read("weight_decay", t.weight_decay);
      k.read("width", c.training.width);
    }
    {
      Reader k(r.child("diagnostics"), "diagnostics");
      k.read("enabled", c.diagnostics.enabled);
      k.read("sample", c.diagnostics.sample);
      k.read("qq_quantiles", c.diagnostics.qq_quantiles);
      k.read("kde_points", c.diagnostics.kde_points);
    }
    {
      Reader k(r.child("sweep"), "sweep");
      if (const json* v = k.list("p")) {
        for (const auto& x : *v) {
          if (!x.is_number()) k.type_error("p", "a list of numbers");
          c.sweep.p.push_back(x.get<double>());
        }
      }
      if (const json* v = k.list("accum")) {
        for (const auto& x : *v) {
          if (!x.is_number_integer()) k.type_error("accum", "a list of integers");
          c.sweep.accum.push_back(x.get<int>());
        }
      }
      if (const json* v = k.list("resolution")) {
        for (const auto& x : *v) c.sweep.resolution.push_back(k.string_value("resolution", x));
      }
      if (const json* v = k.list("adjuster_depth")) {
        for (const auto& x : *v) {
          if (!x.is_number_integer()) k.type_error("adjuster_depth", "a list of integers");
          c.sweep.adjuster_depth.push_back(x.get<int>());
        }
      }
      if (const json* v = k.list("seeds")) {
        for (const auto& x : *v) {
          if (!x.is_number_unsigned()) k.type_error("seeds", "a list of non-negative integers");
          c.sweep.seeds.push_back(x.get<std::uint64_t>());
        }
      }
      k.read("include_full_baseline", c.sweep.include_full_baseline);
    }
  }
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (output_dir.empty()) fail("output_dir must not be empty");
  if (corpus.count < 2) fail("corpus.count must be >= 2");
  if (corpus.test_count < 1) fail("corpus.test_count must be >= 1");
  if (corpus.size < 8 || corpus.size % 8 != 0) fail("corpus.size must be a positive multiple of 8");
  if (corpus.mix.empty()) fail("corpus.mix must not be empty");
  double total = 0.0;
  for (const auto& m : corpus.mix) {
    m.spec.validate();
    if (m.fraction < 0.0) fail("corpus.mix fractions must be non-negative");
    total += m.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("corpus.mix fractions must sum to 1");

  if (scoring.learned.epochs < 0 || !(scoring.learned.lr > 0.0) || scoring.learned.depth < 1 ||
      scoring.learned.width < 1 || scoring.learned.patch < 1) {
    fail("scoring.learned has an invalid value");
  }
  if (!(selection.p > 0.0 && selection.p <= 1.0)) fail("selection.p must lie in (0, 1]");

  const auto& a = distill.adjuster;
  if (a.depth < 2 || a.width < 1) fail("distill.adjuster depth must be >= 2 and width >= 1");
  if (a.steps < 0 || a.batch < 1 || !(a.lr > 0.0) || a.model_lr < 0.0 || a.task_weight < 0.0) {
    fail("distill.adjuster has an invalid value");
  }
  if (a.patch < 0 || a.patch % 4 != 0 || a.patch > corpus.size) {
    fail("distill.adjuster.patch must be 0 or a multiple of 4 no larger than corpus.size");
  }
  if (a.reference_factor < 1) fail("distill.adjuster.reference_factor must be >= 1");
  const auto& l = distill.latent;
  if (l.count < 1 || l.steps < 0 || !(l.lr > 0.0) || l.latent_weight < 0.0 ||
      l.latent_dim < 1 || l.width < 1 || l.decoder_epochs < 0 || !(l.decoder_lr > 0.0)) {
    fail("distill.latent has an invalid value");
  }

  try {
    training.train.validate();
  } catch (const ValidationError& e) {
    fail(e.what());
  }
  if (training.train.patch > corpus.size) fail("training.patch must not exceed corpus.size");
  if (training.width < 1) fail("training.width must be >= 1");

  if (diagnostics.sample < 2 || diagnostics.qq_quantiles < 2 || diagnostics.kde_points < 2) {
    fail("diagnostics sample, qq_quantiles and kde_points must be >= 2");
  }

  for (double p : sweep.p) {
    if (!(p > 0.0 && p <= 1.0)) fail("sweep.p values must lie in (0, 1]");
  }
  for (int k : sweep.accum) {
    if (k < 1 || training.train.batch % k != 0) {
      fail(fmt::format("sweep.accum value {} must divide training.batch", k));
    }
  }
  for (const auto& r : sweep.resolution) scorer::Resolution::parse(r);
  for (int d : sweep.adjuster_depth) {
    if (d != 0 && d < 2) fail("sweep.adjuster_depth values must be 0 or >= 2");
  }
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides) {
  json tree = json::object();
  if (!path.empty()) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    tree = yaml_to_json(ss.str());
    if (tree.is_null()) tree = json::object();
  }
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
    tree["output_dir"] = root;
  }
  for (const auto& o : overrides) apply_override(tree, o);
  return PipelineConfig::from_json(tree);
}

std::string to_yaml(const PipelineConfig& config) {
  YAML::Emitter out;
  emit(out, config.to_json());
  return std::string(out.c_str()) + "\n";
}

}  // namespace distillir::pipeline
