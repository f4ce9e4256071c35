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

#include "distillir/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "distillir/errors.hpp"
#include "distillir/png_io.hpp"
#include "distillir/procedural.hpp"
#include "distillir/rng.hpp"

namespace distillir::corpus {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<DegradationKind, std::set<std::string>>& allowed_params() {
  static const std::map<DegradationKind, std::set<std::string>> table{
      {DegradationKind::kNone, {}},
      {DegradationKind::kNoise, {"sigma"}},
      {DegradationKind::kRain, {"density", "angle", "length", "intensity"}},
      {DegradationKind::kBlur, {"radius"}},
  };
  return table;
}

double param_or(const DegradationSpec& spec, const std::string& name,
                double fallback) {
  auto it = spec.params.find(name);
  return it == spec.params.end() ? fallback : it->second;
}

Image add_noise(const Image& img, double sigma8, std::uint64_t seed) {
  Image out = img;
  if (sigma8 == 0.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, sigma8 / 255.0);
  for (double& v : out.data()) v += n(rng);
  clamp_unit(out);
  return out;
}

Image add_rain(const Image& img, const DegradationSpec& spec,
               std::uint64_t seed) {
  Image out = img;
  const double density = param_or(spec, "density", 0.0);
  if (density == 0.0) return out;
  const int h = img.height(), w = img.width();
  const double angle = param_or(spec, "angle", 0.0) * std::numbers::pi / 180.0;
  const double length = param_or(spec, "length", 0.25 * std::min(h, w));
  const double intensity = param_or(spec, "intensity", 0.5);
  const auto streaks = static_cast<long>(std::lround(density * h * w / 1e6));
  if (streaks == 0 || length == 0.0 || intensity == 0.0) return out;

  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double dx = std::sin(angle), dy = std::cos(angle);
  std::vector<double> mask(static_cast<std::size_t>(h) * w, 0.0);
  for (long s = 0; s < streaks; ++s) {
    // Start anywhere, including above the frame, so streaks cover the
    // top rows as densely as the rest.
    const double x0 = u(rng) * w;
    const double y0 = u(rng) * (h + length) - length;
    const double len = length * (0.5 + 0.5 * u(rng));
    const double bright = intensity * (0.5 + 0.5 * u(rng));
    for (double t = 0.0; t <= len; t += 0.5) {
      const long px = std::lround(x0 + t * dx);
      const long py = std::lround(y0 + t * dy);
      if (px < 0 || py < 0 || px >= w || py >= h) continue;
      double& m = mask[static_cast<std::size_t>(py) * w + px];
      m = std::max(m, bright);
    }
  }
  const int c = img.channels();
  auto data = out.data();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    for (int ch = 0; ch < c; ++ch) data[i * c + ch] += mask[i];
  }
  clamp_unit(out);
  return out;
}

Image box_blur(const Image& img, int radius) {
  if (radius == 0) return img;
  const int h = img.height(), w = img.width(), c = img.channels();
  const double norm = 1.0 / (2 * radius + 1);
  Image tmp(h, w, c), out(h, w, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          s += img.at(y, std::clamp(x + t, 0, w - 1), ch);
        }
        tmp.at(y, x, ch) = s * norm;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          s += tmp.at(std::clamp(y + t, 0, h - 1), x, ch);
        }
        out.at(y, x, ch) = s * norm;
      }
    }
  }
  clamp_unit(out);
  return out;
}

std::string format_number(double v) {
  // Shortest representation that round-trips, for stable tags.
  return json(v).dump();
}

}  // namespace

DegradationKind parse_kind(const std::string& name) {
  if (name == "none") return DegradationKind::kNone;
  if (name == "noise") return DegradationKind::kNoise;
  if (name == "rain") return DegradationKind::kRain;
  if (name == "blur") return DegradationKind::kBlur;
  throw ConfigError("unknown degradation kind '" + name + "'");
}

DegradationSpec DegradationSpec::noise(double sigma) {
  return {DegradationKind::kNoise, {{"sigma", sigma}}};
}
DegradationSpec DegradationSpec::rain(double density, double angle) {
  return {DegradationKind::kRain, {{"density", density}, {"angle", angle}}};
}
DegradationSpec DegradationSpec::blur(double radius) {
  return {DegradationKind::kBlur, {{"radius", radius}}};
}

std::string DegradationSpec::kind_name() const {
  switch (kind) {
    case DegradationKind::kNone: return "none";
    case DegradationKind::kNoise: return "noise";
    case DegradationKind::kRain: return "rain";
    case DegradationKind::kBlur: return "blur";
  }
  return "none";
}

std::string DegradationSpec::to_string() const {
  if (kind == DegradationKind::kNone) return "none";
  std::string out = kind_name() + "{";
  bool first = true;
  for (const auto& [k, v] : params) {
    if (!first) out += ",";
    first = false;
    out += k + "=" + format_number(v);
  }
  return out + "}";
}

DegradationSpec DegradationSpec::parse(const std::string& tag) {
  DegradationSpec spec;
  const auto brace = tag.find('{');
  spec.kind = parse_kind(tag.substr(0, brace));
  if (brace != std::string::npos) {
    if (tag.back() != '}') throw ConfigError("malformed degradation tag '" + tag + "'");
    std::stringstream body(tag.substr(brace + 1, tag.size() - brace - 2));
    std::string item;
    while (std::getline(body, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("malformed degradation parameter '" + item + "'");
      }
      try {
        spec.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("non-numeric degradation parameter '" + item + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

double DegradationSpec::param(const std::string& name) const {
  return param_or(*this, name, 0.0);
}

void DegradationSpec::validate() const {
  const auto& allowed = allowed_params().at(kind);
  for (const auto& [k, v] : params) {
    if (!allowed.contains(k)) {
      throw ConfigError("parameter '" + k + "' is not valid for " + kind_name());
    }
    if (!std::isfinite(v) || v < 0.0) {
      // Rain angle is a direction, so it may be negative.
      if (!(kind == DegradationKind::kRain && k == "angle" && std::isfinite(v))) {
        throw ValidationError("degradation parameter '" + k + "' must be non-negative");
      }
    }
  }
}

bool DegradationSpec::is_identity() const {
  switch (kind) {
    case DegradationKind::kNone: return true;
    case DegradationKind::kNoise: return param("sigma") == 0.0;
    case DegradationKind::kRain: return param("density") == 0.0;
    case DegradationKind::kBlur: return std::lround(param("radius")) == 0;
  }
  return true;
}

void validate_pair(const ImagePair& pair) {
  if (!pair.lq.same_shape(pair.hq)) {
    throw ValidationError("pair '" + pair.id + "': lq and hq shapes differ");
  }
  for (const Image* img : {&pair.lq, &pair.hq}) {
    for (double v : img->data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("pair '" + pair.id + "': pixel outside [0,1]");
      }
    }
  }
  if (pair.degradation.kind == DegradationKind::kNone && pair.lq != pair.hq) {
    throw ValidationError("pair '" + pair.id + "': tag none requires lq == hq");
  }
}

Image degrade(const Image& img, const DegradationSpec& spec, std::uint64_t seed) {
  spec.validate();
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("degrade: input pixel outside [0,1]");
    }
  }
  switch (spec.kind) {
    case DegradationKind::kNone: return img;
    case DegradationKind::kNoise: return add_noise(img, spec.param("sigma"), seed);
    case DegradationKind::kRain: return add_rain(img, spec, seed);
    case DegradationKind::kBlur:
      return box_blur(img, static_cast<int>(std::lround(spec.param("radius"))));
  }
  throw ConfigError("unknown degradation kind");
}

fs::path CorpusManifest::resolve(const std::string& rel) const {
  fs::path p(rel);
  return p.is_absolute() ? p : root / p;
}

std::size_t CorpusManifest::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) return i;
  }
  throw ValidationError("id '" + id + "' not in manifest");
}

std::string manifest_to_string(const CorpusManifest& manifest) {
  std::string out;
  json header{{"format", "distillir-manifest"},
              {"version", manifest.version},
              {"seed", manifest.seed}};
  out += header.dump() + "\n";
  for (const auto& e : manifest.entries) {
    json rec;
    rec["id"] = e.id;
    rec["lq_path"] = e.lq_path;
    rec["hq_path"] = e.hq_path;
    rec["degradation"] = e.degradation.to_string();
    rec["seed"] = e.seed;
    rec["width"] = e.width;
    rec["height"] = e.height;
    rec["score"] = e.score ? json(*e.score) : json(nullptr);
    out += rec.dump() + "\n";
  }
  return out;
}

void save_manifest(const CorpusManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << manifest_to_string(manifest);
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

CorpusManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  CorpusManifest m;
  m.root = path.parent_path();
  std::string line;
  std::set<std::string> seen;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("manifest line {}: {}", lineno, e.what()));
    }
    if (!header_seen && rec.contains("format")) {
      if (rec.at("format") != "distillir-manifest") {
        throw ValidationError("not a distillir manifest");
      }
      m.version = rec.at("version").get<int>();
      m.seed = rec.at("seed").get<std::uint64_t>();
      if (m.version != kManifestVersion) {
        throw ValidationError(fmt::format("unsupported manifest version {}", m.version));
      }
      header_seen = true;
      continue;
    }
    ManifestEntry e;
    try {
      e.id = rec.at("id").get<std::string>();
      e.lq_path = rec.at("lq_path").get<std::string>();
      e.hq_path = rec.at("hq_path").get<std::string>();
      e.degradation = DegradationSpec::parse(rec.at("degradation").get<std::string>());
      e.seed = rec.value("seed", std::uint64_t{0});
      e.width = rec.at("width").get<int>();
      e.height = rec.at("height").get<int>();
      if (rec.contains("score") && !rec.at("score").is_null()) {
        e.score = rec.at("score").get<double>();
      }
    } catch (const json::exception& ex) {
      throw ValidationError(fmt::format("manifest line {}: {}", lineno, ex.what()));
    }
    if (!seen.insert(e.id).second) {
      throw ValidationError("duplicate id '" + e.id + "' in manifest");
    }
    for (const auto* p : {&e.lq_path, &e.hq_path}) {
      if (!fs::exists(m.resolve(*p))) {
        throw ValidationError("entry '" + e.id + "' references missing file '" + *p + "'");
      }
    }
    m.entries.push_back(std::move(e));
  }
  if (!header_seen) throw ValidationError("manifest has no header record");
  return m;
}

ImagePair load_pair(const CorpusManifest& manifest, std::size_t index) {
  const auto& e = manifest.entries.at(index);
  ImagePair p;
  p.id = e.id;
  p.degradation = e.degradation;
  p.seed = e.seed;
  try {
    p.lq = read_png(manifest.resolve(e.lq_path));
    p.hq = read_png(manifest.resolve(e.hq_path));
  } catch (const IoError& err) {
    throw IoError("entry '" + e.id + "': " + err.what());
  }
  if (!p.lq.same_shape(p.hq)) {
    throw ValidationError("entry '" + e.id + "': lq and hq shapes differ");
  }
  return p;
}

std::vector<ImagePair> load_pairs(const CorpusManifest& manifest) {
  std::vector<ImagePair> out;
  out.reserve(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) out.push_back(load_pair(manifest, i));
  return out;
}

CorpusManifest write_pairs(const std::vector<ImagePair>& pairs,
                           const fs::path& dir, std::uint64_t seed) {
  std::error_code ec;
  fs::create_directories(dir / "lq", ec);
  fs::create_directories(dir / "hq", ec);
  if (ec) throw IoError("cannot create corpus directory '" + dir.string() + "'");
  CorpusManifest m;
  m.seed = seed;
  m.root = dir;
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    if (!seen.insert(p.id).second) throw ValidationError("duplicate id '" + p.id + "'");
    ManifestEntry e;
    e.id = p.id;
    e.lq_path = "lq/" + p.id + ".png";
    e.hq_path = "hq/" + p.id + ".png";
    e.degradation = p.degradation;
    e.seed = p.seed;
    e.width = p.hq.width();
    e.height = p.hq.height();
    write_png(dir / e.lq_path, p.lq);
    write_png(dir / e.hq_path, p.hq);
    m.entries.push_back(std::move(e));
  }
  save_manifest(m, dir / "manifest.jsonl");
  return m;
}

std::vector<std::size_t> apportion(const std::vector<double>& fractions,
                                   std::size_t count) {
  if (fractions.empty()) throw ValidationError("apportion: no components");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ValidationError("mix fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("mix fractions must sum to 1");
  }
  std::vector<std::size_t> out(fractions.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = fractions[i] * static_cast<double>(count);
    out[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += out[i];
    rema.emplace_back(exact - static_cast<double>(out[i]), i);
  }
  // Largest remainder first; ties go to the earlier component.
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) {
    ++out[rema[k % rema.size()].second];
  }
  return out;
}

std::vector<ImagePair> synth_pairs(const SynthOptions& options) {
  if (options.count < 1) throw ValidationError("synth_corpus: count must be >= 1");
  if (options.height < 1 || options.width < 1) {
    throw ValidationError("synth_corpus: size must be positive");
  }
  std::vector<double> fractions;
  for (const auto& c : options.mix) {
    c.spec.validate();
    fractions.push_back(c.fraction);
  }
  const auto counts = apportion(fractions, options.count);
  std::vector<std::size_t> assignment;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    assignment.insert(assignment.end(), counts[k], k);
  }
  Rng order = substream(options.seed, "synth.assign");
  std::shuffle(assignment.begin(), assignment.end(), order);

  std::vector<ImagePair> pairs(options.count);
  for (std::size_t i = 0; i < options.count; ++i) {
    Rng rng = substream(options.seed, "synth.clean", i);
    ImagePair& p = pairs[i];
    p.id = fmt::format("{}{:06d}", options.id_prefix, i);
    p.hq = quantize8(generate_clean_image(options.height, options.width, rng));
    p.degradation = options.mix[assignment[i]].spec;
    p.seed = substream_seed(options.seed, "synth.degrade", i);
    p.lq = quantize8(degrade(p.hq, p.degradation, p.seed));
  }
  return pairs;
}

CorpusManifest synth_corpus(const SynthOptions& options, const fs::path& dir) {
  return write_pairs(synth_pairs(options), dir, options.seed);
}

}  // namespace distillir::corpus
