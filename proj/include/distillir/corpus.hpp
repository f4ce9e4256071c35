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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distillir/image.hpp"

namespace distillir::corpus {

enum class DegradationKind { kNone, kNoise, kRain, kBlur };

// A degradation family plus its named parameters.
//   noise{sigma}            sigma in 8-bit units (divided by 255)
//   rain{density, angle, length, intensity}
//                           density in streaks per megapixel, angle in
//                           degrees from vertical, length in pixels,
//                           intensity as additive brightness
//   blur{radius}            box radius in pixels (rounded)
//   none
struct DegradationSpec {
  DegradationKind kind = DegradationKind::kNone;
  std::map<std::string, double> params;

  // Parses the tag form produced by to_string(), e.g. "noise{sigma=25}".
  static DegradationSpec parse(const std::string& tag);
  static DegradationSpec noise(double sigma);
  static DegradationSpec rain(double density, double angle);
  static DegradationSpec blur(double radius);
  static DegradationSpec none() { return {}; }

  std::string to_string() const;
  std::string kind_name() const;
  double param(const std::string& name) const;
  // Throws ConfigError for unknown parameter names and ValidationError for
  // negative values.
  void validate() const;
  bool is_identity() const;

  bool operator==(const DegradationSpec&) const = default;
};

DegradationKind parse_kind(const std::string& name);

struct ImagePair {
  std::string id;
  Image lq;
  Image hq;
  DegradationSpec degradation;
  std::uint64_t seed = 0;
};

// Checks the ImagePair invariants; throws ValidationError.
void validate_pair(const ImagePair& pair);

// Apply `spec` to a clean image. Output has the same shape, is clamped to
// [0, 1] and depends only on (img, spec, seed).
Image degrade(const Image& img, const DegradationSpec& spec, std::uint64_t seed);

struct ManifestEntry {
  std::string id;
  std::string lq_path;  // relative to the manifest directory unless absolute
  std::string hq_path;
  DegradationSpec degradation;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  std::optional<double> score;

  bool operator==(const ManifestEntry&) const = default;
};

inline constexpr int kManifestVersion = 1;

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  int version = kManifestVersion;
  // Directory relative paths resolve against. Not serialized.
  std::filesystem::path root;

  std::size_t size() const noexcept { return entries.size(); }
  std::filesystem::path resolve(const std::string& rel) const;
  // Index of `id` in entry order; throws ValidationError when absent.
  std::size_t index_of(const std::string& id) const;
  bool operator==(const CorpusManifest& o) const {
    return entries == o.entries && seed == o.seed && version == o.version;
  }
};

// JSON-lines: a header record followed by one record per entry.
void save_manifest(const CorpusManifest& manifest,
                   const std::filesystem::path& path);
std::string manifest_to_string(const CorpusManifest& manifest);
// Validates unique ids and that every referenced file exists.
CorpusManifest load_manifest(const std::filesystem::path& path);

ImagePair load_pair(const CorpusManifest& manifest, std::size_t index);
std::vector<ImagePair> load_pairs(const CorpusManifest& manifest);

// Writes PNGs for `pairs` under `dir` (lq/ and hq/) and returns a manifest
// rooted at `dir`. The manifest file itself is written as dir/manifest.jsonl.
CorpusManifest write_pairs(const std::vector<ImagePair>& pairs,
                           const std::filesystem::path& dir,
                           std::uint64_t seed);

struct MixComponent {
  DegradationSpec spec;
  double fraction = 0.0;
};

// Largest-remainder apportionment of `count` items across `fractions`.
std::vector<std::size_t> apportion(const std::vector<double>& fractions,
                                   std::size_t count);

struct SynthOptions {
  std::vector<MixComponent> mix;
  std::size_t count = 0;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;
  std::string id_prefix;
};

// Generates a procedural clean/degraded corpus under `dir` and writes
// dir/manifest.jsonl. Each entry's randomness is keyed by (seed, index).
CorpusManifest synth_corpus(const SynthOptions& options,
                            const std::filesystem::path& dir);

// In-memory variant used by tests and benchmarks (no files).
std::vector<ImagePair> synth_pairs(const SynthOptions& options);

}  // namespace distillir::corpus
