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

#include "distillir/nn/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "distillir/errors.hpp"

namespace distillir::nn {
namespace {

constexpr std::array<char, 8> kMagic{'D', 'I', 'R', 'B', 'L', 'O', 'B', '\0'};

static_assert(std::endian::native == std::endian::little,
              "parameter blobs assume a little-endian host");

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

nlohmann::json read_header(std::ifstream& in, const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("'" + path.string() + "' is not a parameter blob");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kBlobVersion) {
    throw ValidationError("unsupported blob version " + std::to_string(version));
  }
  const auto len = read_pod<std::uint64_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("truncated blob '" + path.string() + "'");
  return nlohmann::json::parse(text);
}

}  // namespace

void save_parameters(const std::filesystem::path& path, const ParameterList& params,
                     const std::string& kind, const nlohmann::json& config) {
  nlohmann::json header;
  header["kind"] = kind;
  header["config"] = config;
  header["tensors"] = nlohmann::json::array();
  for (const Parameter* p : params) {
    header["tensors"].push_back({{"name", p->name}, {"shape", p->value.shape()}});
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write blob '" + path.string() + "'");
  out.write(kMagic.data(), kMagic.size());
  write_pod<std::uint32_t>(out, kBlobVersion);
  write_pod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.numel() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing blob '" + path.string() + "'");
}

nlohmann::json read_blob_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open blob '" + path.string() + "'");
  return read_header(in, path);
}

nlohmann::json load_parameters(const std::filesystem::path& path,
                               const ParameterList& params, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open blob '" + path.string() + "'");
  const auto header = read_header(in, path);
  if (header.at("kind") != kind) {
    throw ValidationError("blob kind '" + header.at("kind").get<std::string>() +
                          "' does not match '" + kind + "'");
  }
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size()) throw ValidationError("blob tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].at("name") != params[i]->name ||
        tensors[i].at("shape").get<std::vector<int>>() != params[i]->value.shape()) {
      throw ValidationError("blob tensor '" + tensors[i].at("name").get<std::string>() +
                            "' does not match the model");
    }
  }
  for (Parameter* p : params) {
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.numel() * sizeof(float)));
  }
  if (!in) throw IoError("truncated blob '" + path.string() + "'");
  return header.at("config");
}

}  // namespace distillir::nn
