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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "distillir/nn/graph.hpp"

namespace distillir::nn {

// Parameter blob layout (little-endian):
//   8 bytes  magic "DIRBLOB\0"
//   u32      format version
//   u64      header length L
//   L bytes  JSON header {"kind", "config", "tensors": [{"name", "shape"}]}
//   float32  tensor data in header order
inline constexpr std::uint32_t kBlobVersion = 1;

void save_parameters(const std::filesystem::path& path, const ParameterList& params,
                     const std::string& kind, const nlohmann::json& config);

// Reads the header only (to rebuild a model before loading weights).
nlohmann::json read_blob_header(const std::filesystem::path& path);

// Loads values into `params`; names, shapes and kind must match. Returns
// the stored config echo.
nlohmann::json load_parameters(const std::filesystem::path& path,
                               const ParameterList& params, const std::string& kind);

}  // namespace distillir::nn
