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
#include <random>
#include <string_view>

namespace distillir {

using Rng = std::mt19937_64;

// Stable 64-bit FNV-1a hash; used for seeding named sub-streams and for
// content-addressing pipeline stages.
std::uint64_t fnv1a64(std::string_view text,
                      std::uint64_t basis = 14695981039346656037ULL) noexcept;

// Derive an independent generator from a parent seed and a stream name
// (stage name, entry index...). Depends only on its arguments.
Rng substream(std::uint64_t seed, std::string_view name,
              std::uint64_t index = 0);
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                             std::uint64_t index = 0);

}  // namespace distillir
