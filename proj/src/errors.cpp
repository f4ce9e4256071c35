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

#include "distillir/errors.hpp"

namespace distillir {

DivergenceError::DivergenceError(const std::string& what, std::size_t step)
    : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

StageError::StageError(std::string stage, const std::string& cause)
    : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

}  // namespace distillir
