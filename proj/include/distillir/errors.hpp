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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distillir {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses carry the category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or violated data invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unknown or malformed configuration (unknown degradation kind, unknown
// config key, bad enum value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Optimization produced a non-finite loss. `step` is the step (or epoch)
// index at which it was observed.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Training cannot proceed for a reason other than divergence (for example
// degenerate regression labels).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Raised by the pipeline when a stage fails; wraps the original message.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace distillir
