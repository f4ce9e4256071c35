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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillir/diagnostics.hpp"

namespace distillir::report {

// A results table with pre-formatted cells (see trainer::format_metric).
struct ResultsTable {
  std::string name;  // file stem: results_<name>.csv
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

struct RunReport {
  std::string run_id;
  nlohmann::json config = nlohmann::json::object();
  std::vector<ResultsTable> tables;
  std::vector<diagnostics::CurveData> curves;
  // Other run artifacts (manifests, checkpoints, logs), name -> path
  // relative to the report directory.
  std::map<std::string, std::string> artifacts;
};

// "kind,metric,x,y" followed by every point of every curve in order.
std::string curves_csv(const std::vector<diagnostics::CurveData>& curves);

// Writes results_<name>.csv per table, curves.csv and report.json (the
// index) under `dir`. Output depends only on `report`, so emitting the same
// report twice gives identical bytes. Throws IoError if `dir` is unwritable.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace distillir::report
