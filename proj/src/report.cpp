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

#include "distillir/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "distillir/errors.hpp"

namespace distillir::report {
namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.12g}", v);
}

std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string ResultsTable::to_csv() const {
  std::string s = join(columns) + "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw ValidationError("results table '" + name + "' has a row of the wrong width");
    }
    s += join(row) + "\n";
  }
  return s;
}

std::string curves_csv(const std::vector<diagnostics::CurveData>& curves) {
  std::string s = "kind,metric,x,y\n";
  for (const auto& c : curves) {
    const std::string kind = diagnostics::to_string(c.kind);
    for (const auto& p : c.points) {
      s += fmt::format("{},{},{},{}\n", kind, c.metric, number(p.x), number(p.y));
    }
  }
  return s;
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory " + dir.string() + ": " + ec.message());

  nlohmann::json index{{"run_id", report.run_id},
                       {"config", report.config},
                       {"artifacts", report.artifacts}};
  index["tables"] = nlohmann::json::array();
  for (const auto& t : report.tables) {
    const std::string file = "results_" + t.name + ".csv";
    write_file(dir / file, t.to_csv());
    index["tables"].push_back(
        {{"name", t.name}, {"file", file}, {"columns", t.columns}, {"rows", t.rows.size()}});
  }
  write_file(dir / "curves.csv", curves_csv(report.curves));
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : report.curves) {
    curves.push_back({{"kind", diagnostics::to_string(c.kind)},
                      {"metric", c.metric},
                      {"points", c.points.size()},
                      {"sources", c.sources}});
  }
  index["curves"] = {{"file", "curves.csv"}, {"series", curves}};
  write_file(dir / "report.json", index.dump(2) + "\n");
}

}  // namespace distillir::report
