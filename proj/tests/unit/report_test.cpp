// Copyright 2026 The detpost Authors
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

#include <gtest/gtest.h>

#include "detpost/error.hpp"
#include "detpost/report.hpp"
#include "oracles.hpp"

namespace detpost {
namespace {

EvalReport row(std::string name, double map, std::vector<double> s) {
  const std::vector<double> targets = {0.5, 1, 2, 4, 6, 8, 16};
  EvalReport r{std::move(name), map, {}};
  for (std::size_t i = 0; i < s.size(); ++i) r.sensitivity_percent.push_back({targets[i], s[i]});
  return r;
}

const EvalReport kVfnet = row("VFNet", 51.1, {45.7, 56.8, 67.9, 78.7, 82.6, 84.9, 86.2});
const EvalReport kOneStage = row("Ensemble (One-Stage)", 52.3, {46.5, 58.0, 68.9, 78.7, 82.7, 85.2, 86.4});

TEST(ReportTest, TableRowsAndBestMarkers) {
  const std::vector<EvalReport> reports = {kVfnet, kOneStage};
  const auto cells = oracle::table_cells(render_report(reports, ReportFormat::kTable));
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0], (std::vector<std::string>{"Method", "mAP", "S@0.5", "S@1", "S@2", "S@4", "S@6", "S@8", "S@16"}));
  EXPECT_EQ(cells[1], (std::vector<std::string>{"VFNet", "51.1", "45.7", "56.8", "67.9", "78.7*", "82.6", "84.9",
                                                "86.2"}));
  EXPECT_EQ(cells[2], (std::vector<std::string>{"Ensemble (One-Stage)", "52.3*", "46.5*", "58.0*", "68.9*", "78.7*",
                                                "82.7*", "85.2*", "86.4*"}));
}

TEST(ReportTest, SingleRowIsBestEverywhere) {
  const std::vector<EvalReport> reports = {kVfnet};
  const auto cells = oracle::table_cells(render_report(reports, ReportFormat::kTable));
  ASSERT_EQ(cells.size(), 2u);
  for (std::size_t c = 1; c < cells[1].size(); ++c) EXPECT_EQ(cells[1][c].back(), '*');
}

TEST(ReportTest, BestIsJudgedOnDisplayedValue) {
  const std::vector<EvalReport> reports = {row("a", 50.04, {1}), row("b", 50.01, {2})};
  const auto cells = oracle::table_cells(render_report(reports, ReportFormat::kTable));
  EXPECT_EQ(cells[1][1], "50.0*");
  EXPECT_EQ(cells[2][1], "50.0*");
}

TEST(ReportTest, JsonAndCsvAreLossless) {
  const std::vector<EvalReport> reports = {row("x", 100.0 / 3.0, {2.0 / 3.0, 0.1 + 0.2, 1, 2, 3, 4, 5}), kOneStage};
  EXPECT_EQ(parse_reports_json(render_report(reports, ReportFormat::kJson), "t"), reports);
  EXPECT_EQ(parse_reports_json(report_to_json(reports[0]), "t").front(), reports[0]);
  const std::string csv = render_report(reports, ReportFormat::kCsv);
  EXPECT_NE(csv.find("x,33.333333333333336,0.6666666666666666,0.30000000000000004,1,2,3,4,5\n"), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,mAP,S@0.5,S@1,S@2,S@4,S@6,S@8,S@16");
}

TEST(ReportTest, Errors) {
  EXPECT_THROW(render_report({}, ReportFormat::kTable), ContractViolation);
  const std::vector<EvalReport> mixed = {row("a", 1, {1}), row("b", 1, {1, 2})};
  EXPECT_THROW(render_report(mixed, ReportFormat::kTable), ContractViolation);
  EXPECT_THROW(parse_reports_json("{\"method\": 1}", "t"), InputError);
  EXPECT_THROW(parse_reports_json("not json", "t"), InputError);
}

}  // namespace
}  // namespace detpost
