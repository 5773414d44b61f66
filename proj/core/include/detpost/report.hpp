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

#ifndef DETPOST_REPORT_HPP_
#define DETPOST_REPORT_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detpost/evaluation.hpp"

namespace detpost {

enum class ReportFormat { kTable, kCsv, kJson };

/// Renders evaluation reports.
///
/// kTable prints one row per report under the columns
/// `Method | mAP | S@<t> ...` with one decimal per cell and a trailing `*` on
/// the best displayed value of each column (ties are all marked). kCsv and
/// kJson keep full precision. Every report must use the same FP targets;
/// an empty list is a ContractViolation.
std::string render_report(std::span<const EvalReport> reports, ReportFormat format);

/// JSON form of one report:
/// {"method": str, "map": num, "sensitivity": [{"fp": num, "value": num}, ...]}
std::string report_to_json(const EvalReport& report);

/// Accepts one report object or an array of them.
std::vector<EvalReport> parse_reports_json(std::string_view text, const std::string& source);

std::optional<ReportFormat> parse_report_format(std::string_view name);

}  // namespace detpost

#endif  // DETPOST_REPORT_HPP_
