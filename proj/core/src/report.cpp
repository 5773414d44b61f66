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

#include "detpost/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "detpost/error.hpp"
#include "detpost/io.hpp"
#include "json.hpp"

namespace detpost {

namespace {

using nlohmann::ordered_json;

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string target_label(double fp) { return "S@" + format_double(fp); }

ordered_json to_json(const EvalReport& r) {
  ordered_json j;
  j["method"] = r.method_name;
  j["map"] = r.map_percent;
  ordered_json s = ordered_json::array();
  for (const auto& v : r.sensitivity_percent) s.push_back({{"fp", v.fp_target}, {"value", v.sensitivity}});
  j["sensitivity"] = std::move(s);
  return j;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_table(std::span<const EvalReport> reports) {
  std::vector<std::string> header = {"Method", "mAP"};
  for (const auto& s : reports.front().sensitivity_percent) header.push_back(target_label(s.fp_target));
  const std::size_t cols = header.size();

  // cells[row][col]; numeric columns start at 1.
  std::vector<std::vector<std::string>> cells;
  std::vector<std::vector<double>> shown;
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.method_name, one_decimal(r.map_percent)};
    for (const auto& s : r.sensitivity_percent) row.push_back(one_decimal(s.sensitivity));
    std::vector<double> values;
    for (std::size_t c = 1; c < cols; ++c) values.push_back(std::stod(row[c]));
    cells.push_back(std::move(row));
    shown.push_back(std::move(values));
  }
  for (std::size_t c = 1; c < cols; ++c) {
    double best = -1.0;
    for (const auto& v : shown) best = std::max(best, v[c - 1]);
    for (std::size_t r = 0; r < cells.size(); ++r) {
      if (shown[r][c - 1] == best) cells[r][c] += "*";
    }
  }

  std::vector<std::size_t> width(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& row) {
    out << '|';
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out << ' ' << (c == 0 ? row[c] + pad : pad + row[c]) << " |";
    }
    out << '\n';
  };
  emit(header);
  out << '|';
  for (std::size_t c = 0; c < cols; ++c) out << std::string(width[c] + 2, '-') << '|';
  out << '\n';
  for (const auto& row : cells) emit(row);
  return out.str();
}

std::string render_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "method,mAP";
  for (const auto& s : reports.front().sensitivity_percent) out << ',' << target_label(s.fp_target);
  out << '\n';
  for (const auto& r : reports) {
    out << csv_escape(r.method_name) << ',' << format_double(r.map_percent);
    for (const auto& s : r.sensitivity_percent) out << ',' << format_double(s.sensitivity);
    out << '\n';
  }
  return out.str();
}

EvalReport report_from_json(const nlohmann::json& j, const std::string& source) {
  const auto bad = [&](const std::string& field, const std::string& msg) {
    return ValidationError(source, 0, field, msg);
  };
  if (!j.is_object()) throw bad("", "report must be a JSON object");
  EvalReport r;
  if (!j.contains("method") || !j["method"].is_string()) throw bad("method", "expected a string");
  r.method_name = j["method"].get<std::string>();
  if (!j.contains("map") || !j["map"].is_number()) throw bad("map", "expected a number");
  r.map_percent = j["map"].get<double>();
  if (!(r.map_percent >= 0.0 && r.map_percent <= 100.0)) throw bad("map", "percentage outside [0, 100]");
  if (!j.contains("sensitivity") || !j["sensitivity"].is_array()) {
    throw bad("sensitivity", "expected an array");
  }
  for (const auto& e : j["sensitivity"]) {
    if (!e.is_object() || !e.contains("fp") || !e["fp"].is_number() || !e.contains("value") ||
        !e["value"].is_number()) {
      throw bad("sensitivity", "entries must be {\"fp\": num, \"value\": num}");
    }
    const double value = e["value"].get<double>();
    if (!(value >= 0.0 && value <= 100.0)) throw bad("sensitivity", "percentage outside [0, 100]");
    r.sensitivity_percent.push_back({e["fp"].get<double>(), value});
  }
  return r;
}

}  // namespace

std::string render_report(std::span<const EvalReport> reports, ReportFormat format) {
  if (reports.empty()) throw ContractViolation("render_report: no reports");
  const auto& targets = reports.front().sensitivity_percent;
  for (const auto& r : reports) {
    const bool same = r.sensitivity_percent.size() == targets.size() &&
                      std::equal(targets.begin(), targets.end(), r.sensitivity_percent.begin(),
                                 [](const SensitivityAt& a, const SensitivityAt& b) {
                                   return a.fp_target == b.fp_target;
                                 });
    if (!same) throw ContractViolation("render_report: reports use different FP targets");
  }
  switch (format) {
    case ReportFormat::kTable:
      return render_table(reports);
    case ReportFormat::kCsv:
      return render_csv(reports);
    case ReportFormat::kJson: {
      ordered_json arr = ordered_json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      return arr.dump(2) + "\n";
    }
  }
  throw ContractViolation("render_report: unknown format");
}

std::string report_to_json(const EvalReport& report) { return to_json(report).dump(2) + "\n"; }

std::vector<EvalReport> parse_reports_json(std::string_view text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, "", std::string("malformed JSON: ") + e.what());
  }
  std::vector<EvalReport> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(report_from_json(e, source));
  } else {
    out.push_back(report_from_json(j, source));
  }
  return out;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::kTable;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

}  // namespace detpost
