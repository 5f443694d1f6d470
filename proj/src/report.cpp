/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cacp/report.hpp"

#include <algorithm>
#include <cstdio>

#include "cacp/binary_io.hpp"
#include "cacp/error.hpp"
#include "json.hpp"

namespace cacp {

using json = nlohmann::json;

std::string ReportToJson(const CompressionReport& r) {
  const json plan = json::parse(PlanToJson(r.plan));
  const json doc = {{"beta", r.beta},
                    {"method", r.method},
                    {"accuracy", r.accuracy},
                    {"base_accuracy", r.base_accuracy},
                    {"flops_drop_pct", r.flops_drop_pct},
                    {"params_drop_pct", r.params_drop_pct},
                    {"rounding_slack", r.rounding_slack},
                    {"plan", plan}};
  return doc.dump(1) + "\n";
}

CompressionReport ReportFromJson(std::string_view text) {
  try {
    const json doc = json::parse(text);
    CompressionReport r;
    r.beta = doc.at("beta").get<double>();
    r.method = doc.at("method").get<std::string>();
    r.accuracy = doc.at("accuracy").get<double>();
    r.base_accuracy = doc.at("base_accuracy").get<double>();
    r.flops_drop_pct = doc.at("flops_drop_pct").get<double>();
    r.params_drop_pct = doc.at("params_drop_pct").get<double>();
    r.rounding_slack = doc.at("rounding_slack").get<double>();
    r.plan = PlanFromJson(doc.at("plan").dump());
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, std::string("malformed report: ") + e.what());
  }
}

void SaveReport(const CompressionReport& report, const std::filesystem::path& path) {
  io::WriteFile(path, ReportToJson(report));
}

CompressionReport LoadReport(const std::filesystem::path& path) {
  return ReportFromJson(io::ReadFile(path));
}

namespace {

struct Row {
  std::string rate;
  std::string method;
  std::string acc;
  std::string flops;
  std::string params;
};

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

int MethodRank(const std::string& m) {
  if (m == "cacp") return 0;
  if (m == "uniform") return 1;
  if (m == "oracle") return 2;
  return 3;
}

std::string MethodLabel(const std::string& m) {
  if (m == "cacp") return "CACP";
  if (m == "uniform") return "Uniform";
  if (m == "oracle") return "Oracle";
  return m;
}

std::vector<Row> BuildRows(std::vector<CompressionReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kInvalidConfig, "no reports to tabulate");
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    if (a.beta != b.beta) return a.beta < b.beta;
    return MethodRank(a.method) < MethodRank(b.method);
  });
  std::vector<Row> rows;
  rows.push_back({"0", "Baseline", Fixed(100.0 * reports.front().base_accuracy, 2), Fixed(0.0, 1),
                  Fixed(0.0, 1)});
  for (const auto& r : reports) {
    rows.push_back({Fixed(r.beta, 1), MethodLabel(r.method), Fixed(100.0 * r.accuracy, 2),
                    Fixed(r.flops_drop_pct, 1), Fixed(r.params_drop_pct, 1)});
  }
  return rows;
}

}  // namespace

std::string FormatTable(std::vector<CompressionReport> reports) {
  const std::vector<Row> rows = BuildRows(std::move(reports));
  const std::vector<std::string> header{"Compression Rate", "Method", "Acc.(%)", "#FLOPs↓(%)",
                                        "#Params↓(%)"};
  // Display widths; the arrow is one column but three bytes.
  std::vector<std::size_t> width{16, 8, 7, 10, 11};
  for (const auto& r : rows) {
    width[1] = std::max(width[1], r.method.size());
  }
  auto pad = [](const std::string& s, std::size_t w, std::size_t display) {
    return s + std::string(w > display ? w - display : 0, ' ');
  };
  auto rule = [&]() {
    std::string line = "+";
    for (auto w : width) line += std::string(w + 2, '-') + "+";
    return line + "\n";
  };
  std::string out = rule();
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::size_t display = (i == 3 || i == 4) ? header[i].size() - 2 : header[i].size();
    out += " " + pad(header[i], width[i], display) + " |";
  }
  out += "\n" + rule();
  std::string group;
  for (const auto& r : rows) {
    if (!group.empty() && r.rate != group) out += rule();
    const bool first = r.rate != group;
    group = r.rate;
    const std::string cells[5] = {first ? r.rate : "", r.method, r.acc, r.flops, r.params};
    out += "|";
    for (std::size_t i = 0; i < 5; ++i) out += " " + pad(cells[i], width[i], cells[i].size()) + " |";
    out += "\n";
  }
  return out + rule();
}

std::string FormatCsv(std::vector<CompressionReport> reports) {
  std::string out = "compression_rate,method,acc_pct,flops_drop_pct,params_drop_pct\n";
  for (const auto& r : BuildRows(std::move(reports))) {
    out += r.rate + "," + r.method + "," + r.acc + "," + r.flops + "," + r.params + "\n";
  }
  return out;
}

}  // namespace cacp
