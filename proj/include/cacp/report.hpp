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

#ifndef CACP_REPORT_HPP_
#define CACP_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "cacp/driver.hpp"

namespace cacp {

std::string ReportToJson(const CompressionReport& report);
CompressionReport ReportFromJson(std::string_view text);
void SaveReport(const CompressionReport& report, const std::filesystem::path& path);
CompressionReport LoadReport(const std::filesystem::path& path);

/// Rows grouped by rate (ascending), methods ordered cacp, uniform, oracle, with
/// a leading rate-0 "Baseline" row for the unpruned model.
std::string FormatTable(std::vector<CompressionReport> reports);
/// Same rows and numbers as FormatTable, comma separated.
std::string FormatCsv(std::vector<CompressionReport> reports);

}  // namespace cacp

#endif  // CACP_REPORT_HPP_
