// Copyright 2026 The QCBNN Authors
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
#include <iosfwd>
#include <string>
#include <vector>

namespace qcbnn {

/// Half-width of the window around zero used for the weight-density peak.
inline constexpr double kPeakNearZeroHalfWidth = 0.1;

struct ReportResult {
  std::vector<std::filesystem::path> written;  // CSV and SVG files, in creation order
  std::vector<std::string> notices;            // skipped figures and missing inputs
};

/// Scans `results_dir` for `<cell>/seed_<k>/` runs and writes aggregate CSV
/// and SVG figures into `results_dir/report/`. Figures whose inputs are
/// missing are skipped with a notice naming the absent file.
ReportResult run_report(const std::filesystem::path& results_dir, std::ostream* log = nullptr);

}  // namespace qcbnn
