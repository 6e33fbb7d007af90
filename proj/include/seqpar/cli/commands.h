// Copyright 2026 The seqpar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQPAR_CLI_COMMANDS_H_
#define SEQPAR_CLI_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

#include "seqpar/analysis.h"
#include "seqpar/cli/experiment_config.h"
#include "seqpar/cli/verify_suite.h"

namespace seqpar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfigError = 2;

// A rendered table: every cell is already text.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Columns padded to their widest cell, text left-aligned, numbers right.
  std::string Aligned() const;
  // RFC 4180 style, header first, '\n' line ends.
  std::string Csv() const;
};

struct CompareRow {
  std::string experiment;
  std::string model;
  bool inferred = false;
  CostReport report;
};

// One row per (strategy, P, L) in config order, then the nominal-CR rows.
std::vector<CompareRow> BuildCompareRows(const ExperimentConfig& config);
Table CompareTable(std::span<const CompareRow> rows);

// (bandwidth, latency) records for every compare row at the configured sweep.
Table LatencyTable(const ExperimentConfig& config);

Table VerifyTable(const VerifyReport& report);

// Each command prints to `out`, writes <out_dir>/<verb>.csv when out_dir is
// set, and returns the process exit code.
int CmdVerify(const ExperimentConfig& config, std::ostream& out);
int CmdCompare(const ExperimentConfig& config, std::ostream& out);
int CmdLatency(const ExperimentConfig& config, std::ostream& out);

}  // namespace seqpar::cli

#endif  // SEQPAR_CLI_COMMANDS_H_
