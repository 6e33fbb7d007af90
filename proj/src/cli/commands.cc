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

#include "seqpar/cli/commands.h"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "seqpar/error.h"
#include "seqpar/runtime/runtime.h"

namespace seqpar::cli {
namespace {

bool LooksNumeric(const std::string& cell) {
  return !cell.empty() && (std::isdigit(static_cast<unsigned char>(cell.front())) != 0 ||
                           ((cell.front() == '-' || cell.front() == '+') && cell.size() > 1 &&
                            std::isdigit(static_cast<unsigned char>(cell[1])) != 0));
}

std::string CsvCell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::string Fixed2(double v) { return fmt::format("{:.2f}", v); }

std::string Optional2(const std::optional<double>& v) { return v ? Fixed2(*v) : "-"; }

void WriteFile(const RunSettings& run, const std::string& name, const std::string& text) {
  if (run.out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(run.out_dir, ec);
  const std::filesystem::path path = std::filesystem::path(run.out_dir) / name;
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file || !(file << text)) {
    throw Error(ErrorCode::kConfig, fmt::format("cannot write {}", path.string()));
  }
}

TransformerConfig At(TransformerConfig c, int partitions, int64_t landmarks) {
  c.n_partitions = partitions;
  c.landmarks = landmarks;
  return c;
}

}  // namespace

std::string Table::Aligned() const {
  std::vector<size_t> width(header.size());
  for (size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells, bool is_header) {
    std::string out;
    for (size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += "  ";
      const bool right = !is_header && LooksNumeric(cells[c]);
      out += right ? fmt::format("{:>{}}", cells[c], width[c])
                   : fmt::format("{:<{}}", cells[c], width[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + '\n';
  };
  std::string out = line(header, true);
  size_t rule = 0;
  for (size_t w : width) rule += w;
  out += std::string(rule + 2 * (width.empty() ? 0 : width.size() - 1), '-') + '\n';
  for (const auto& row : rows) out += line(row, false);
  return out;
}

std::string Table::Csv() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ',';
      out += CsvCell(cells[c]);
    }
    return out + '\n';
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

std::vector<CompareRow> BuildCompareRows(const ExperimentConfig& config) {
  std::vector<CompareRow> rows;
  for (const Experiment& ex : config.experiments) {
    auto push = [&](CostReport r) { rows.push_back({ex.name, ex.model, ex.inferred, r}); };
    for (Strategy s : ex.strategies) {
      if (s == Strategy::kSingle) {
        push(MakeCostReport(s, At(ex.config, 1, 1)));
        continue;
      }
      for (int p : ex.partitions) {
        if (s != Strategy::kPrism) {
          push(MakeCostReport(s, At(ex.config, p, 1)));
          continue;
        }
        for (int64_t l : ex.LandmarksFor(p)) push(MakeCostReport(s, At(ex.config, p, l)));
      }
    }
    for (int p : ex.partitions) {
      for (double cr : ex.compression_rates) push(MakeNominalCrReport(At(ex.config, p, 1), cr));
    }
  }
  return rows;
}

Table CompareTable(std::span<const CompareRow> rows) {
  Table t;
  t.header = {"experiment",
              "model",
              "strategy",
              "P",
              "L",
              "gflops_total",
              "gflops_per_device",
              "comp_speedup_pct",
              "pdplc_tokens",
              "cr",
              "cr_source",
              "comm_speedup_pct",
              "inferred_n"};
  for (const CompareRow& row : rows) {
    const CostReport& r = row.report;
    t.rows.push_back(
        {row.experiment, row.model, std::string(StrategyName(r.strategy)),
         fmt::format("{}", r.partitions), r.landmarks > 0 ? fmt::format("{}", r.landmarks) : "-",
         Fixed2(r.total_gflops), Fixed2(r.per_device_gflops), Fixed2(r.comp_speedup_pct),
         fmt::format("{}", r.pdplc_tokens), Optional2(r.cr),
         !r.cr                               ? "-"
         : r.cr_source == CrSource::kNominal ? "nominal"
                                             : "measured",
         Optional2(r.comm_speedup_pct), row.inferred ? "yes" : "no"});
  }
  return t;
}

Table LatencyTable(const ExperimentConfig& config) {
  const RunSettings& run = config.run;
  NetworkModel net;
  net.per_message_latency_s = run.per_message_latency_s;
  net.bytes_per_scalar = run.bytes_per_scalar;
  std::vector<double> sweep = GeometricSweep(run.bandwidth_min_mbps * 1e6,
                                             run.bandwidth_max_mbps * 1e6, run.bandwidth_points);
  Table t;
  t.header = {"experiment", "strategy", "P", "L", "mode", "bandwidth_mbps", "latency_ms"};
  for (const CompareRow& row : BuildCompareRows(config)) {
    const CostReport& r = row.report;
    const Experiment& ex =
        *std::find_if(config.experiments.begin(), config.experiments.end(),
                      [&](const Experiment& e) { return e.name == row.experiment; });
    const TransformerConfig c = At(ex.config, r.partitions, std::max<int64_t>(r.landmarks, 1));
    for (const LatencyPoint& pt :
         LatencyCurve(r.strategy, c, net, run.mode, run.device_flops_per_second, sweep)) {
      t.rows.push_back(
          {row.experiment, std::string(StrategyName(r.strategy)), fmt::format("{}", r.partitions),
           r.landmarks > 0 ? fmt::format("{}", r.landmarks) : "-",
           std::string(CommModeName(run.mode)), fmt::format("{:.3f}", pt.bandwidth_bps / 1e6),
           fmt::format("{:.6f}", pt.latency_s * 1e3)});
    }
  }
  return t;
}

Table VerifyTable(const VerifyReport& report) {
  Table t;
  t.header = {"property", "cases", "max_error", "tolerance", "status", "detail"};
  for (const PropertyResult& r : report.properties) {
    t.rows.push_back({r.name, fmt::format("{}", r.cases), fmt::format("{:.3e}", r.max_error),
                      fmt::format("{:.1e}", r.tolerance), r.passed ? "PASS" : "FAIL", r.detail});
  }
  return t;
}

int CmdVerify(const ExperimentConfig& config, std::ostream& out) {
  const VerifyReport report = RunVerifySuite(config.verify, config.run.seed);
  const Table t = VerifyTable(report);
  const auto passed = std::count_if(report.properties.begin(), report.properties.end(),
                                    [](const PropertyResult& r) { return r.passed; });
  out << t.Aligned()
      << fmt::format("\nverify: {}/{} properties passed (seed {}, fault {})\n", passed,
                     report.properties.size(), config.run.seed, FaultName(config.verify.fault));
  WriteFile(config.run, "verify.csv", t.Csv());
  return report.ok() ? kExitOk : kExitVerifyFailed;
}

int CmdCompare(const ExperimentConfig& config, std::ostream& out) {
  const std::vector<CompareRow> rows = BuildCompareRows(config);
  const Table t = CompareTable(rows);
  out << t.Aligned();
  WriteFile(config.run, "compare.csv", t.Csv());
  return kExitOk;
}

int CmdLatency(const ExperimentConfig& config, std::ostream& out) {
  const Table t = LatencyTable(config);
  out << t.Aligned();
  WriteFile(config.run, "latency.csv", t.Csv());
  return kExitOk;
}

}  // namespace seqpar::cli
