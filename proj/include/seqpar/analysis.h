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

#ifndef SEQPAR_ANALYSIS_H_
#define SEQPAR_ANALYSIS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqpar/model.h"
#include "seqpar/runtime/ledger.h"
#include "seqpar/runtime/network.h"
#include "seqpar/strategy.h"

namespace seqpar {

// round(num / den) with halves rounded up; den > 0, num >= 0.
int64_t RoundHalfUp(int64_t num, int64_t den);

// Per-device per-block communicated tokens as tabulated: (P-1)N/P rounded for
// voltage, (P-1)L for prism, 4(P-1)N/P rounded for tensor parallelism, 0 for
// a single device.
int64_t PdplcTokens(Strategy strategy, const TransformerConfig& config);

// Exact feature elements worker `device` sends per block, using the actual
// partition sizes. Unicast counts every peer copy; broadcast counts one.
int64_t CommElements(Strategy strategy, const TransformerConfig& config, int device,
                     CommMode mode = CommMode::kUnicast);

// Closed-form prediction of the ledger RunDistributed records, entry by entry.
CommLedger PredictLedger(Strategy strategy, const TransformerConfig& config, CommMode mode,
                         int bytes_per_scalar);

struct FlopEstimate {
  // per_block[p - 1][b]: worker p computing block b, including the landmarks
  // it derives for block b + 1 and the closing layernorm after the last block.
  std::vector<std::vector<int64_t>> per_block;
  std::vector<int64_t> per_device;  // per_block summed over blocks
  int64_t master = 0;               // block-0 landmarks computed by the master
  int64_t total = 0;                // workers plus master

  // Worker FLOPs averaged over the P devices.
  double MeanPerDevice() const;
};

// Mirrors the kernel FLOP charges exactly for single, voltage and prism.
// Tensor parallelism splits heads and FFN columns across devices and
// replicates layernorms and residual adds.
FlopEstimate FlopsForward(Strategy strategy, const TransformerConfig& config);

struct LatencyPoint {
  double bandwidth_bps = 0.0;
  double latency_s = 0.0;
};

// n_blocks x (compute + feature bytes x 8 / bandwidth + messages x latency),
// with per-device means. Headers and counts are ignored so the low-bandwidth
// limit isolates the token ratio.
double ForwardLatency(Strategy strategy, const TransformerConfig& config, const NetworkModel& net,
                      CommMode mode, double device_flops_per_second);

std::vector<LatencyPoint> LatencyCurve(Strategy strategy, const TransformerConfig& config,
                                       const NetworkModel& net, CommMode mode,
                                       double device_flops_per_second,
                                       std::span<const double> bandwidths_bps);

// `count` bandwidths spaced geometrically over [lo, hi].
std::vector<double> GeometricSweep(double lo_bps, double hi_bps, int count);

enum class CrSource { kMeasured, kNominal };

struct CostReport {
  Strategy strategy = Strategy::kSingle;
  int partitions = 1;
  int64_t landmarks = 0;  // 0 unless prism
  double total_gflops = 0.0;
  double per_device_gflops = 0.0;
  double comp_speedup_pct = 0.0;  // 1 - per_device / single
  int64_t pdplc_tokens = 0;
  // Voltage tokens over this strategy's tokens. Absent for a single device.
  std::optional<double> cr;
  CrSource cr_source = CrSource::kMeasured;
  std::optional<double> comm_speedup_pct;  // 1 - 1/CR
};

CostReport MakeCostReport(Strategy strategy, const TransformerConfig& config);

// Prism with L = floor(N / (cr * P)); CR and speed-up are reported at the
// nominal `cr` rather than the ratio the rounded L achieves.
CostReport MakeNominalCrReport(const TransformerConfig& config, double cr);

struct ModelPreset {
  std::string name;
  TransformerConfig config;
  // Sequence length not stated by the source tables; chosen to match them.
  bool inferred = false;
};

// vit-base, bert-base and gpt2-base with P = 1 and L = 1.
std::span<const ModelPreset> Presets();
// nullopt for an unknown name.
std::optional<ModelPreset> FindPreset(std::string_view name);

}  // namespace seqpar

#endif  // SEQPAR_ANALYSIS_H_
