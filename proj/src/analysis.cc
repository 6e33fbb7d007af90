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

#include "seqpar/analysis.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqpar/error.h"
#include "seqpar/flops.h"
#include "seqpar/partition.h"
#include "seqpar/runtime/runtime.h"
#include "seqpar/runtime/wire.h"

namespace seqpar {
namespace {

namespace fc = flop_cost;

int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

// FLOPs of one block for `queries` query rows attending over `keys` rows, with
// the layernorm in front of attention applied to `normed_rows` rows.
struct BlockShape {
  int64_t queries = 0;
  int64_t keys = 0;
  int64_t normed_rows = 0;
  bool scaled = false;  // g-weighted normalization instead of softmax
};

int64_t BlockFlops(const TransformerConfig& c, const BlockShape& s) {
  const int64_t d_model = c.embed_dim, d = c.head_dim, f = c.ffn_dim;
  const int64_t n = s.queries, k = s.keys;
  int64_t head = fc::MatMul(n, d_model, d) + 2 * fc::MatMul(k, d_model, d) + fc::MatMul(n, d, k) +
                 fc::MatMul(n, k, d);
  head += s.scaled ? (fc::kScaledExpPerElement + fc::kWeightedNormalizePerElement) * n * k
                   : (fc::kScalePerElement + fc::kSoftmaxPerElement) * n * k;
  return fc::kLayerNormPerElement * s.normed_rows * d_model + c.n_heads * head +
         fc::MatMul(n, d_model, d_model) + fc::kAddPerElement * n * d_model +
         fc::kLayerNormPerElement * n * d_model + fc::MatMul(n, d_model, f) +
         fc::kGeluPerElement * n * f + fc::MatMul(n, f, d_model) + fc::kAddPerElement * n * d_model;
}

int64_t SegmentMeansFlops(int64_t rows, int64_t landmarks, int64_t cols) {
  int64_t total = 0;
  for (int64_t n_l : SegmentCounts(rows, landmarks)) total += fc::SegmentMean(n_l, cols);
  return total;
}

// Megatron-style split: each device holds n_heads/P heads and ffn/P hidden
// columns (rounded up for the busiest device). Layernorms and residual adds
// run on every device over the full sequence.
int64_t TensorBlockFlops(const TransformerConfig& c) {
  const int64_t n = c.n_tokens, d_model = c.embed_dim, d = c.head_dim;
  const int64_t heads = CeilDiv(c.n_heads, c.n_partitions);
  const int64_t f = CeilDiv(c.ffn_dim, c.n_partitions);
  const int64_t head = 3 * fc::MatMul(n, d_model, d) + fc::MatMul(n, d, n) + fc::MatMul(n, n, d) +
                       (fc::kScalePerElement + fc::kSoftmaxPerElement) * n * n;
  return 2 * fc::kLayerNormPerElement * n * d_model + heads * head +
         fc::MatMul(n, heads * d, d_model) + 2 * fc::kAddPerElement * n * d_model +
         fc::MatMul(n, d_model, f) + fc::kGeluPerElement * n * f + fc::MatMul(n, f, d_model);
}

LedgerEntry Entry(int64_t messages, int64_t elements_per_message, int64_t counts_per_message,
                  int bytes_per_scalar) {
  LedgerEntry e;
  e.messages = messages;
  e.elements = messages * elements_per_message;
  e.count_entries = messages * counts_per_message;
  e.payload_bytes = e.elements * bytes_per_scalar + e.count_entries * kCountBytes;
  e.wire_bytes = e.messages * kHeaderBytes + e.payload_bytes;
  return e;
}

}  // namespace

int64_t RoundHalfUp(int64_t num, int64_t den) { return (2 * num + den) / (2 * den); }

int64_t PdplcTokens(Strategy strategy, const TransformerConfig& config) {
  const int64_t p = config.n_partitions;
  switch (strategy) {
    case Strategy::kSingle:
      return 0;
    case Strategy::kVoltage:
      return RoundHalfUp((p - 1) * config.n_tokens, p);
    case Strategy::kPrism:
      return (p - 1) * config.landmarks;
    case Strategy::kTensorParallel:
      return RoundHalfUp(4 * (p - 1) * config.n_tokens, p);
  }
  return 0;
}

int64_t CommElements(Strategy strategy, const TransformerConfig& config, int device,
                     CommMode mode) {
  const int64_t p = config.n_partitions;
  const int64_t copies = mode == CommMode::kUnicast ? p - 1 : std::min<int64_t>(p - 1, 1);
  switch (strategy) {
    case Strategy::kSingle:
      return 0;
    case Strategy::kVoltage:
      return copies * MakePartitionPlan(config.n_tokens, config.n_partitions).Get(device).size() *
             config.embed_dim;
    case Strategy::kPrism:
      return copies * config.landmarks * config.embed_dim;
    case Strategy::kTensorParallel:
      return RoundHalfUp(4 * (p - 1) * config.n_tokens * config.embed_dim, p);
  }
  return 0;
}

CommLedger PredictLedger(Strategy strategy, const TransformerConfig& config, CommMode mode,
                         int bytes_per_scalar) {
  if (strategy == Strategy::kTensorParallel) {
    throw Error(ErrorCode::kConfig, "tensor parallelism has no simulated ledger");
  }
  CheckScalarBytes(bytes_per_scalar);
  const TransformerConfig c = EffectiveConfig(config, strategy);
  c.Validate();
  const int p = c.n_partitions;
  const int64_t d_model = c.embed_dim;
  const PartitionPlan plan = MakePartitionPlan(c.n_tokens, p);
  const MessageKind exchange = strategy == Strategy::kPrism ? MessageKind::kSegmentMeansBlock
                                                            : MessageKind::kPartitionExchange;
  const int64_t fanout = mode == CommMode::kUnicast ? p - 1 : 1;
  auto exchange_entry = [&](int origin) {
    if (strategy == Strategy::kPrism) {
      return Entry(fanout, c.landmarks * d_model, c.landmarks, bytes_per_scalar);
    }
    return Entry(fanout, plan.Get(origin).size() * d_model, 0, bytes_per_scalar);
  };

  CommLedger ledger(mode);
  ledger.Add({kMasterId, 0, MessageKind::kControl}, Entry(p, 0, p, bytes_per_scalar));
  for (const PartitionRange& r : plan.parts()) {
    ledger.Add({kMasterId, 0, MessageKind::kInputPartition},
               Entry(1, r.size() * d_model, 0, bytes_per_scalar));
    ledger.Add({r.id, c.n_blocks, MessageKind::kOutputPartition},
               Entry(1, r.size() * d_model, 0, bytes_per_scalar));
    if (p == 1) continue;
    ledger.Add({kMasterId, 0, exchange}, exchange_entry(r.id));
    for (int64_t b = 1; b < c.n_blocks; ++b) ledger.Add({r.id, b, exchange}, exchange_entry(r.id));
  }
  return ledger;
}

double FlopEstimate::MeanPerDevice() const {
  if (per_device.empty()) return 0.0;
  const int64_t sum = std::accumulate(per_device.begin(), per_device.end(), int64_t{0});
  return static_cast<double>(sum) / static_cast<double>(per_device.size());
}

FlopEstimate FlopsForward(Strategy strategy, const TransformerConfig& config) {
  const TransformerConfig c = EffectiveConfig(config, strategy);
  c.Validate();
  const int p = c.n_partitions;
  FlopEstimate est;
  est.per_block.assign(static_cast<size_t>(p),
                       std::vector<int64_t>(static_cast<size_t>(c.n_blocks)));
  const PartitionPlan plan = MakePartitionPlan(c.n_tokens, p);
  for (const PartitionRange& r : plan.parts()) {
    const int64_t n_p = r.size();
    BlockShape shape{n_p, c.n_tokens, c.n_tokens, false};
    int64_t exchange = 0;
    if (strategy == Strategy::kPrism) {
      const int64_t augmented = n_p + (p - 1) * c.landmarks;
      shape = {n_p, augmented, augmented, true};
      exchange = SegmentMeansFlops(n_p, c.landmarks, c.embed_dim);
      est.master += exchange;
    }
    const int64_t block =
        strategy == Strategy::kTensorParallel ? TensorBlockFlops(c) : BlockFlops(c, shape);
    const int64_t closing_rows = strategy == Strategy::kTensorParallel ? c.n_tokens : n_p;
    auto& row = est.per_block[static_cast<size_t>(r.id - 1)];
    for (int64_t b = 0; b < c.n_blocks; ++b) {
      const bool last = b + 1 == c.n_blocks;
      row[static_cast<size_t>(b)] =
          block + (last ? fc::kLayerNormPerElement * closing_rows * c.embed_dim : exchange);
    }
    est.per_device.push_back(std::accumulate(row.begin(), row.end(), int64_t{0}));
  }
  est.total =
      est.master + std::accumulate(est.per_device.begin(), est.per_device.end(), int64_t{0});
  return est;
}

double ForwardLatency(Strategy strategy, const TransformerConfig& config, const NetworkModel& net,
                      CommMode mode, double device_flops_per_second) {
  net.Validate();
  if (!(device_flops_per_second > 0.0)) {
    throw Error(ErrorCode::kConfig, "device throughput must be positive");
  }
  const TransformerConfig c = EffectiveConfig(config, strategy);
  const double blocks = static_cast<double>(c.n_blocks);
  const double compute = FlopsForward(strategy, c).MeanPerDevice() / blocks;
  int64_t tokens = PdplcTokens(strategy, c);
  int64_t messages = c.n_partitions - 1;
  if (mode == CommMode::kBroadcast && c.n_partitions > 1) {
    messages = 1;
    if (strategy == Strategy::kPrism) tokens = c.landmarks;
    if (strategy == Strategy::kVoltage) tokens = RoundHalfUp(c.n_tokens, c.n_partitions);
  }
  const int64_t bytes = tokens * c.embed_dim * net.bytes_per_scalar;
  return blocks * (compute / device_flops_per_second + net.TransferSeconds(bytes, messages));
}

std::vector<LatencyPoint> LatencyCurve(Strategy strategy, const TransformerConfig& config,
                                       const NetworkModel& net, CommMode mode,
                                       double device_flops_per_second,
                                       std::span<const double> bandwidths_bps) {
  std::vector<LatencyPoint> curve;
  for (double bw : bandwidths_bps) {
    NetworkModel at = net;
    at.bandwidth_bps = bw;
    curve.push_back({bw, ForwardLatency(strategy, config, at, mode, device_flops_per_second)});
  }
  return curve;
}

std::vector<double> GeometricSweep(double lo_bps, double hi_bps, int count) {
  if (!(lo_bps > 0.0) || !(hi_bps >= lo_bps) || count < 1) {
    throw Error(ErrorCode::kConfig,
                fmt::format("bad sweep [{}, {}] with {} points", lo_bps, hi_bps, count));
  }
  std::vector<double> out;
  if (count == 1) return {lo_bps};
  const double step = std::log(hi_bps / lo_bps) / (count - 1);
  for (int i = 0; i < count; ++i) out.push_back(lo_bps * std::exp(step * i));
  out.back() = hi_bps;
  return out;
}

CostReport MakeCostReport(Strategy strategy, const TransformerConfig& config) {
  const TransformerConfig c = EffectiveConfig(config, strategy);
  const FlopEstimate est = FlopsForward(strategy, c);
  const double single = static_cast<double>(FlopsForward(Strategy::kSingle, c).total);
  CostReport r;
  r.strategy = strategy;
  r.partitions = c.n_partitions;
  r.landmarks = strategy == Strategy::kPrism ? c.landmarks : 0;
  r.total_gflops = static_cast<double>(est.total) / 1e9;
  r.per_device_gflops = est.MeanPerDevice() / 1e9;
  r.comp_speedup_pct = 100.0 * (1.0 - est.MeanPerDevice() / single);
  r.pdplc_tokens = PdplcTokens(strategy, c);
  if (strategy != Strategy::kSingle) {
    const double cr = static_cast<double>(PdplcTokens(Strategy::kVoltage, c)) /
                      static_cast<double>(r.pdplc_tokens);
    r.cr = cr;
    r.comm_speedup_pct = 100.0 * (1.0 - 1.0 / cr);
  }
  return r;
}

CostReport MakeNominalCrReport(const TransformerConfig& config, double cr) {
  if (!(cr >= 1.0)) throw Error(ErrorCode::kConfig, fmt::format("compression rate {} < 1", cr));
  TransformerConfig c = config;
  c.landmarks = static_cast<int64_t>(
      std::floor(static_cast<double>(c.n_tokens) / (cr * static_cast<double>(c.n_partitions))));
  if (c.landmarks < 1) {
    throw Error(ErrorCode::kConfig,
                fmt::format("compression rate {} leaves no landmark for N = {}, P = {}", cr,
                            c.n_tokens, c.n_partitions));
  }
  CostReport r = MakeCostReport(Strategy::kPrism, c);
  r.cr = cr;
  r.cr_source = CrSource::kNominal;
  r.comm_speedup_pct = 100.0 * (1.0 - 1.0 / cr);
  return r;
}

std::span<const ModelPreset> Presets() {
  static const std::vector<ModelPreset> presets = [] {
    TransformerConfig base;
    base.embed_dim = 768;
    base.head_dim = 64;
    base.n_heads = 12;
    base.ffn_dim = 3072;
    base.n_blocks = 12;
    TransformerConfig vit = base, bert = base, gpt2 = base;
    vit.n_tokens = 197;
    bert.n_tokens = 256;
    gpt2.n_tokens = 256;
    gpt2.kind = ModelKind::kDecoder;
    return std::vector<ModelPreset>{
        {"vit-base", vit, false}, {"bert-base", bert, true}, {"gpt2-base", gpt2, true}};
  }();
  return presets;
}

std::optional<ModelPreset> FindPreset(std::string_view name) {
  for (const ModelPreset& p : Presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace seqpar
