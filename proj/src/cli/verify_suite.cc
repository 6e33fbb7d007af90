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

#include "seqpar/cli/verify_suite.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "seqpar/analysis.h"
#include "seqpar/flops.h"
#include "seqpar/runtime/runtime.h"

namespace seqpar::cli {
namespace {

class Draw {
 public:
  explicit Draw(uint64_t seed) : rng_(seed) {}

  int64_t Int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(rng_() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool Coin() { return (rng_() & 1) != 0; }
  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  Matrix Mat(int64_t rows, int64_t cols, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = Uniform(-scale, scale);
    return m;
  }
  HeadWeights Head(int64_t d_model, int64_t d) {
    const double s = 1.0 / std::sqrt(static_cast<double>(d_model));
    return {Mat(d_model, d, s), Mat(d_model, d, s), Mat(d_model, d, s)};
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Accumulates the worst case of one property.
class Tracker {
 public:
  Tracker(std::string name, double tolerance) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
  }

  void Observe(double error, const std::string& context) {
    ++r_.cases;
    if (std::isnan(error)) error = INFINITY;
    if (error > r_.max_error) r_.max_error = error;
    if (error > r_.tolerance && r_.detail.empty()) {
      r_.detail = fmt::format("{}: error {:.3e}", context, error);
    }
  }

  PropertyResult Finish() {
    r_.passed = r_.cases > 0 && r_.max_error <= r_.tolerance;
    if (r_.cases == 0) r_.detail = "no cases";
    return std::move(r_);
  }

 private:
  PropertyResult r_;
};

std::vector<SegmentMeans> PeerMeans(const Matrix& x, const PartitionPlan& plan, int self,
                                    int64_t landmarks) {
  std::vector<SegmentMeans> out;
  for (const PartitionRange& r : plan.parts()) {
    if (r.id == self) continue;
    out.push_back(ComputeSegmentMeans(SliceRows(x, r.start, r.end), landmarks, r.id));
  }
  return out;
}

// One attention layer evaluated device by device with scaled attention.
Matrix PartitionedLayer(const Matrix& x, const PartitionPlan& plan, int64_t landmarks,
                        const HeadWeights& w, MaskBuilder mask_builder) {
  std::vector<Matrix> parts;
  for (const PartitionRange& r : plan.parts()) {
    const Matrix x_p = SliceRows(x, r.start, r.end);
    const AugmentedInput aug =
        AssembleAugmented(x_p, PeerMeans(x, plan, r.id, landmarks), plan, r.id);
    const CausalMask mask = mask_builder(plan, r.id, landmarks);
    parts.push_back(AttentionScaled(x_p, aug, w, &mask));
  }
  return ConcatRows(parts);
}

double MaxAbsDiffRows(const Matrix& a, const Matrix& b, int64_t end_row) {
  double worst = 0.0;
  for (int64_t i = 0; i < end_row; ++i) {
    for (int64_t j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  }
  return worst;
}

std::vector<int> Distributed(std::span<const int> partitions) {
  std::vector<int> out;
  for (int p : partitions) {
    if (p >= 2) out.push_back(p);
  }
  return out;
}

TransformerConfig WithPartitions(TransformerConfig c, int p, int64_t landmarks) {
  c.n_partitions = p;
  c.landmarks = landmarks;
  return c;
}

NetworkModel Net(int bytes_per_scalar) {
  NetworkModel net;
  net.bytes_per_scalar = bytes_per_scalar;
  return net;
}

}  // namespace

bool VerifyReport::ok() const {
  return !properties.empty() && std::all_of(properties.begin(), properties.end(),
                                            [](const PropertyResult& r) { return r.passed; });
}

PropertyResult CheckScaledEquivalence(int instances, uint64_t seed, Fault fault) {
  Draw draw(seed);
  Tracker t("scaled_vs_duplicated", 1e-12);
  for (int i = 0; i < instances; ++i) {
    const int p_count = static_cast<int>(draw.Int(2, 3));
    const int64_t n = draw.Int(std::max<int64_t>(6, p_count), 64);
    const PartitionPlan plan = MakePartitionPlan(n, p_count);
    const int64_t landmarks = draw.Int(1, n / p_count);
    const int64_t d = draw.Coin() ? 4 : 8;
    const int64_t d_model = draw.Coin() ? 8 : 16;
    const int self = static_cast<int>(draw.Int(1, p_count));
    const bool causal = i % 2 == 1;
    const Matrix x = draw.Mat(n, d_model, 2.0);
    const HeadWeights w = draw.Head(d_model, d);

    const PartitionRange& r = plan.Get(self);
    const Matrix x_p = SliceRows(x, r.start, r.end);
    const std::vector<SegmentMeans> blocks = PeerMeans(x, plan, self, landmarks);
    AugmentedInput aug = AssembleAugmented(x_p, blocks, plan, self);
    if (fault == Fault::kWrongG) std::fill(aug.g.begin(), aug.g.end(), 1);
    std::optional<CausalMask> mask;
    if (causal) mask = BuildCausalMask(plan, self, landmarks);
    const CausalMask* m = mask ? &*mask : nullptr;
    const Matrix scaled = AttentionScaled(x_p, aug, w, m);
    const Matrix oracle = AttentionDuplicatedOracle(x_p, blocks, w, m);
    t.Observe(MaxAbsDiff(scaled, oracle),
              fmt::format("instance {} (N={} P={} p={} L={} d={} causal={})", i, n, p_count, self,
                          landmarks, d, causal));
  }
  return t.Finish();
}

PropertyResult CheckPermutationInvariance(int trials, uint64_t seed) {
  Draw draw(seed);
  Tracker t("permutation_invariance", 1e-12);
  for (int i = 0; i < trials; ++i) {
    const int64_t n = draw.Int(2, 48);
    const int64_t d_model = 16, d = draw.Coin() ? 4 : 8;
    const bool causal = draw.Coin();
    const Matrix x = draw.Mat(n, d_model, 2.0);
    const HeadWeights w = draw.Head(d_model, d);
    std::vector<int64_t> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), draw.engine());
    t.Observe(MaxAbsDiff(AttentionPermutedKv(x, perm, w, causal), AttentionReference(x, w, causal)),
              fmt::format("trial {} (N={} causal={})", i, n, causal));
  }
  return t.Finish();
}

PropertyResult CheckCausalSafety(int trials, uint64_t seed, MaskBuilder mask) {
  Draw draw(seed);
  Tracker t("causal_mask_no_leak", 0.0);
  for (int i = 0; i < trials; ++i) {
    const int p_count = static_cast<int>(draw.Int(2, 3));
    const int64_t n = draw.Int(6, 48);
    const PartitionPlan plan = MakePartitionPlan(n, p_count);
    const int64_t landmarks = draw.Int(1, n / p_count);
    const int64_t d_model = 8;
    const Matrix x = draw.Mat(n, d_model, 2.0);
    const HeadWeights w = draw.Head(d_model, draw.Coin() ? 4 : 8);
    // Even trials perturb a token of a later partition, odd trials any token.
    const int64_t first = i % 2 == 0 ? plan.Get(2).start : 1;
    const int64_t token = draw.Int(first, n - 1);
    Matrix perturbed = x;
    for (int64_t j = 0; j < d_model; ++j) perturbed(token, j) += draw.Uniform(1.0, 3.0);
    const Matrix before = PartitionedLayer(x, plan, landmarks, w, mask);
    const Matrix after = PartitionedLayer(perturbed, plan, landmarks, w, mask);
    t.Observe(MaxAbsDiffRows(before, after, token),
              fmt::format("trial {} (N={} P={} L={} token={})", i, n, p_count, landmarks, token));
  }
  return t.Finish();
}

PropertyResult CheckNaiveMaskLeaks(int trials, uint64_t seed) {
  const PropertyResult naive = CheckCausalSafety(trials, seed, &BuildNaiveLocalMask);
  PropertyResult r;
  r.name = "naive_mask_detected";
  r.cases = naive.cases;
  r.max_error = naive.max_error;
  r.tolerance = 0.0;
  r.passed = naive.cases > 0 && !naive.passed;
  if (!r.passed) r.detail = "the local-triangular mask leaked nothing";
  return r;
}

PropertyResult CheckCausalEndToEnd(const TransformerConfig& model, std::span<const int> partitions,
                                   int trials, uint64_t seed) {
  Draw draw(seed);
  Tracker t("causal_end_to_end", 0.0);
  const std::vector<int> ps = Distributed(partitions);
  if (ps.empty()) return t.Finish();
  TransformerConfig base = model;
  base.kind = ModelKind::kDecoder;
  const WeightSet w = GenerateWeights(WithPartitions(base, 1, 1), seed);
  for (int i = 0; i < trials; ++i) {
    const int p = ps[static_cast<size_t>(i) % ps.size()];
    const TransformerConfig c = WithPartitions(base, p, draw.Int(1, base.n_tokens / p));
    const Matrix x = GenerateInput(c, seed + static_cast<uint64_t>(i));
    const int64_t token = draw.Int(1, c.n_tokens - 1);
    Matrix perturbed = x;
    for (int64_t j = 0; j < c.embed_dim; ++j) perturbed(token, j) += draw.Uniform(1.0, 3.0);
    const Matrix before = RunDistributed(x, w, c, Strategy::kPrism, Net(8)).output;
    const Matrix after = RunDistributed(perturbed, w, c, Strategy::kPrism, Net(8)).output;
    t.Observe(MaxAbsDiffRows(before, after, token),
              fmt::format("trial {} (P={} L={} token={})", i, p, c.landmarks, token));
  }
  return t.Finish();
}

PropertyResult CheckLosslessPrism(const TransformerConfig& model, std::span<const int> partitions,
                                  uint64_t seed) {
  Tracker t("lossless_prism_matches_single", 1e-10);
  for (int p : Distributed(partitions)) {
    for (ModelKind kind : {ModelKind::kEncoder, ModelKind::kDecoder}) {
      TransformerConfig c = model;
      c.kind = kind;
      c.n_tokens -= c.n_tokens % p;
      c = WithPartitions(c, p, c.n_tokens / p);
      const WeightSet w = GenerateWeights(c, seed);
      const Matrix x = GenerateInput(c, seed);
      const Matrix single = RunDistributed(x, w, c, Strategy::kSingle, Net(8)).output;
      const Matrix prism = RunDistributed(x, w, c, Strategy::kPrism, Net(8)).output;
      t.Observe(MaxAbsDiff(prism, single),
                fmt::format("P={} N={} {}", p, c.n_tokens, ModelKindName(kind)));
    }
  }
  return t.Finish();
}

PropertyResult CheckVoltageMatchesSingle(const TransformerConfig& model,
                                         std::span<const int> partitions, uint64_t seed) {
  Tracker t("voltage_matches_single", 1e-10);
  for (int p : Distributed(partitions)) {
    for (ModelKind kind : {ModelKind::kEncoder, ModelKind::kDecoder}) {
      TransformerConfig c = WithPartitions(model, p, 1);
      c.kind = kind;
      const WeightSet w = GenerateWeights(c, seed);
      const Matrix x = GenerateInput(c, seed);
      const Matrix single = RunDistributed(x, w, c, Strategy::kSingle, Net(8)).output;
      const Matrix voltage = RunDistributed(x, w, c, Strategy::kVoltage, Net(8)).output;
      t.Observe(MaxAbsDiff(voltage, single), fmt::format("P={} {}", p, ModelKindName(kind)));
    }
  }
  return t.Finish();
}

PropertyResult CheckSingleMatchesReference(const TransformerConfig& model, uint64_t seed) {
  Tracker t("single_matches_reference", 1e-12);
  Draw draw(seed);
  for (ModelKind kind : {ModelKind::kEncoder, ModelKind::kDecoder}) {
    TransformerConfig c = WithPartitions(model, 1, 1);
    c.kind = kind;
    const WeightSet w = GenerateWeights(c, seed);
    const Matrix x = GenerateInput(c, seed);
    t.Observe(MaxAbsDiff(RunDistributed(x, w, c, Strategy::kSingle, Net(8)).output,
                         ReferenceForward(x, w, c)),
              fmt::format("forward {}", ModelKindName(kind)));

    const PartitionPlan plan = MakePartitionPlan(c.n_tokens, 1);
    const Matrix xs = draw.Mat(c.n_tokens, c.embed_dim, 2.0);
    const HeadWeights& head = w.blocks.front().heads.front();
    const AugmentedInput aug = AssembleAugmented(xs, {}, plan, 1);
    std::optional<CausalMask> mask;
    if (c.causal()) mask = BuildCausalMask(plan, 1, 1);
    t.Observe(MaxAbsDiff(AttentionScaled(xs, aug, head, mask ? &*mask : nullptr),
                         AttentionReference(xs, head, c.causal())),
              fmt::format("attention {}", ModelKindName(kind)));
  }
  return t.Finish();
}

PropertyResult CheckLedgerPrediction(const TransformerConfig& model,
                                     std::span<const int> partitions, uint64_t seed) {
  Draw draw(seed);
  Tracker t("ledger_matches_prediction", 0.0);
  TransformerConfig small = model;
  small.n_blocks = std::min<int64_t>(model.n_blocks, 3);
  const WeightSet w = GenerateWeights(WithPartitions(small, 1, 1), seed);
  const Matrix x = GenerateInput(WithPartitions(small, 1, 1), seed);
  auto audit = [&](const TransformerConfig& c, Strategy s, CommMode mode, int bps) {
    RunOptions options;
    options.mode = mode;
    const CommLedger measured = RunDistributed(x, w, c, s, Net(bps), options).ledger;
    const CommLedger predicted = PredictLedger(s, c, mode, bps);
    double mismatches = measured == predicted ? 0.0 : 1.0;
    const TransformerConfig eff = EffectiveConfig(c, s);
    for (int p = 1; p <= eff.n_partitions && eff.n_partitions > 1; ++p) {
      const MessageKind kind =
          s == Strategy::kPrism ? MessageKind::kSegmentMeansBlock : MessageKind::kPartitionExchange;
      for (int64_t b = 1; b < eff.n_blocks; ++b) {
        if (measured.Get(p, b, kind).elements != CommElements(s, eff, p, mode)) mismatches += 1.0;
      }
    }
    t.Observe(mismatches, fmt::format("{} P={} L={} {} {}-byte", StrategyName(s), c.n_partitions,
                                      c.landmarks, CommModeName(mode), bps));
  };
  audit(WithPartitions(small, 1, 1), Strategy::kSingle, CommMode::kUnicast, 8);
  for (int p : Distributed(partitions)) {
    for (CommMode mode : {CommMode::kUnicast, CommMode::kBroadcast}) {
      const int bps = draw.Coin() ? 4 : 8;
      const TransformerConfig c = WithPartitions(small, p, draw.Int(1, small.n_tokens / p));
      audit(c, Strategy::kVoltage, mode, bps);
      audit(c, Strategy::kPrism, mode, bps);
    }
  }
  return t.Finish();
}

PropertyResult CheckFlopModel(const TransformerConfig& model, std::span<const int> partitions,
                              uint64_t seed) {
  Draw draw(seed);
  Tracker t("flop_model_matches_kernels", 0.0);
  TransformerConfig small = model;
  small.n_blocks = std::min<int64_t>(model.n_blocks, 2);
  const WeightSet w = GenerateWeights(WithPartitions(small, 1, 1), seed);
  const Matrix x = GenerateInput(WithPartitions(small, 1, 1), seed);

  FlopCounter counter;
  {
    ScopedFlopCounter scope(&counter);
    ReferenceForward(x, w, WithPartitions(small, 1, 1));
  }
  t.Observe(
      std::abs(static_cast<double>(counter.total() - FlopsForward(Strategy::kSingle, small).total)),
      "reference forward");

  auto compare = [&](const TransformerConfig& c, Strategy s) {
    const RunResult run = RunDistributed(x, w, c, s, Net(8));
    const FlopEstimate est = FlopsForward(s, c);
    double worst = std::abs(static_cast<double>(run.master_flops - est.master));
    for (size_t p = 0; p < run.device_flops.size(); ++p) {
      for (size_t b = 0; b < run.device_flops[p].size(); ++b) {
        worst = std::max(
            worst, std::abs(static_cast<double>(run.device_flops[p][b] - est.per_block[p][b])));
      }
    }
    t.Observe(worst, fmt::format("{} P={} L={}", StrategyName(s), c.n_partitions, c.landmarks));
  };
  compare(WithPartitions(small, 1, 1), Strategy::kSingle);
  for (int p : Distributed(partitions)) {
    const TransformerConfig c = WithPartitions(small, p, draw.Int(1, small.n_tokens / p));
    compare(c, Strategy::kVoltage);
    compare(c, Strategy::kPrism);
  }
  return t.Finish();
}

PropertyResult CheckExecutionDeterminism(const TransformerConfig& model,
                                         std::span<const int> partitions, uint64_t seed) {
  Draw draw(seed);
  Tracker t("execution_determinism", 0.0);
  TransformerConfig small = model;
  small.n_blocks = std::min<int64_t>(model.n_blocks, 4);
  const WeightSet w = GenerateWeights(WithPartitions(small, 1, 1), seed);
  const Matrix x = GenerateInput(WithPartitions(small, 1, 1), seed);
  auto check = [&](const TransformerConfig& c, Strategy s, CommMode mode) {
    RunOptions base;
    base.mode = mode;
    RunOptions shuffled = base;
    shuffled.shuffle_seed = seed + 1;
    RunOptions threaded = base;
    threaded.threaded = true;
    const RunResult a = RunDistributed(x, w, c, s, Net(8), base);
    double worst = 0.0;
    for (const RunOptions& o : {shuffled, threaded}) {
      const RunResult b = RunDistributed(x, w, c, s, Net(8), o);
      const bool same =
          a.output == b.output && a.ledger == b.ledger && a.device_flops == b.device_flops;
      worst = std::max(worst, same ? 0.0 : std::max(1.0, MaxAbsDiff(a.output, b.output)));
    }
    t.Observe(worst,
              fmt::format("{} P={} {}", StrategyName(s), c.n_partitions, CommModeName(mode)));
  };
  check(WithPartitions(small, 1, 1), Strategy::kSingle, CommMode::kUnicast);
  for (int p : Distributed(partitions)) {
    const TransformerConfig c = WithPartitions(small, p, draw.Int(1, small.n_tokens / p));
    for (CommMode mode : {CommMode::kUnicast, CommMode::kBroadcast}) {
      check(c, Strategy::kVoltage, mode);
      check(c, Strategy::kPrism, mode);
    }
  }
  return t.Finish();
}

PropertyResult CheckSpeedupAlgebra() {
  Tracker t("comm_speedup_algebra", 1e-9);
  for (const ModelPreset& preset : Presets()) {
    for (int p = 2; p <= 6; ++p) {
      for (int64_t l = 1; l <= preset.config.n_tokens / p; ++l) {
        const CostReport r = MakeCostReport(Strategy::kPrism, WithPartitions(preset.config, p, l));
        t.Observe(std::abs(*r.comm_speedup_pct - 100.0 * (1.0 - 1.0 / *r.cr)),
                  fmt::format("{} P={} L={}", preset.name, p, l));
      }
      for (int k = 2; k <= 10; ++k) {
        const CostReport r = MakeNominalCrReport(WithPartitions(preset.config, p, 1), k);
        t.Observe(std::abs(*r.comm_speedup_pct - 100.0 * (1.0 - 1.0 / k)),
                  fmt::format("{} P={} CR={}", preset.name, p, k));
      }
    }
  }
  return t.Finish();
}

VerifyReport RunVerifySuite(const VerifySettings& settings, uint64_t seed) {
  VerifyReport report;
  auto add = [&](PropertyResult r) { report.properties.push_back(std::move(r)); };
  const std::span<const int> ps = settings.partitions;
  add(CheckSingleMatchesReference(settings.model, seed));
  add(CheckPermutationInvariance(settings.permutation_trials, seed + 1));
  if (Distributed(ps).empty()) {
    add(CheckExecutionDeterminism(settings.model, ps, seed + 2));
    return report;
  }
  add(CheckScaledEquivalence(settings.scaled_instances, seed + 3, settings.fault));
  add(CheckCausalSafety(settings.causal_trials, seed + 4, &BuildCausalMask));
  add(CheckNaiveMaskLeaks(settings.causal_trials, seed + 4));
  add(CheckCausalEndToEnd(settings.model, ps, settings.causal_trials, seed + 5));
  add(CheckLosslessPrism(settings.model, ps, seed + 6));
  add(CheckVoltageMatchesSingle(settings.model, ps, seed + 7));
  add(CheckLedgerPrediction(settings.model, ps, seed + 8));
  add(CheckFlopModel(settings.model, ps, seed + 9));
  add(CheckExecutionDeterminism(settings.model, ps, seed + 2));
  add(CheckSpeedupAlgebra());
  return report;
}

}  // namespace seqpar::cli
