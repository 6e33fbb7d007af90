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

#ifndef SEQPAR_CLI_VERIFY_SUITE_H_
#define SEQPAR_CLI_VERIFY_SUITE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqpar/attention.h"
#include "seqpar/cli/experiment_config.h"
#include "seqpar/model.h"
#include "seqpar/partition.h"

namespace seqpar::cli {

struct PropertyResult {
  std::string name;
  int64_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;  // first failing case, or empty
};

struct VerifyReport {
  std::vector<PropertyResult> properties;

  bool ok() const;
};

using MaskBuilder = CausalMask (*)(const PartitionPlan&, int, int64_t);

// Random instances with P in {2, 3}, N in [6, 64], L in [1, floor(N/P)],
// d in {4, 8}, half of them causal. kWrongG replaces g by ones.
PropertyResult CheckScaledEquivalence(int instances, uint64_t seed, Fault fault = Fault::kNone);

// Random K/V row permutations, encoder and decoder.
PropertyResult CheckPermutationInvariance(int trials, uint64_t seed);

// Perturbs one token t of a random partitioned decoder layer and measures the
// largest change in any output row before t. Passes when nothing leaks.
PropertyResult CheckCausalSafety(int trials, uint64_t seed, MaskBuilder mask);

// The same measurement with BuildNaiveLocalMask; passes when the leak is seen.
PropertyResult CheckNaiveMaskLeaks(int trials, uint64_t seed);

// End-to-end decoder prism run: perturbing token t leaves earlier rows exact.
PropertyResult CheckCausalEndToEnd(const TransformerConfig& model, std::span<const int> partitions,
                                   int trials, uint64_t seed);

// prism with L = N_p, P dividing N (N is trimmed to a multiple of P).
PropertyResult CheckLosslessPrism(const TransformerConfig& model, std::span<const int> partitions,
                                  uint64_t seed);

PropertyResult CheckVoltageMatchesSingle(const TransformerConfig& model,
                                         std::span<const int> partitions, uint64_t seed);

// Single-worker runtime against the reference forward pass, and P = 1 scaled
// attention against reference attention.
PropertyResult CheckSingleMatchesReference(const TransformerConfig& model, uint64_t seed);

// Runtime ledgers against PredictLedger for every strategy and mode.
PropertyResult CheckLedgerPrediction(const TransformerConfig& model,
                                     std::span<const int> partitions, uint64_t seed);

// Instrumented kernel FLOPs against FlopsForward, per device and block.
PropertyResult CheckFlopModel(const TransformerConfig& model, std::span<const int> partitions,
                              uint64_t seed);

// Sequential, shuffled and threaded execution produce identical results.
PropertyResult CheckExecutionDeterminism(const TransformerConfig& model,
                                         std::span<const int> partitions, uint64_t seed);

// comm speed-up == 1 - 1/CR across presets, P in [2, 6] and every valid L.
PropertyResult CheckSpeedupAlgebra();

// Everything above, sized by `settings`. When every P is 1 only the
// reference self-checks and partition-free attention checks run.
VerifyReport RunVerifySuite(const VerifySettings& settings, uint64_t seed);

}  // namespace seqpar::cli

#endif  // SEQPAR_CLI_VERIFY_SUITE_H_
