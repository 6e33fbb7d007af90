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

#ifndef SEQPAR_RUNTIME_RUNTIME_H_
#define SEQPAR_RUNTIME_RUNTIME_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "seqpar/model.h"
#include "seqpar/runtime/ledger.h"
#include "seqpar/runtime/message.h"
#include "seqpar/runtime/network.h"
#include "seqpar/strategy.h"
#include "seqpar/tensor.h"

namespace seqpar {

struct RunOptions {
  CommMode mode = CommMode::kUnicast;
  // One OS thread per worker instead of the round-robin event loop.
  bool threaded = false;
  // Sequential mode only: permutes worker visiting order and inbox order each
  // round. Results must not depend on it.
  std::optional<uint64_t> shuffle_seed;
  // Sequential mode: rounds without any block completing before kStall.
  int stall_budget = 4;
  // Threaded mode: how long a worker may wait for a message before kStall.
  std::chrono::milliseconds stall_timeout{10000};
  double device_flops_per_second = 1e11;
  // Receives one TraceLine per message sent, in send order.
  std::ostream* trace = nullptr;
  // Fault injection: a message for which this returns true is recorded as sent
  // but never delivered.
  std::function<bool(const Message&)> drop;
};

struct BlockTiming {
  int64_t block = 0;
  double compute_s = 0.0;  // slowest device
  double comm_s = 0.0;     // slowest sender of the following exchange
};

struct Timeline {
  double distribute_s = 0.0;  // master partitioning and block-0 data
  std::vector<BlockTiming> blocks;
  double total_s = 0.0;
};

struct RunResult {
  Matrix output;
  CommLedger ledger;
  Timeline timeline;
  // device_flops[p - 1][b]: FLOPs charged by worker p while computing block b,
  // including the data it derives for the next exchange.
  std::vector<std::vector<int64_t>> device_flops;
  int64_t master_flops = 0;
};

// Simulates the master and P workers exchanging messages through an in-memory
// bus. `single` always runs one worker regardless of config.n_partitions;
// voltage and prism need P >= 2. Every message is serialized and decoded with
// net.bytes_per_scalar, so 4-byte scalars round payloads to float.
RunResult RunDistributed(const Matrix& x, const WeightSet& w, const TransformerConfig& config,
                         Strategy strategy, const NetworkModel& net,
                         const RunOptions& options = {});

// Config actually executed for `strategy`: P = 1 and L = 1 for single.
// Throws kConfig for voltage or prism with fewer than 2 partitions.
TransformerConfig EffectiveConfig(const TransformerConfig& config, Strategy strategy);

}  // namespace seqpar

#endif  // SEQPAR_RUNTIME_RUNTIME_H_
