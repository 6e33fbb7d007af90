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

#ifndef SEQPAR_RUNTIME_WORKER_H_
#define SEQPAR_RUNTIME_WORKER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqpar/model.h"
#include "seqpar/partition.h"
#include "seqpar/runtime/message.h"
#include "seqpar/strategy.h"

namespace seqpar {

// Edge device owning partition `id`. A pure state machine: Step() absorbs
// messages and, once the previous block's peer data is complete, runs exactly
// one Transformer block and returns what it wants sent.
class Worker {
 public:
  struct StepResult {
    bool progressed = false;
    int64_t block = -1;  // block just computed
    int64_t flops = 0;   // charged by the kernels during this step
    std::vector<Message> outgoing;
  };

  // strategy must be kSingle (with P == 1), kVoltage or kPrism.
  Worker(int id, std::shared_ptr<const WeightSet> weights, TransformerConfig config,
         Strategy strategy, CommMode mode);

  StepResult Step(std::vector<Message> incoming);

  int id() const { return id_; }
  int64_t next_block() const { return next_block_; }
  bool done() const { return next_block_ >= config_.n_blocks; }
  // Human-readable description of what the worker is blocked on.
  std::string WaitingFor() const;

 private:
  void Absorb(Message m);
  bool Ready() const;
  // Exchange kind this worker consumes from peers.
  MessageKind ExchangeKind() const;
  Matrix RunPrismBlock(const BlockWeights& block, std::vector<Message> exchange);
  Matrix RunFullBlock(const BlockWeights& block, std::vector<Message> exchange);
  std::vector<Message> Emit(const Matrix& next_state);
  Message MakeMessage(int to, MessageKind kind, Matrix payload, std::vector<int64_t> counts = {});

  int id_;
  std::shared_ptr<const WeightSet> weights_;
  TransformerConfig config_;
  Strategy strategy_;
  CommMode mode_;

  std::optional<PartitionPlan> plan_;
  std::optional<Matrix> state_;
  std::map<int64_t, std::vector<Message>> pending_;  // keyed by block
  int64_t next_block_ = 0;
  int64_t seq_ = 0;
};

// Rows of every output partition concatenated in partition order, whatever the
// arrival order. Throws kProtocol on a missing or duplicated partition.
Matrix Aggregate(std::span<const Message> outputs, const PartitionPlan& plan);

}  // namespace seqpar

#endif  // SEQPAR_RUNTIME_WORKER_H_
