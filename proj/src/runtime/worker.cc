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

#include "seqpar/runtime/worker.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <set>
#include <utility>

#include "seqpar/attention.h"
#include "seqpar/error.h"
#include "seqpar/flops.h"

namespace seqpar {

Worker::Worker(int id, std::shared_ptr<const WeightSet> weights, TransformerConfig config,
               Strategy strategy, CommMode mode)
    : id_(id), weights_(std::move(weights)), config_(config), strategy_(strategy), mode_(mode) {
  config_.Validate();
  const bool supported = strategy_ == Strategy::kVoltage || strategy_ == Strategy::kPrism ||
                         (strategy_ == Strategy::kSingle && config_.n_partitions == 1);
  if (!supported) {
    throw Error(ErrorCode::kConfig, fmt::format("worker cannot run strategy '{}' with P = {}",
                                                StrategyName(strategy_), config_.n_partitions));
  }
  if (id_ < 1 || id_ > config_.n_partitions) {
    throw Error(ErrorCode::kConfig,
                fmt::format("worker id {} outside [1, {}]", id_, config_.n_partitions));
  }
}

MessageKind Worker::ExchangeKind() const {
  return strategy_ == Strategy::kPrism ? MessageKind::kSegmentMeansBlock
                                       : MessageKind::kPartitionExchange;
}

void Worker::Absorb(Message m) {
  switch (m.kind) {
    case MessageKind::kControl: {
      if (m.to != id_ || static_cast<int>(m.counts.size()) != config_.n_partitions) {
        throw Error(ErrorCode::kProtocol,
                    fmt::format("worker {} got a control message for {} with {} sizes", id_, m.to,
                                m.counts.size()));
      }
      std::vector<PartitionRange> parts;
      int64_t start = 0;
      for (size_t i = 0; i < m.counts.size(); ++i) {
        parts.push_back({static_cast<int>(i) + 1, start, start + m.counts[i]});
        start += m.counts[i];
      }
      plan_ = PartitionPlan(start, std::move(parts));
      return;
    }
    case MessageKind::kInputPartition:
      if (m.origin != id_ || state_.has_value()) {
        throw Error(ErrorCode::kProtocol,
                    fmt::format("worker {} got input partition {}", id_, m.origin));
      }
      state_ = std::move(m.payload);
      return;
    case MessageKind::kSegmentMeansBlock:
    case MessageKind::kPartitionExchange:
      if (m.kind != ExchangeKind() || m.block < next_block_ || m.origin == id_) {
        throw Error(ErrorCode::kProtocol,
                    fmt::format("worker {} at block {} cannot use {} from {} for block {}", id_,
                                next_block_, MessageKindName(m.kind), m.origin, m.block));
      }
      pending_[m.block].push_back(std::move(m));
      return;
    case MessageKind::kOutputPartition:
      break;
  }
  throw Error(ErrorCode::kProtocol,
              fmt::format("worker {} received {}", id_, MessageKindName(m.kind)));
}

bool Worker::Ready() const {
  if (!plan_ || !state_ || done()) return false;
  const int peers = config_.n_partitions - 1;
  auto it = pending_.find(next_block_);
  const size_t have = it == pending_.end() ? 0 : it->second.size();
  return static_cast<int>(have) >= peers;
}

std::string Worker::WaitingFor() const {
  if (done()) return fmt::format("worker {} finished", id_);
  std::vector<std::string> missing;
  if (!plan_) missing.push_back("control (partition plan)");
  if (!state_) missing.push_back("input partition");
  std::set<int> have;
  if (auto it = pending_.find(next_block_); it != pending_.end()) {
    for (const Message& m : it->second) have.insert(m.origin);
  }
  std::vector<int> absent;
  for (int q = 1; q <= config_.n_partitions; ++q) {
    if (q != id_ && !have.contains(q)) absent.push_back(q);
  }
  if (!absent.empty()) {
    missing.push_back(fmt::format("{} for block {} from partitions {}",
                                  MessageKindName(ExchangeKind()), next_block_, absent));
  }
  return fmt::format("worker {} waiting on {}", id_, fmt::join(missing, "; "));
}

Worker::StepResult Worker::Step(std::vector<Message> incoming) {
  for (Message& m : incoming) Absorb(std::move(m));
  StepResult result;
  if (!Ready()) return result;

  std::vector<Message> exchange = std::move(pending_[next_block_]);
  pending_.erase(next_block_);
  std::set<int> origins;
  for (const Message& m : exchange) origins.insert(m.origin);
  if (static_cast<int>(origins.size()) != config_.n_partitions - 1 ||
      static_cast<int>(exchange.size()) != config_.n_partitions - 1) {
    throw Error(ErrorCode::kProtocol,
                fmt::format("worker {} block {}: duplicate peer data", id_, next_block_));
  }

  FlopCounter counter;
  {
    ScopedFlopCounter scope(&counter);
    const BlockWeights& block = weights_->blocks[static_cast<size_t>(next_block_)];
    Matrix next = strategy_ == Strategy::kPrism ? RunPrismBlock(block, std::move(exchange))
                                                : RunFullBlock(block, std::move(exchange));
    result.block = next_block_;
    ++next_block_;
    result.outgoing = Emit(next);
  }
  result.progressed = true;
  result.flops = counter.total();
  return result;
}

Matrix Worker::RunPrismBlock(const BlockWeights& block, std::vector<Message> exchange) {
  std::vector<SegmentMeans> received;
  received.reserve(exchange.size());
  for (Message& m : exchange) {
    received.push_back({m.origin, std::move(m.payload), std::move(m.counts)});
  }
  const AugmentedInput aug = AssembleAugmented(*state_, std::move(received), *plan_, id_);
  // Layernorm is position-wise, so normalizing the assembled rows once covers
  // both the local queries and the landmark keys/values.
  AugmentedInput normed = aug;
  normed.assembled = LayerNorm(aug.assembled, block.ln1_gain, block.ln1_bias);
  normed.local = SliceRows(normed.assembled, 0, aug.local_rows());

  std::optional<CausalMask> mask;
  if (config_.causal()) mask = BuildCausalMask(*plan_, id_, config_.landmarks);

  std::vector<Matrix> heads;
  heads.reserve(block.heads.size());
  for (const HeadWeights& head : block.heads) {
    heads.push_back(AttentionScaled(normed.local, normed, head, mask ? &*mask : nullptr));
  }
  return FeedForwardResidual(Add(*state_, ProjectHeads(heads, block)), block);
}

Matrix Worker::RunFullBlock(const BlockWeights& block, std::vector<Message> exchange) {
  std::vector<Matrix> parts(static_cast<size_t>(config_.n_partitions));
  parts[static_cast<size_t>(id_ - 1)] = *state_;
  for (Message& m : exchange) {
    if (m.payload.rows() != plan_->Get(m.origin).size() || m.payload.cols() != config_.embed_dim) {
      throw Error(ErrorCode::kProtocol, fmt::format("partition {} sent {}x{} rows", m.origin,
                                                    m.payload.rows(), m.payload.cols()));
    }
    parts[static_cast<size_t>(m.origin - 1)] = std::move(m.payload);
  }
  const PartitionRange& own = plan_->Get(id_);
  const Matrix normed = LayerNorm(ConcatRows(parts), block.ln1_gain, block.ln1_bias);
  const Matrix local = SliceRows(normed, own.start, own.end);

  std::vector<Matrix> heads;
  heads.reserve(block.heads.size());
  for (const HeadWeights& head : block.heads) {
    heads.push_back(AttentionRows(
        local, normed, head, config_.causal() ? std::optional<int64_t>(own.start) : std::nullopt));
  }
  return FeedForwardResidual(Add(*state_, ProjectHeads(heads, block)), block);
}

Message Worker::MakeMessage(int to, MessageKind kind, Matrix payload, std::vector<int64_t> counts) {
  Message m;
  m.from = id_;
  m.to = to;
  m.block = next_block_;
  m.kind = kind;
  m.origin = id_;
  m.seq = seq_++;
  m.payload = std::move(payload);
  m.counts = std::move(counts);
  return m;
}

std::vector<Message> Worker::Emit(const Matrix& next_state) {
  state_ = next_state;
  std::vector<Message> out;
  if (done()) {
    out.push_back(MakeMessage(kMasterId, MessageKind::kOutputPartition,
                              FinalLayerNorm(next_state, *weights_)));
    return out;
  }
  if (config_.n_partitions == 1) return out;

  Matrix payload;
  std::vector<int64_t> counts;
  if (strategy_ == Strategy::kPrism) {
    SegmentMeans sm = ComputeSegmentMeans(next_state, config_.landmarks, id_);
    payload = std::move(sm.means);
    counts = std::move(sm.counts);
  } else {
    payload = next_state;
  }
  if (mode_ == CommMode::kBroadcast) {
    out.push_back(MakeMessage(kBroadcastId, ExchangeKind(), std::move(payload), std::move(counts)));
    return out;
  }
  for (int q = 1; q <= config_.n_partitions; ++q) {
    if (q != id_) out.push_back(MakeMessage(q, ExchangeKind(), payload, counts));
  }
  return out;
}

Matrix Aggregate(std::span<const Message> outputs, const PartitionPlan& plan) {
  std::vector<const Message*> by_partition(static_cast<size_t>(plan.count()), nullptr);
  for (const Message& m : outputs) {
    if (m.kind != MessageKind::kOutputPartition || m.origin < 1 || m.origin > plan.count()) {
      throw Error(ErrorCode::kProtocol,
                  fmt::format("{} from partition {} is not an output partition",
                              MessageKindName(m.kind), m.origin));
    }
    const Message*& slot = by_partition[static_cast<size_t>(m.origin - 1)];
    if (slot != nullptr) {
      throw Error(ErrorCode::kProtocol, fmt::format("partition {} reported twice", m.origin));
    }
    if (m.payload.rows() != plan.Get(m.origin).size()) {
      throw Error(ErrorCode::kProtocol,
                  fmt::format("partition {} returned {} rows, expected {}", m.origin,
                              m.payload.rows(), plan.Get(m.origin).size()));
    }
    slot = &m;
  }
  std::vector<Matrix> parts;
  for (size_t i = 0; i < by_partition.size(); ++i) {
    if (by_partition[i] == nullptr) {
      throw Error(ErrorCode::kProtocol, fmt::format("partition {} missing", i + 1));
    }
    parts.push_back(by_partition[i]->payload);
  }
  return ConcatRows(parts);
}

}  // namespace seqpar
