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

#include "seqpar/runtime/runtime.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <utility>

#include "seqpar/error.h"
#include "seqpar/flops.h"
#include "seqpar/partition.h"
#include "seqpar/runtime/wire.h"
#include "seqpar/runtime/worker.h"

namespace seqpar {
namespace {

// In-memory network. Each sender owns its ledger slot, so recording needs no
// lock; inboxes and the trace stream are shared and guarded by mu_.
class Bus {
 public:
  Bus(int n_workers, CommMode mode, int scalar_bytes, const RunOptions& options)
      : n_workers_(n_workers),
        scalar_bytes_(scalar_bytes),
        options_(options),
        inboxes_(static_cast<size_t>(n_workers) + 1),
        ledgers_(static_cast<size_t>(n_workers) + 1, CommLedger(mode)) {}

  void Send(const Message& m) {
    ledgers_[static_cast<size_t>(m.from)].Record(m, scalar_bytes_);
    const bool dropped = options_.drop && options_.drop(m);
    Message decoded = DecodeMessage(EncodeMessage(m, scalar_bytes_), scalar_bytes_);
    std::lock_guard lock(mu_);
    if (options_.trace != nullptr) *options_.trace << TraceLine(m) << '\n';
    if (dropped) return;
    if (m.to == kBroadcastId) {
      for (int q = 1; q <= n_workers_; ++q) {
        if (q != m.origin) inboxes_[static_cast<size_t>(q)].push_back(decoded);
      }
    } else {
      if (m.to < 0 || m.to > n_workers_) {
        throw Error(ErrorCode::kProtocol, fmt::format("no device {}", m.to));
      }
      inboxes_[static_cast<size_t>(m.to)].push_back(std::move(decoded));
    }
    cv_.notify_all();
  }

  std::vector<Message> Drain(int device) {
    std::lock_guard lock(mu_);
    return std::exchange(inboxes_[static_cast<size_t>(device)], {});
  }

  // False on timeout. Returns early when `abort` is set.
  bool WaitForMail(int device, std::chrono::milliseconds timeout, const std::atomic<bool>& abort) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] {
      return abort.load() || !inboxes_[static_cast<size_t>(device)].empty();
    });
  }

  void WakeAll() {
    std::lock_guard lock(mu_);
    cv_.notify_all();
  }

  CommLedger MergedLedger(CommMode mode) const {
    CommLedger merged(mode);
    for (const CommLedger& l : ledgers_) merged.Merge(l);
    return merged;
  }

 private:
  int n_workers_;
  int scalar_bytes_;
  const RunOptions& options_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::vector<Message>> inboxes_;  // index 0 is the master
  std::vector<CommLedger> ledgers_;
};

class Master {
 public:
  Master(Bus& bus, CommMode mode) : bus_(bus), mode_(mode) {}

  // Sends the plan, every input partition and the data each worker needs for
  // block 0. Returns the FLOPs spent deriving that data.
  int64_t Distribute(const Matrix& x, const PartitionPlan& plan, const TransformerConfig& config,
                     Strategy strategy) {
    FlopCounter counter;
    ScopedFlopCounter scope(&counter);
    const std::vector<int64_t> sizes = plan.Sizes();
    std::vector<Matrix> partitions;
    for (const PartitionRange& r : plan.parts()) {
      partitions.push_back(SliceRows(x, r.start, r.end));
      Send(r.id, MessageKind::kControl, r.id, Matrix(), sizes);
      Send(r.id, MessageKind::kInputPartition, r.id, partitions.back());
    }
    if (plan.count() == 1) return counter.total();
    for (const PartitionRange& r : plan.parts()) {
      const Matrix& x_q = partitions[static_cast<size_t>(r.id - 1)];
      Matrix payload;
      std::vector<int64_t> counts;
      MessageKind kind = MessageKind::kPartitionExchange;
      if (strategy == Strategy::kPrism) {
        SegmentMeans sm = ComputeSegmentMeans(x_q, config.landmarks, r.id);
        payload = std::move(sm.means);
        counts = std::move(sm.counts);
        kind = MessageKind::kSegmentMeansBlock;
      } else {
        payload = x_q;
      }
      if (mode_ == CommMode::kBroadcast) {
        Send(kBroadcastId, kind, r.id, payload, counts);
        continue;
      }
      for (int p = 1; p <= plan.count(); ++p) {
        if (p != r.id) Send(p, kind, r.id, payload, counts);
      }
    }
    return counter.total();
  }

 private:
  void Send(int to, MessageKind kind, int origin, Matrix payload,
            std::vector<int64_t> counts = {}) {
    Message m;
    m.from = kMasterId;
    m.to = to;
    m.block = 0;
    m.kind = kind;
    m.origin = origin;
    m.seq = seq_++;
    m.payload = std::move(payload);
    m.counts = std::move(counts);
    bus_.Send(m);
  }

  Bus& bus_;
  CommMode mode_;
  int64_t seq_ = 0;
};

std::vector<std::unique_ptr<Worker>> MakeWorkers(const TransformerConfig& config,
                                                 const WeightSet& w, Strategy strategy,
                                                 CommMode mode) {
  auto shared = std::make_shared<const WeightSet>(w);
  std::vector<std::unique_ptr<Worker>> workers;
  for (int p = 1; p <= config.n_partitions; ++p) {
    workers.push_back(std::make_unique<Worker>(p, shared, config, strategy, mode));
  }
  return workers;
}

void RunSequential(std::vector<std::unique_ptr<Worker>>& workers, Bus& bus,
                   const RunOptions& options, std::vector<std::vector<int64_t>>& flops) {
  std::vector<int> order(workers.size());
  std::iota(order.begin(), order.end(), 1);
  std::mt19937_64 rng(options.shuffle_seed.value_or(0));
  int idle_rounds = 0;
  auto all_done = [&] {
    return std::all_of(workers.begin(), workers.end(), [](const auto& w) { return w->done(); });
  };
  while (!all_done()) {
    if (options.shuffle_seed) std::shuffle(order.begin(), order.end(), rng);
    bool progressed = false;
    for (int p : order) {
      Worker& worker = *workers[static_cast<size_t>(p - 1)];
      std::vector<Message> inbox = bus.Drain(p);
      if (options.shuffle_seed) std::shuffle(inbox.begin(), inbox.end(), rng);
      if (worker.done() && inbox.empty()) continue;
      Worker::StepResult r = worker.Step(std::move(inbox));
      if (!r.progressed) continue;
      progressed = true;
      flops[static_cast<size_t>(p - 1)][static_cast<size_t>(r.block)] = r.flops;
      for (const Message& m : r.outgoing) bus.Send(m);
    }
    idle_rounds = progressed ? 0 : idle_rounds + 1;
    if (idle_rounds >= options.stall_budget) {
      std::string report;
      for (const auto& w : workers) {
        if (!w->done()) report += fmt::format("\n  {}", w->WaitingFor());
      }
      throw Error(ErrorCode::kStall,
                  fmt::format("no progress for {} rounds:{}", idle_rounds, report));
    }
  }
}

void RunThreaded(std::vector<std::unique_ptr<Worker>>& workers, Bus& bus, const RunOptions& options,
                 std::vector<std::vector<int64_t>>& flops) {
  std::atomic<bool> abort{false};
  std::mutex error_mu;
  std::exception_ptr first_error;
  std::vector<std::thread> threads;
  for (auto& owned : workers) {
    threads.emplace_back([&, worker = owned.get()] {
      try {
        bool wait = false;
        while (!worker->done() && !abort.load()) {
          if (wait && !bus.WaitForMail(worker->id(), options.stall_timeout, abort)) {
            throw Error(ErrorCode::kStall,
                        fmt::format("timed out after {} ms: {}", options.stall_timeout.count(),
                                    worker->WaitingFor()));
          }
          if (abort.load()) return;
          Worker::StepResult r = worker->Step(bus.Drain(worker->id()));
          wait = !r.progressed;
          if (!r.progressed) continue;
          flops[static_cast<size_t>(worker->id() - 1)][static_cast<size_t>(r.block)] = r.flops;
          for (const Message& m : r.outgoing) bus.Send(m);
        }
      } catch (...) {
        {
          std::lock_guard lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
        abort.store(true);
        bus.WakeAll();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Timeline BuildTimeline(const CommLedger& ledger, const std::vector<std::vector<int64_t>>& flops,
                       int64_t master_flops, int64_t n_blocks, const NetworkModel& net,
                       double throughput) {
  auto transfer = [&](int device, int64_t block) {
    const LedgerEntry e = ledger.TotalFor(device, block);
    return net.TransferSeconds(e.wire_bytes, e.messages);
  };
  Timeline t;
  t.distribute_s = static_cast<double>(master_flops) / throughput + transfer(kMasterId, 0);
  t.total_s = t.distribute_s;
  for (int64_t b = 0; b < n_blocks; ++b) {
    BlockTiming bt;
    bt.block = b;
    for (size_t p = 0; p < flops.size(); ++p) {
      bt.compute_s = std::max(bt.compute_s,
                              static_cast<double>(flops[p][static_cast<size_t>(b)]) / throughput);
      bt.comm_s = std::max(bt.comm_s, transfer(static_cast<int>(p) + 1, b + 1));
    }
    t.total_s += bt.compute_s + bt.comm_s;
    t.blocks.push_back(bt);
  }
  return t;
}

}  // namespace

TransformerConfig EffectiveConfig(const TransformerConfig& config, Strategy strategy) {
  const bool position_wise = strategy == Strategy::kVoltage || strategy == Strategy::kPrism;
  if (position_wise && config.n_partitions < 2) {
    throw Error(ErrorCode::kConfig,
                fmt::format("strategy '{}' needs at least 2 partitions", StrategyName(strategy)));
  }
  TransformerConfig effective = config;
  if (strategy == Strategy::kSingle) {
    effective.n_partitions = 1;
    effective.landmarks = 1;
  }
  return effective;
}

RunResult RunDistributed(const Matrix& x, const WeightSet& w, const TransformerConfig& config,
                         Strategy strategy, const NetworkModel& net, const RunOptions& options) {
  if (strategy == Strategy::kTensorParallel) {
    throw Error(ErrorCode::kConfig, "tensor parallelism is modeled analytically only");
  }
  const TransformerConfig cfg = EffectiveConfig(config, strategy);
  cfg.Validate();
  net.Validate();
  if (!(options.device_flops_per_second > 0.0) || options.stall_budget < 1) {
    throw Error(ErrorCode::kConfig, "device throughput and stall budget must be positive");
  }
  if (x.rows() != cfg.n_tokens || x.cols() != cfg.embed_dim) {
    throw Error(ErrorCode::kShape, fmt::format("input {}x{} for a model expecting {}x{}", x.rows(),
                                               x.cols(), cfg.n_tokens, cfg.embed_dim));
  }
  if (static_cast<int64_t>(w.blocks.size()) != cfg.n_blocks) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} weight blocks for {} model blocks", w.blocks.size(), cfg.n_blocks));
  }

  const PartitionPlan plan = MakePartitionPlan(cfg.n_tokens, cfg.n_partitions);
  Bus bus(cfg.n_partitions, options.mode, net.bytes_per_scalar, options);
  auto workers = MakeWorkers(cfg, w, strategy, options.mode);
  std::vector<std::vector<int64_t>> flops(static_cast<size_t>(cfg.n_partitions),
                                          std::vector<int64_t>(static_cast<size_t>(cfg.n_blocks)));

  RunResult result;
  result.master_flops = Master(bus, options.mode).Distribute(x, plan, cfg, strategy);
  if (options.threaded) {
    RunThreaded(workers, bus, options, flops);
  } else {
    RunSequential(workers, bus, options, flops);
  }
  const std::vector<Message> outputs = bus.Drain(kMasterId);
  result.output = Aggregate(outputs, plan);
  result.ledger = bus.MergedLedger(options.mode);
  result.timeline = BuildTimeline(result.ledger, flops, result.master_flops, cfg.n_blocks, net,
                                  options.device_flops_per_second);
  result.device_flops = std::move(flops);
  return result;
}

}  // namespace seqpar
