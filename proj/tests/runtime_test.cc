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

#include <chrono>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "seqpar/error.h"
#include "seqpar/model.h"
#include "seqpar/runtime/ledger.h"
#include "seqpar/runtime/wire.h"
#include "seqpar/runtime/worker.h"
#include "test_util.h"

namespace seqpar {
namespace {

using testing_util::ExpectCode;
using testing_util::Rand;
using testing_util::TinyConfig;

NetworkModel F64() {
  NetworkModel net;
  net.bytes_per_scalar = 8;
  return net;
}

TransformerConfig Partitioned(int p, int64_t landmarks, int64_t n = 12,
                              ModelKind kind = ModelKind::kEncoder) {
  TransformerConfig c = TinyConfig(n, kind);
  c.n_partitions = p;
  c.landmarks = landmarks;
  return c;
}

Message Sample(Rand& rand) {
  Message m;
  m.from = 2;
  m.to = kBroadcastId;
  m.block = 5;
  m.kind = MessageKind::kSegmentMeansBlock;
  m.origin = 2;
  m.seq = 17;
  m.payload = rand.Mat(3, 4);
  m.counts = {4, 4, 5};
  return m;
}

TEST(WireTest, RoundTripIsExactAtEightBytes) {
  Rand rand(61);
  const Message m = Sample(rand);
  const auto bytes = EncodeMessage(m, 8);
  EXPECT_EQ(static_cast<int64_t>(bytes.size()), kHeaderBytes + 12 * 8 + 3 * kCountBytes);
  EXPECT_EQ(DecodeMessage(bytes, 8), m);
}

TEST(WireTest, FourBytesRoundToFloat) {
  Rand rand(62);
  const Message m = Sample(rand);
  const auto bytes = EncodeMessage(m, 4);
  EXPECT_EQ(static_cast<int64_t>(bytes.size()), EncodedSize(3, 4, 3, 4));
  const Message back = DecodeMessage(bytes, 4);
  EXPECT_EQ(back.counts, m.counts);
  EXPECT_EQ(back.seq, m.seq);
  for (int64_t i = 0; i < 12; ++i) {
    const double v = m.payload.data()[static_cast<size_t>(i)];
    EXPECT_EQ(back.payload.data()[static_cast<size_t>(i)],
              static_cast<double>(static_cast<float>(v)));
  }
}

TEST(WireTest, MalformedBuffersThrow) {
  Rand rand(63);
  auto bytes = EncodeMessage(Sample(rand), 8);
  const std::vector<std::byte> cut(bytes.begin(), bytes.end() - 1);
  ExpectCode(ErrorCode::kProtocol, [&] { DecodeMessage(cut, 8); });
  ExpectCode(ErrorCode::kProtocol, [&] { DecodeMessage(bytes, 4); });
  bytes[24] = std::byte{99};  // kind field
  ExpectCode(ErrorCode::kProtocol, [&] { DecodeMessage(bytes, 8); });
  ExpectCode(ErrorCode::kConfig, [&] { EncodeMessage(Message{}, 2); });
}

TEST(WireTest, TraceLineElidesThePayload) {
  Rand rand(64);
  EXPECT_EQ(TraceLine(Sample(rand)),
            "from=2 to=-1 block=5 kind=SegmentMeansBlock origin=2 rows=3 cols=4 L=3 seq=17");
}

TEST(LedgerTest, RecordsPayloadAndWireBytes) {
  Rand rand(65);
  CommLedger ledger;
  const Message m = Sample(rand);
  ledger.Record(m, 4);
  ledger.Record(m, 4);
  const LedgerEntry e = ledger.Get(2, 5, MessageKind::kSegmentMeansBlock);
  EXPECT_EQ(e.messages, 2);
  EXPECT_EQ(e.elements, 24);
  EXPECT_EQ(e.count_entries, 6);
  EXPECT_EQ(e.payload_bytes, 2 * (12 * 4 + 3 * 8));
  EXPECT_EQ(e.wire_bytes, e.payload_bytes + 2 * kHeaderBytes);
  EXPECT_EQ(ledger.Get(2, 4, MessageKind::kSegmentMeansBlock), LedgerEntry{});
  EXPECT_EQ(ledger.TotalFor(2, 5), e);

  CommLedger other;
  other.Record(m, 4);
  other.Merge(ledger);
  EXPECT_EQ(other.Get(2, 5, MessageKind::kSegmentMeansBlock).messages, 3);
}

std::vector<Message> Outputs(const Matrix& x, const PartitionPlan& plan) {
  std::vector<Message> out;
  for (const PartitionRange& r : plan.parts()) {
    Message m;
    m.kind = MessageKind::kOutputPartition;
    m.origin = r.id;
    m.from = r.id;
    m.payload = SliceRows(x, r.start, r.end);
    out.push_back(m);
  }
  return out;
}

TEST(AggregateTest, ArrivalOrderDoesNotMatter) {
  Rand rand(66);
  const Matrix x = rand.Mat(11, 3);
  const PartitionPlan plan = MakePartitionPlan(11, 4);
  std::vector<Message> out = Outputs(x, plan);
  std::swap(out[0], out[3]);
  std::swap(out[1], out[2]);
  EXPECT_EQ(Aggregate(out, plan), x);
}

TEST(AggregateTest, MissingOrDuplicatePartitionsThrow) {
  Rand rand(67);
  const PartitionPlan plan = MakePartitionPlan(9, 3);
  std::vector<Message> out = Outputs(rand.Mat(9, 2), plan);
  std::vector<Message> missing(out.begin(), out.begin() + 2);
  ExpectCode(ErrorCode::kProtocol, [&] { Aggregate(missing, plan); });
  out.push_back(out[1]);
  ExpectCode(ErrorCode::kProtocol, [&] { Aggregate(out, plan); });
  std::vector<Message> wrong = Outputs(rand.Mat(9, 2), MakePartitionPlan(9, 3));
  wrong[0].payload = rand.Mat(2, 2);
  ExpectCode(ErrorCode::kProtocol, [&] { Aggregate(wrong, plan); });
}

TEST(RunDistributedTest, SingleMatchesReferenceExactly) {
  const TransformerConfig c = TinyConfig(10);
  const WeightSet w = GenerateWeights(c, 70);
  const Matrix x = GenerateInput(c, 70);
  const RunResult r = RunDistributed(x, w, c, Strategy::kSingle, F64());
  EXPECT_EQ(r.output, ReferenceForward(x, w, c));
  EXPECT_EQ(r.device_flops.size(), 1u);
}

TEST(RunDistributedTest, VoltageMatchesSingle) {
  for (ModelKind kind : {ModelKind::kEncoder, ModelKind::kDecoder}) {
    for (int p : {2, 3, 5}) {
      const TransformerConfig c = Partitioned(p, 1, 13, kind);
      const WeightSet w = GenerateWeights(c, 71);
      const Matrix x = GenerateInput(c, 71);
      EXPECT_LE(MaxAbsDiff(RunDistributed(x, w, c, Strategy::kVoltage, F64()).output,
                           ReferenceForward(x, w, c)),
                1e-12);
    }
  }
}

TEST(RunDistributedTest, PrismWithFullLandmarksIsLossless) {
  for (ModelKind kind : {ModelKind::kEncoder, ModelKind::kDecoder}) {
    const TransformerConfig c = Partitioned(3, 4, 12, kind);
    const WeightSet w = GenerateWeights(c, 72);
    const Matrix x = GenerateInput(c, 72);
    EXPECT_LE(MaxAbsDiff(RunDistributed(x, w, c, Strategy::kPrism, F64()).output,
                         ReferenceForward(x, w, c)),
              1e-12);
  }
}

TEST(RunDistributedTest, PrismWithFewLandmarksApproximates) {
  const TransformerConfig c = Partitioned(2, 1, 12);
  const WeightSet w = GenerateWeights(c, 73);
  const Matrix x = GenerateInput(c, 73);
  const Matrix out = RunDistributed(x, w, c, Strategy::kPrism, F64()).output;
  EXPECT_TRUE(AllFinite(out));
  EXPECT_GT(MaxAbsDiff(out, ReferenceForward(x, w, c)), 1e-9);
}

TEST(RunDistributedTest, FloatWireStaysClose) {
  const TransformerConfig c = Partitioned(2, 6, 12);
  const WeightSet w = GenerateWeights(c, 74);
  const Matrix x = GenerateInput(c, 74);
  NetworkModel net;
  net.bytes_per_scalar = 4;
  const double err =
      MaxAbsDiff(RunDistributed(x, w, c, Strategy::kPrism, net).output, ReferenceForward(x, w, c));
  EXPECT_GT(err, 0.0);
  EXPECT_LT(err, 1e-4);
}

TEST(RunDistributedTest, LedgerCountsLandmarksPerPeer) {
  TransformerConfig c;
  c.n_tokens = 197;
  c.embed_dim = 768;
  c.head_dim = 64;
  c.n_heads = 12;
  c.ffn_dim = 32;
  c.n_blocks = 2;
  c.n_partitions = 2;
  c.landmarks = 10;
  const WeightSet w = GenerateWeights(c, 75);
  const Matrix x = GenerateInput(c, 75);
  const RunResult r = RunDistributed(x, w, c, Strategy::kPrism, F64());
  for (int device : {1, 2}) {
    const LedgerEntry e = r.ledger.Get(device, 1, MessageKind::kSegmentMeansBlock);
    EXPECT_EQ(e.messages, 1);
    EXPECT_EQ(e.elements, 10 * 768);
    EXPECT_EQ(e.count_entries, 10);
  }
  const LedgerEntry out = r.ledger.Get(1, 2, MessageKind::kOutputPartition);
  EXPECT_EQ(out.elements, 98 * 768);
  const LedgerEntry master = r.ledger.Get(kMasterId, 0, MessageKind::kSegmentMeansBlock);
  EXPECT_EQ(master.elements, 2 * 10 * 768);

  const RunResult v = RunDistributed(x, w, c, Strategy::kVoltage, F64());
  EXPECT_EQ(v.ledger.Get(2, 1, MessageKind::kPartitionExchange).elements, 99 * 768);
}

TEST(RunDistributedTest, BroadcastSendsOneMessagePerBlock) {
  const TransformerConfig c = Partitioned(4, 2, 16);
  const WeightSet w = GenerateWeights(c, 76);
  const Matrix x = GenerateInput(c, 76);
  RunOptions uni, broad;
  broad.mode = CommMode::kBroadcast;
  const RunResult u = RunDistributed(x, w, c, Strategy::kPrism, F64(), uni);
  const RunResult b = RunDistributed(x, w, c, Strategy::kPrism, F64(), broad);
  EXPECT_EQ(u.output, b.output);
  for (int64_t block = 1; block < c.n_blocks; ++block) {
    EXPECT_EQ(u.ledger.Get(3, block, MessageKind::kSegmentMeansBlock).messages, 3);
    EXPECT_EQ(b.ledger.Get(3, block, MessageKind::kSegmentMeansBlock).messages, 1);
    EXPECT_EQ(b.ledger.Get(3, block, MessageKind::kSegmentMeansBlock).elements, 2 * c.embed_dim);
  }
}

TEST(RunDistributedTest, ExecutionOrderDoesNotChangeResults) {
  for (Strategy s : {Strategy::kVoltage, Strategy::kPrism}) {
    const TransformerConfig c = Partitioned(3, 2, 14, ModelKind::kDecoder);
    const WeightSet w = GenerateWeights(c, 77);
    const Matrix x = GenerateInput(c, 77);
    const RunResult base = RunDistributed(x, w, c, s, F64());
    RunOptions threaded;
    threaded.threaded = true;
    const RunResult t = RunDistributed(x, w, c, s, F64(), threaded);
    EXPECT_EQ(t.output, base.output);
    EXPECT_EQ(t.ledger, base.ledger);
    EXPECT_EQ(t.device_flops, base.device_flops);
    for (uint64_t seed : {1u, 2u, 3u}) {
      RunOptions shuffled;
      shuffled.shuffle_seed = seed;
      const RunResult sh = RunDistributed(x, w, c, s, F64(), shuffled);
      EXPECT_EQ(sh.output, base.output);
      EXPECT_EQ(sh.ledger, base.ledger);
    }
  }
}

TEST(RunDistributedTest, DroppedMessageStalls) {
  const TransformerConfig c = Partitioned(3, 2, 12);
  const WeightSet w = GenerateWeights(c, 78);
  const Matrix x = GenerateInput(c, 78);
  auto drop = [](const Message& m) {
    return m.kind == MessageKind::kSegmentMeansBlock && m.from == 2 && m.block == 2;
  };
  RunOptions seq;
  seq.drop = drop;
  try {
    RunDistributed(x, w, c, Strategy::kPrism, F64(), seq);
    ADD_FAILURE() << "expected a stall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStall);
    EXPECT_NE(std::string(e.what()).find("block 2"), std::string::npos) << e.what();
  }
  RunOptions threaded = seq;
  threaded.threaded = true;
  threaded.stall_timeout = std::chrono::milliseconds(200);
  ExpectCode(ErrorCode::kStall,
             [&] { RunDistributed(x, w, c, Strategy::kPrism, F64(), threaded); });
}

TEST(RunDistributedTest, TraceListsEveryMessage) {
  const TransformerConfig c = Partitioned(2, 1, 6);
  const WeightSet w = GenerateWeights(c, 79);
  std::ostringstream trace;
  RunOptions options;
  options.trace = &trace;
  const RunResult r = RunDistributed(GenerateInput(c, 79), w, c, Strategy::kPrism, F64(), options);
  int64_t sent = 0;
  for (const auto& [key, entry] : r.ledger.entries()) sent += entry.messages;
  int64_t lines = 0;
  for (char ch : trace.str()) lines += ch == '\n' ? 1 : 0;
  EXPECT_EQ(lines, sent);
  EXPECT_NE(trace.str().find("kind=Control"), std::string::npos);
  EXPECT_NE(trace.str().find("kind=OutputPartition"), std::string::npos);
}

TEST(RunDistributedTest, TimelineAddsUp) {
  const TransformerConfig c = Partitioned(2, 2, 12);
  const WeightSet w = GenerateWeights(c, 80);
  NetworkModel net = F64();
  net.bandwidth_bps = 1e6;
  const RunResult r = RunDistributed(GenerateInput(c, 80), w, c, Strategy::kPrism, net);
  ASSERT_EQ(static_cast<int64_t>(r.timeline.blocks.size()), c.n_blocks);
  double sum = r.timeline.distribute_s;
  for (const BlockTiming& b : r.timeline.blocks) {
    EXPECT_GT(b.compute_s, 0.0);
    EXPECT_GT(b.comm_s, 0.0);
    sum += b.compute_s + b.comm_s;
  }
  EXPECT_NEAR(r.timeline.total_s, sum, 1e-12);
}

TEST(RunDistributedTest, UnsupportedConfigurationsThrow) {
  const TransformerConfig one = Partitioned(1, 1);
  const WeightSet w = GenerateWeights(one, 81);
  const Matrix x = GenerateInput(one, 81);
  ExpectCode(ErrorCode::kConfig, [&] { RunDistributed(x, w, one, Strategy::kPrism, F64()); });
  ExpectCode(ErrorCode::kConfig, [&] { RunDistributed(x, w, one, Strategy::kVoltage, F64()); });
  ExpectCode(ErrorCode::kConfig,
             [&] { RunDistributed(x, w, Partitioned(2, 1), Strategy::kTensorParallel, F64()); });
  ExpectCode(ErrorCode::kShape,
             [&] { RunDistributed(Matrix(3, 16), w, Partitioned(2, 1), Strategy::kPrism, F64()); });
  NetworkModel bad = F64();
  bad.bytes_per_scalar = 3;
  ExpectCode(ErrorCode::kConfig, [&] { RunDistributed(x, w, one, Strategy::kSingle, bad); });
  EXPECT_EQ(EffectiveConfig(Partitioned(3, 2), Strategy::kSingle).n_partitions, 1);
}

TEST(WorkerTest, RejectsForeignMessages) {
  const TransformerConfig c = Partitioned(2, 1, 6);
  auto w = std::make_shared<const WeightSet>(GenerateWeights(c, 82));
  Worker worker(1, w, c, Strategy::kPrism, CommMode::kUnicast);
  Message output;
  output.kind = MessageKind::kOutputPartition;
  ExpectCode(ErrorCode::kProtocol, [&] { worker.Step({output}); });
  ExpectCode(ErrorCode::kConfig, [&] { Worker(3, w, c, Strategy::kPrism, CommMode::kUnicast); });
  EXPECT_FALSE(Worker(2, w, c, Strategy::kPrism, CommMode::kUnicast).Step({}).progressed);
}

}  // namespace
}  // namespace seqpar
