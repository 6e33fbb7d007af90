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

#include "seqpar/runtime/wire.h"

#include <fmt/format.h>

#include <bit>

#include "seqpar/error.h"

namespace seqpar {
namespace {

class Writer {
 public:
  explicit Writer(size_t capacity) { out_.reserve(capacity); }

  void U64(uint64_t v) { Bytes(v, 8); }
  void I64(int64_t v) { U64(static_cast<uint64_t>(v)); }
  void U32(uint32_t v) { Bytes(v, 4); }

  std::vector<std::byte> Take() { return std::move(out_); }

 private:
  void Bytes(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
  }

  std::vector<std::byte> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  uint64_t U64() { return Bytes(8); }
  int64_t I64() { return static_cast<int64_t>(U64()); }
  uint32_t U32() { return static_cast<uint32_t>(Bytes(4)); }

 private:
  uint64_t Bytes(int n) {
    if (pos_ + static_cast<size_t>(n) > in_.size()) {
      throw Error(ErrorCode::kProtocol, "truncated message");
    }
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(std::to_integer<uint8_t>(in_[pos_++])) << (8 * i);
    }
    return v;
  }

  std::span<const std::byte> in_;
  size_t pos_ = 0;
};

}  // namespace

std::string_view MessageKindName(MessageKind kind) {
  switch (kind) {
    case MessageKind::kControl:
      return "Control";
    case MessageKind::kInputPartition:
      return "InputPartition";
    case MessageKind::kSegmentMeansBlock:
      return "SegmentMeansBlock";
    case MessageKind::kPartitionExchange:
      return "PartitionExchange";
    case MessageKind::kOutputPartition:
      return "OutputPartition";
  }
  return "?";
}

void CheckScalarBytes(int scalar_bytes) {
  if (scalar_bytes != 4 && scalar_bytes != 8) {
    throw Error(ErrorCode::kConfig,
                fmt::format("bytes per scalar must be 4 or 8, got {}", scalar_bytes));
  }
}

int64_t EncodedSize(int64_t rows, int64_t cols, int64_t n_counts, int scalar_bytes) {
  return kHeaderBytes + rows * cols * scalar_bytes + n_counts * kCountBytes;
}

std::vector<std::byte> EncodeMessage(const Message& m, int scalar_bytes) {
  CheckScalarBytes(scalar_bytes);
  const auto n_counts = static_cast<int64_t>(m.counts.size());
  Writer w(
      static_cast<size_t>(EncodedSize(m.payload.rows(), m.payload.cols(), n_counts, scalar_bytes)));
  w.I64(m.from);
  w.I64(m.to);
  w.I64(m.block);
  w.I64(static_cast<int64_t>(m.kind));
  w.I64(m.origin);
  w.I64(m.payload.rows());
  w.I64(m.payload.cols());
  w.I64(n_counts);
  w.I64(m.seq);
  for (double v : m.payload.data()) {
    if (scalar_bytes == 8) {
      w.U64(std::bit_cast<uint64_t>(v));
    } else {
      w.U32(std::bit_cast<uint32_t>(static_cast<float>(v)));
    }
  }
  for (int64_t c : m.counts) w.I64(c);
  return w.Take();
}

Message DecodeMessage(std::span<const std::byte> bytes, int scalar_bytes) {
  CheckScalarBytes(scalar_bytes);
  Reader r(bytes);
  Message m;
  m.from = static_cast<int>(r.I64());
  m.to = static_cast<int>(r.I64());
  m.block = r.I64();
  const int64_t kind = r.I64();
  if (kind < 0 || kind > static_cast<int64_t>(MessageKind::kOutputPartition)) {
    throw Error(ErrorCode::kProtocol, fmt::format("unknown message kind {}", kind));
  }
  m.kind = static_cast<MessageKind>(kind);
  m.origin = static_cast<int>(r.I64());
  const int64_t rows = r.I64();
  const int64_t cols = r.I64();
  const int64_t n_counts = r.I64();
  m.seq = r.I64();
  if (rows < 0 || cols < 0 || n_counts < 0 ||
      static_cast<int64_t>(bytes.size()) != EncodedSize(rows, cols, n_counts, scalar_bytes)) {
    throw Error(ErrorCode::kProtocol,
                fmt::format("{} bytes do not match a {}x{} payload with {} counts", bytes.size(),
                            rows, cols, n_counts));
  }
  std::vector<double> data(static_cast<size_t>(rows * cols));
  for (double& v : data) {
    v = scalar_bytes == 8 ? std::bit_cast<double>(r.U64())
                          : static_cast<double>(std::bit_cast<float>(r.U32()));
  }
  m.payload = Matrix(rows, cols, std::move(data));
  m.counts.resize(static_cast<size_t>(n_counts));
  for (int64_t& c : m.counts) c = r.I64();
  return m;
}

std::string TraceLine(const Message& m) {
  return fmt::format("from={} to={} block={} kind={} origin={} rows={} cols={} L={} seq={}", m.from,
                     m.to, m.block, MessageKindName(m.kind), m.origin, m.payload.rows(),
                     m.payload.cols(), m.counts.size(), m.seq);
}

}  // namespace seqpar
