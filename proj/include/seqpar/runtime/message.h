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

#ifndef SEQPAR_RUNTIME_MESSAGE_H_
#define SEQPAR_RUNTIME_MESSAGE_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "seqpar/tensor.h"

namespace seqpar {

// Device 0 is the master; workers are 1..P and worker p owns partition p.
inline constexpr int kMasterId = 0;
// Destination meaning "every worker except the message's origin partition".
inline constexpr int kBroadcastId = -1;

enum class MessageKind : uint8_t {
  kControl,            // master -> worker: partition sizes; `to` is the index
  kInputPartition,     // master -> worker: the worker's own tokens
  kSegmentMeansBlock,  // L x D landmarks plus their L counts
  kPartitionExchange,  // full N_q x D partition rows (voltage)
  kOutputPartition,    // worker -> master: final rows of one partition
};

std::string_view MessageKindName(MessageKind kind);

struct Message {
  int from = 0;
  int to = 0;
  // Block whose input this message carries. Output partitions use n_blocks.
  int64_t block = 0;
  MessageKind kind = MessageKind::kControl;
  // Partition the payload describes. Differs from `from` when the master
  // forwards data about partition q.
  int origin = 0;
  int64_t seq = 0;
  Matrix payload;
  std::vector<int64_t> counts;

  int64_t payload_elements() const { return payload.size() + static_cast<int64_t>(counts.size()); }

  bool operator==(const Message&) const = default;
};

}  // namespace seqpar

#endif  // SEQPAR_RUNTIME_MESSAGE_H_
