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

#ifndef SEQPAR_RUNTIME_LEDGER_H_
#define SEQPAR_RUNTIME_LEDGER_H_

#include <compare>
#include <cstdint>
#include <map>
#include <string>

#include "seqpar/runtime/message.h"
#include "seqpar/strategy.h"

namespace seqpar {

struct LedgerKey {
  int device = 0;  // sender
  int64_t block = 0;
  MessageKind kind = MessageKind::kControl;

  auto operator<=>(const LedgerKey&) const = default;
};

// Totals for one (sender, block, kind). A broadcast counts once: one message
// and one copy of its elements, however many peers receive it.
struct LedgerEntry {
  int64_t messages = 0;
  int64_t elements = 0;       // matrix elements (rows x cols)
  int64_t count_entries = 0;  // segment counts carried next to landmarks
  int64_t payload_bytes = 0;  // elements * bytes_per_scalar + count_entries * 8
  int64_t wire_bytes = 0;     // payload_bytes plus headers

  LedgerEntry& operator+=(const LedgerEntry& other);
  bool operator==(const LedgerEntry&) const = default;
};

// Append-only record of every message sent. Each device keeps its own ledger
// during a run; the harness merges them afterwards.
class CommLedger {
 public:
  explicit CommLedger(CommMode mode = CommMode::kUnicast) : mode_(mode) {}

  void Record(const Message& m, int scalar_bytes);
  void Add(const LedgerKey& key, const LedgerEntry& entry);
  void Merge(const CommLedger& other);

  CommMode mode() const { return mode_; }
  const std::map<LedgerKey, LedgerEntry>& entries() const { return entries_; }
  // Zero entry when nothing was recorded under the key.
  LedgerEntry Get(int device, int64_t block, MessageKind kind) const;
  LedgerEntry TotalFor(int device, int64_t block) const;

  bool operator==(const CommLedger&) const = default;

  // Plain-text dump, one line per key.
  std::string ToString() const;

 private:
  CommMode mode_;
  std::map<LedgerKey, LedgerEntry> entries_;
};

}  // namespace seqpar

#endif  // SEQPAR_RUNTIME_LEDGER_H_
