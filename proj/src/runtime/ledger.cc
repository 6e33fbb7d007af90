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

#include "seqpar/runtime/ledger.h"

#include <fmt/format.h>

#include "seqpar/runtime/wire.h"

namespace seqpar {

LedgerEntry& LedgerEntry::operator+=(const LedgerEntry& other) {
  messages += other.messages;
  elements += other.elements;
  count_entries += other.count_entries;
  payload_bytes += other.payload_bytes;
  wire_bytes += other.wire_bytes;
  return *this;
}

void CommLedger::Record(const Message& m, int scalar_bytes) {
  LedgerEntry e;
  e.messages = 1;
  e.elements = m.payload.size();
  e.count_entries = static_cast<int64_t>(m.counts.size());
  e.payload_bytes = e.elements * scalar_bytes + e.count_entries * kCountBytes;
  e.wire_bytes = kHeaderBytes + e.payload_bytes;
  Add({m.from, m.block, m.kind}, e);
}

void CommLedger::Add(const LedgerKey& key, const LedgerEntry& entry) { entries_[key] += entry; }

void CommLedger::Merge(const CommLedger& other) {
  for (const auto& [key, entry] : other.entries_) entries_[key] += entry;
}

LedgerEntry CommLedger::Get(int device, int64_t block, MessageKind kind) const {
  auto it = entries_.find({device, block, kind});
  return it == entries_.end() ? LedgerEntry{} : it->second;
}

LedgerEntry CommLedger::TotalFor(int device, int64_t block) const {
  LedgerEntry total;
  for (const auto& [key, entry] : entries_) {
    if (key.device == device && key.block == block) total += entry;
  }
  return total;
}

std::string CommLedger::ToString() const {
  std::string out = fmt::format("mode={}\n", CommModeName(mode_));
  for (const auto& [key, e] : entries_) {
    out += fmt::format(
        "device={} block={} kind={} messages={} elements={} counts={} payload_bytes={} "
        "wire_bytes={}\n",
        key.device, key.block, MessageKindName(key.kind), e.messages, e.elements, e.count_entries,
        e.payload_bytes, e.wire_bytes);
  }
  return out;
}

}  // namespace seqpar
