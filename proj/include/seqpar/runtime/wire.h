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

#ifndef SEQPAR_RUNTIME_WIRE_H_
#define SEQPAR_RUNTIME_WIRE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqpar/runtime/message.h"

namespace seqpar {

// Wire layout, all little-endian:
//   header: 9 x int64 = from, to, block, kind, origin, rows, cols, L, seq
//   payload: rows * cols scalars, row-major, as float32 or float64
//   counts: L x int64
inline constexpr int64_t kHeaderFields = 9;
inline constexpr int64_t kHeaderBytes = kHeaderFields * 8;
inline constexpr int64_t kCountBytes = 8;

// Scalar width on the wire; 4 rounds payloads to single precision.
void CheckScalarBytes(int scalar_bytes);

int64_t EncodedSize(int64_t rows, int64_t cols, int64_t n_counts, int scalar_bytes);

std::vector<std::byte> EncodeMessage(const Message& m, int scalar_bytes);
// Throws kProtocol on a truncated or inconsistent buffer.
Message DecodeMessage(std::span<const std::byte> bytes, int scalar_bytes);

// One line of the debug trace: header fields as text, payload elided.
std::string TraceLine(const Message& m);

}  // namespace seqpar

#endif  // SEQPAR_RUNTIME_WIRE_H_
