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

#ifndef SEQPAR_RUNTIME_NETWORK_H_
#define SEQPAR_RUNTIME_NETWORK_H_

#include <fmt/format.h>

#include <cstdint>

#include "seqpar/error.h"
#include "seqpar/runtime/wire.h"

namespace seqpar {

// Link model shared by every device: a message of b bytes occupies the
// sender's link for 8b / bandwidth seconds plus a fixed per-message latency.
struct NetworkModel {
  double bandwidth_bps = 100e6;
  double per_message_latency_s = 0.0;
  int bytes_per_scalar = 4;

  void Validate() const {
    if (!(bandwidth_bps > 0.0) || per_message_latency_s < 0.0) {
      throw Error(ErrorCode::kConfig, fmt::format("bandwidth {} bps / latency {} s", bandwidth_bps,
                                                  per_message_latency_s));
    }
    CheckScalarBytes(bytes_per_scalar);
  }

  double TransferSeconds(int64_t bytes, int64_t messages) const {
    return static_cast<double>(bytes) * 8.0 / bandwidth_bps +
           static_cast<double>(messages) * per_message_latency_s;
  }
};

}  // namespace seqpar

#endif  // SEQPAR_RUNTIME_NETWORK_H_
