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

#ifndef SEQPAR_STRATEGY_H_
#define SEQPAR_STRATEGY_H_

#include <fmt/format.h>

#include <string_view>

#include "seqpar/error.h"

namespace seqpar {

// single:  one device runs the whole model.
// voltage: position-wise partitioning; every block ends with a full exchange
//          of partition outputs, and each device recomputes keys/values over
//          the whole sequence.
// prism:   position-wise partitioning exchanging only L segment means per
//          partition, with the count-weighted softmax.
// tensor:  Megatron-style weight splitting. Cost model only; the runtime does
//          not simulate it.
enum class Strategy { kSingle, kVoltage, kPrism, kTensorParallel };

enum class CommMode { kUnicast, kBroadcast };

inline std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kSingle:
      return "single";
    case Strategy::kVoltage:
      return "voltage";
    case Strategy::kPrism:
      return "prism";
    case Strategy::kTensorParallel:
      return "tensor";
  }
  return "?";
}

inline Strategy ParseStrategy(std::string_view name) {
  for (Strategy s :
       {Strategy::kSingle, Strategy::kVoltage, Strategy::kPrism, Strategy::kTensorParallel}) {
    if (StrategyName(s) == name) return s;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown strategy '{}'", name));
}

inline std::string_view CommModeName(CommMode m) {
  return m == CommMode::kUnicast ? "unicast" : "broadcast";
}

inline CommMode ParseCommMode(std::string_view name) {
  if (name == "unicast") return CommMode::kUnicast;
  if (name == "broadcast") return CommMode::kBroadcast;
  throw Error(ErrorCode::kConfig, fmt::format("unknown mode '{}'", name));
}

}  // namespace seqpar

#endif  // SEQPAR_STRATEGY_H_
