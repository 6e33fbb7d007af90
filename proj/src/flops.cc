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

#include "seqpar/flops.h"

namespace seqpar {
namespace {

thread_local FlopCounter* active_counter = nullptr;

}  // namespace

ScopedFlopCounter::ScopedFlopCounter(FlopCounter* counter) : previous_(active_counter) {
  active_counter = counter;
}

ScopedFlopCounter::~ScopedFlopCounter() { active_counter = previous_; }

void ChargeFlops(int64_t flops) {
  if (active_counter != nullptr) active_counter->Add(flops);
}

}  // namespace seqpar
