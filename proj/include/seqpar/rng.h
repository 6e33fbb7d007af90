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

#ifndef SEQPAR_RNG_H_
#define SEQPAR_RNG_H_

#include <cstdint>

namespace seqpar {

// Counter-based generator: value k of stream s under seed is a pure function
// of (seed, s, k), so any tensor can be regenerated independently of the
// order in which others were drawn. The mixing function is the SplitMix64
// finalizer.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(Mix(seed ^ Mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  uint64_t Bits(uint64_t counter) const { return Mix(key_ + counter * 0x9e3779b97f4a7c15ULL); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform(uint64_t counter) const {
    return static_cast<double>(Bits(counter) >> 11) * 0x1.0p-53;
  }

  // Irwin-Hall approximation of a standard normal: sum of 12 uniforms minus
  // 6. Mean 0, variance 1, support [-6, 6].
  double Normal(uint64_t index) const {
    double sum = 0.0;
    for (uint64_t i = 0; i < 12; ++i) sum += Uniform(index * 12 + i);
    return sum - 6.0;
  }

  static constexpr uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t key_;
};

}  // namespace seqpar

#endif  // SEQPAR_RNG_H_
