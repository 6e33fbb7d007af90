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

#ifndef SEQPAR_FLOPS_H_
#define SEQPAR_FLOPS_H_

#include <cstdint>

namespace seqpar {

// FLOP charges for every kernel in tensor.h. The analytic cost model in
// analysis.h and the runtime instrumentation both read these, so a change
// here moves both sides together.
//
// A multiply-accumulate is 2 FLOPs. Exponentials, divisions and square roots
// are 1 FLOP each. Comparisons, copies and mask selects are free.
namespace flop_cost {

// m x k times k x n.
constexpr int64_t MatMul(int64_t m, int64_t k, int64_t n) { return 2 * m * k * n; }

// Per element: subtract row max, exp, accumulate, divide.
inline constexpr int64_t kSoftmaxPerElement = 4;
// Per element: scale, subtract row max, exp.
inline constexpr int64_t kScaledExpPerElement = 3;
// Per element: multiply by g, accumulate, divide.
inline constexpr int64_t kWeightedNormalizePerElement = 3;
// Per element: accumulate mean, center, square, accumulate variance,
// normalize, gain, bias.
inline constexpr int64_t kLayerNormPerElement = 7;
// tanh-approximated GELU: cube, two scalings, add, tanh, add one, two
// multiplies folded to 8.
inline constexpr int64_t kGeluPerElement = 8;
inline constexpr int64_t kAddPerElement = 1;
inline constexpr int64_t kScalePerElement = 1;

// Column-wise mean of `rows` rows: one add per element, one divide per column.
constexpr int64_t SegmentMean(int64_t rows, int64_t cols) { return rows * cols + cols; }

}  // namespace flop_cost

// Thread-local FLOP accumulator. Kernels charge the innermost active scope on
// the calling thread; with no scope installed the charge is dropped.
class FlopCounter {
 public:
  int64_t total() const { return total_; }
  void Add(int64_t flops) { total_ += flops; }
  void Reset() { total_ = 0; }

 private:
  int64_t total_ = 0;
};

class ScopedFlopCounter {
 public:
  explicit ScopedFlopCounter(FlopCounter* counter);
  ~ScopedFlopCounter();

  ScopedFlopCounter(const ScopedFlopCounter&) = delete;
  ScopedFlopCounter& operator=(const ScopedFlopCounter&) = delete;

 private:
  FlopCounter* previous_;
};

void ChargeFlops(int64_t flops);

}  // namespace seqpar

#endif  // SEQPAR_FLOPS_H_
