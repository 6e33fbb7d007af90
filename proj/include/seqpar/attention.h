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

#ifndef SEQPAR_ATTENTION_H_
#define SEQPAR_ATTENTION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seqpar/partition.h"
#include "seqpar/tensor.h"

namespace seqpar {

// Projections of one attention head, each D x d.
struct HeadWeights {
  Matrix query;
  Matrix key;
  Matrix value;

  int64_t head_dim() const { return query.cols(); }

  bool operator==(const HeadWeights&) const = default;
};

// Plain softmax attention of `queries` against keys/values projected from
// `kv`. With a causal offset, query row i sits at global position offset + i
// and sees kv rows j <= offset + i; kv rows must then be in global order.
Matrix AttentionRows(const Matrix& queries, const Matrix& kv, const HeadWeights& w,
                     std::optional<int64_t> causal_offset = std::nullopt);

// softmax(Q K^T / sqrt(d)) V over one unpartitioned sequence.
Matrix AttentionReference(const Matrix& x, const HeadWeights& w, bool causal);

// Same output as AttentionReference, but keys and values are built from rows
// of x reordered by perm (kv row k is x row perm[k]). Causal visibility follows
// each key's original position. Throws kInvalidPermutation if perm is not a
// bijection on [0, x.rows()).
Matrix AttentionPermutedKv(const Matrix& x, std::span<const int64_t> perm, const HeadWeights& w,
                           bool causal);

// Visibility of the N_p x N^_p score matrix on device `owner`. Local columns
// follow the lower triangle; landmark columns of earlier partitions are fully
// visible and those of later partitions fully hidden.
struct CausalMask {
  int owner = 0;
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<uint8_t> bits;  // row-major, 1 = visible

  bool visible(int64_t i, int64_t j) const { return bits[static_cast<size_t>(i * cols + j)] != 0; }
  int64_t RowCount(int64_t i) const;
};

CausalMask BuildCausalMask(const PartitionPlan& plan, int p, int64_t landmarks);

// Lower triangle on the local block with every landmark column visible. Lets
// partition p see summaries of future partitions; kept as a negative control.
CausalMask BuildNaiveLocalMask(const PartitionPlan& plan, int p, int64_t landmarks);

// Ground truth for the scaled form: physically repeats each landmark
// counts[l] times after the local rows and runs plain softmax attention for
// the query rows x_p. `mask`, when given, is laid out over the non-duplicated
// columns (local rows then blocks in ascending source order) and is widened
// to match the duplicated columns.
Matrix AttentionDuplicatedOracle(const Matrix& x_p, std::span<const SegmentMeans> landmark_blocks,
                                 const HeadWeights& w, const CausalMask* mask = nullptr);

// Duplicate-free evaluation: Psi = exp(Q_p K^_p^T / sqrt(d)) is formed once
// over the N^_p columns of aug.assembled, each column is weighted by g[j],
// rows are normalized and multiplied by V^_p. Masked cells get zero weight.
// Throws kDegenerateMask when a row has no visible column.
Matrix AttentionScaled(const Matrix& x_p, const AugmentedInput& aug, const HeadWeights& w,
                       const CausalMask* mask = nullptr);

}  // namespace seqpar

#endif  // SEQPAR_ATTENTION_H_
