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

#include "seqpar/attention.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqpar/error.h"

namespace seqpar {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double InvSqrtHeadDim(const HeadWeights& w) {
  return 1.0 / std::sqrt(static_cast<double>(w.head_dim()));
}

void CheckWeights(const Matrix& x, const HeadWeights& w) {
  if (w.query.rows() != x.cols() || w.key.rows() != x.cols() || w.value.rows() != x.cols() ||
      w.key.cols() != w.query.cols()) {
    throw Error(ErrorCode::kShape, fmt::format("head weights {}x{} do not fit {} input features",
                                               w.query.rows(), w.query.cols(), x.cols()));
  }
}

}  // namespace

Matrix AttentionRows(const Matrix& queries, const Matrix& kv, const HeadWeights& w,
                     std::optional<int64_t> causal_offset) {
  CheckWeights(queries, w);
  CheckWeights(kv, w);
  const Matrix q = MatMul(queries, w.query);
  const Matrix k = MatMul(kv, w.key);
  const Matrix v = MatMul(kv, w.value);
  Matrix logits = Scale(MatMulTransposed(q, k), InvSqrtHeadDim(w));
  if (causal_offset) {
    for (int64_t i = 0; i < logits.rows(); ++i) {
      for (int64_t j = *causal_offset + i + 1; j < logits.cols(); ++j) logits(i, j) = kNegInf;
    }
  }
  return MatMul(RowSoftmax(logits), v);
}

Matrix AttentionReference(const Matrix& x, const HeadWeights& w, bool causal) {
  return AttentionRows(x, x, w, causal ? std::optional<int64_t>(0) : std::nullopt);
}

Matrix AttentionPermutedKv(const Matrix& x, std::span<const int64_t> perm, const HeadWeights& w,
                           bool causal) {
  const int64_t n = x.rows();
  std::vector<uint8_t> seen(static_cast<size_t>(n), 0);
  if (static_cast<int64_t>(perm.size()) != n) {
    throw Error(ErrorCode::kInvalidPermutation,
                fmt::format("{} indices for {} rows", perm.size(), n));
  }
  for (int64_t idx : perm) {
    if (idx < 0 || idx >= n || seen[static_cast<size_t>(idx)]) {
      throw Error(ErrorCode::kInvalidPermutation,
                  fmt::format("index {} repeated or out of range", idx));
    }
    seen[static_cast<size_t>(idx)] = 1;
  }
  CheckWeights(x, w);

  Matrix permuted(n, x.cols());
  for (int64_t k = 0; k < n; ++k) {
    std::copy(x.row(perm[k]).begin(), x.row(perm[k]).end(), permuted.row(k).begin());
  }
  const Matrix q = MatMul(x, w.query);
  const Matrix k = MatMul(permuted, w.key);
  const Matrix v = MatMul(permuted, w.value);
  Matrix logits = Scale(MatMulTransposed(q, k), InvSqrtHeadDim(w));
  if (causal) {
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        if (perm[j] > i) logits(i, j) = kNegInf;
      }
    }
  }
  return MatMul(RowSoftmax(logits), v);
}

int64_t CausalMask::RowCount(int64_t i) const {
  int64_t count = 0;
  for (int64_t j = 0; j < cols; ++j) count += visible(i, j) ? 1 : 0;
  return count;
}

CausalMask BuildCausalMask(const PartitionPlan& plan, int p, int64_t landmarks) {
  const int64_t local = plan.Get(p).size();
  CausalMask mask;
  mask.owner = p;
  mask.rows = local;
  mask.cols = local + landmarks * (plan.count() - 1);
  mask.bits.assign(static_cast<size_t>(mask.rows * mask.cols), 0);
  const int64_t past_end = local + landmarks * (p - 1);
  for (int64_t i = 0; i < mask.rows; ++i) {
    for (int64_t j = 0; j < mask.cols; ++j) {
      const bool on = (j <= i) || (j >= local && j < past_end);
      mask.bits[static_cast<size_t>(i * mask.cols + j)] = on ? 1 : 0;
    }
  }
  return mask;
}

CausalMask BuildNaiveLocalMask(const PartitionPlan& plan, int p, int64_t landmarks) {
  CausalMask mask = BuildCausalMask(plan, p, landmarks);
  for (int64_t i = 0; i < mask.rows; ++i) {
    for (int64_t j = mask.rows; j < mask.cols; ++j) {
      mask.bits[static_cast<size_t>(i * mask.cols + j)] = 1;
    }
  }
  return mask;
}

Matrix AttentionDuplicatedOracle(const Matrix& x_p, std::span<const SegmentMeans> landmark_blocks,
                                 const HeadWeights& w, const CausalMask* mask) {
  std::vector<SegmentMeans> blocks(landmark_blocks.begin(), landmark_blocks.end());
  std::sort(blocks.begin(), blocks.end(), [](const SegmentMeans& a, const SegmentMeans& b) {
    return a.source_partition < b.source_partition;
  });

  // Map every duplicated column back to its non-duplicated mask column.
  std::vector<Matrix> parts{x_p};
  std::vector<int64_t> source_column;
  for (int64_t i = 0; i < x_p.rows(); ++i) source_column.push_back(i);
  int64_t column = x_p.rows();
  for (const SegmentMeans& sm : blocks) {
    parts.push_back(ExpandDuplicated(sm));
    for (int64_t l = 0; l < sm.landmarks(); ++l, ++column) {
      for (int64_t k = 0; k < sm.counts[static_cast<size_t>(l)]; ++k) {
        source_column.push_back(column);
      }
    }
  }
  const Matrix duplicated = ConcatRows(parts);
  if (mask != nullptr && (mask->rows != x_p.rows() || mask->cols != column)) {
    throw Error(ErrorCode::kShape, fmt::format("mask {}x{} for {} queries over {} columns",
                                               mask->rows, mask->cols, x_p.rows(), column));
  }

  CheckWeights(x_p, w);
  const Matrix q = MatMul(x_p, w.query);
  const Matrix k = MatMul(duplicated, w.key);
  const Matrix v = MatMul(duplicated, w.value);
  Matrix logits = Scale(MatMulTransposed(q, k), InvSqrtHeadDim(w));
  if (mask != nullptr) {
    for (int64_t i = 0; i < logits.rows(); ++i) {
      for (int64_t j = 0; j < logits.cols(); ++j) {
        if (!mask->visible(i, source_column[static_cast<size_t>(j)])) logits(i, j) = kNegInf;
      }
    }
  }
  return MatMul(RowSoftmax(logits), v);
}

Matrix AttentionScaled(const Matrix& x_p, const AugmentedInput& aug, const HeadWeights& w,
                       const CausalMask* mask) {
  if (static_cast<int64_t>(aug.g.size()) != aug.assembled.rows()) {
    throw Error(ErrorCode::kShape, fmt::format("g has {} entries for {} assembled rows",
                                               aug.g.size(), aug.assembled.rows()));
  }
  if (mask != nullptr && (mask->rows != x_p.rows() || mask->cols != aug.assembled.rows())) {
    throw Error(ErrorCode::kShape,
                fmt::format("mask {}x{} for {} queries over {} columns", mask->rows, mask->cols,
                            x_p.rows(), aug.assembled.rows()));
  }
  CheckWeights(x_p, w);
  CheckWeights(aug.assembled, w);
  const Matrix q = MatMul(x_p, w.query);
  const Matrix k = MatMul(aug.assembled, w.key);
  const Matrix v = MatMul(aug.assembled, w.value);
  const Matrix psi = RowStableExp(
      MatMulTransposed(q, k), InvSqrtHeadDim(w),
      mask != nullptr ? std::span<const uint8_t>(mask->bits) : std::span<const uint8_t>());
  return MatMul(RowNormalizeWeighted(psi, aug.g), v);
}

}  // namespace seqpar
