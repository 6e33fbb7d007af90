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

#include "seqpar/tensor.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "seqpar/error.h"
#include "seqpar/flops.h"
#include "test_util.h"

namespace seqpar {
namespace {

using testing_util::ExpectCode;
using testing_util::NaiveMatMul;
using testing_util::Rand;

TEST(MatMulTest, IdentityLeavesMatrixUnchanged) {
  const Matrix m = Matrix::FromRows({{1.5, -2.0}, {0.25, 4.0}});
  EXPECT_EQ(MatMul(Matrix::Identity(2), m), m);
}

TEST(MatMulTest, HandComputedProduct) {
  const Matrix a = Matrix::FromRows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::FromRows({{5}, {6}});
  EXPECT_EQ(MatMul(a, b), Matrix::FromRows({{17}, {39}}));
}

TEST(MatMulTest, MatchesTripleLoop) {
  Rand rand(11);
  const Matrix a = rand.Mat(7, 5), b = rand.Mat(5, 3);
  EXPECT_LE(MaxAbsDiff(MatMul(a, b), NaiveMatMul(a, b)), 1e-12);
  EXPECT_LE(MaxAbsDiff(MatMulTransposed(a, Transpose(b)), NaiveMatMul(a, b)), 1e-12);
}

TEST(MatMulTest, ShapeMismatchThrows) {
  ExpectCode(ErrorCode::kShape, [] { MatMul(Matrix(2, 3), Matrix(2, 3)); });
  ExpectCode(ErrorCode::kShape, [] { MatMulTransposed(Matrix(2, 3), Matrix(2, 4)); });
  ExpectCode(ErrorCode::kShape, [] { Add(Matrix(2, 3), Matrix(3, 2)); });
}

TEST(MatMulTest, IsAssociativeOnRandomInstances) {
  Rand rand(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = rand.Mat(4, 6), b = rand.Mat(6, 3), c = rand.Mat(3, 5);
    EXPECT_LE(MaxAbsDiff(MatMul(MatMul(a, b), c), MatMul(a, MatMul(b, c))), 1e-9);
  }
}

TEST(RowSoftmaxTest, UniformRow) {
  const Matrix s = RowSoftmax(Matrix::FromRows({{0, 0, 0}}));
  for (int64_t j = 0; j < 3; ++j) EXPECT_NEAR(s(0, j), 1.0 / 3.0, 1e-15);
}

TEST(RowSoftmaxTest, LargeLogitsDoNotOverflow) {
  const Matrix s = RowSoftmax(Matrix::FromRows({{1000, 1000}}));
  EXPECT_EQ(s(0, 0), 0.5);
  EXPECT_EQ(s(0, 1), 0.5);
}

TEST(RowSoftmaxTest, RowsSumToOne) {
  Rand rand(13);
  const Matrix s = RowSoftmax(rand.Mat(4, 6, 5.0));
  for (int64_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (int64_t j = 0; j < 6; ++j) {
      EXPECT_GE(s(i, j), 0.0);
      sum += s(i, j);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(RowSoftmaxTest, NegativeInfinityIsMasked) {
  const double inf = std::numeric_limits<double>::infinity();
  const Matrix s = RowSoftmax(Matrix::FromRows({{0, -inf, 0}}));
  EXPECT_EQ(s(0, 1), 0.0);
  EXPECT_EQ(s(0, 0), 0.5);
  ExpectCode(ErrorCode::kDegenerateMask, [&] { RowSoftmax(Matrix::FromRows({{-inf, -inf}})); });
}

TEST(RowNormalizeWeightedTest, OnesReduceToPlainNormalization) {
  Rand rand(14);
  Matrix psi = rand.Mat(3, 5);
  for (double& v : psi.data()) v = std::exp(v);
  const std::vector<int64_t> ones(5, 1);
  const Matrix out = RowNormalizeWeighted(psi, ones);
  for (int64_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (int64_t j = 0; j < 5; ++j) sum += psi(i, j);
    for (int64_t j = 0; j < 5; ++j) EXPECT_NEAR(out(i, j), psi(i, j) / sum, 1e-15);
  }
}

TEST(RowNormalizeWeightedTest, HandComputedWeights) {
  const double e = std::exp(1.0);
  const std::vector<int64_t> g = {3, 1};
  const Matrix out = RowNormalizeWeighted(Matrix::FromRows({{e, e}}), g);
  EXPECT_NEAR(out(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.25, 1e-15);
}

// Duplicate column j g[j] times, normalize the widened row, then fold the
// copies back: the folded mass of column j must equal the weighted form.
TEST(RowNormalizeWeightedTest, MatchesDuplicatedColumnOracle) {
  Rand rand(15);
  for (int trial = 0; trial < 25; ++trial) {
    const int64_t rows = rand.Int(1, 5), cols = rand.Int(1, 7);
    Matrix logits = rand.Mat(rows, cols, 3.0);
    std::vector<int64_t> g(static_cast<size_t>(cols));
    for (int64_t& v : g) v = rand.Int(1, 6);
    const Matrix psi = RowStableExp(logits, 1.0);
    const Matrix weighted = RowNormalizeWeighted(psi, g);
    for (int64_t i = 0; i < rows; ++i) {
      std::vector<double> wide;
      std::vector<int64_t> owner;
      for (int64_t j = 0; j < cols; ++j) {
        for (int64_t k = 0; k < g[static_cast<size_t>(j)]; ++k) {
          wide.push_back(logits(i, j));
          owner.push_back(j);
        }
      }
      const Matrix soft = RowSoftmax(Matrix(1, static_cast<int64_t>(wide.size()), wide));
      std::vector<double> folded(static_cast<size_t>(cols), 0.0);
      for (size_t k = 0; k < wide.size(); ++k) {
        folded[static_cast<size_t>(owner[k])] += soft(0, static_cast<int64_t>(k));
      }
      for (int64_t j = 0; j < cols; ++j) {
        EXPECT_NEAR(weighted(i, j), folded[static_cast<size_t>(j)], 1e-12);
      }
    }
  }
}

TEST(RowNormalizeWeightedTest, SoftmaxEqualsNormalizedStableExp) {
  Rand rand(16);
  const Matrix m = rand.Mat(5, 8, 4.0);
  const std::vector<int64_t> ones(8, 1);
  EXPECT_LE(MaxAbsDiff(RowSoftmax(m), RowNormalizeWeighted(RowStableExp(m, 1.0), ones)), 1e-12);
}

TEST(RowNormalizeWeightedTest, ZeroMassThrows) {
  const std::vector<int64_t> g = {1, 1};
  ExpectCode(ErrorCode::kNumericDegenerate,
             [&] { RowNormalizeWeighted(Matrix::FromRows({{0, 0}}), g); });
  ExpectCode(ErrorCode::kShape, [&] { RowNormalizeWeighted(Matrix(1, 3), g); });
}

TEST(RowStableExpTest, HiddenColumnsAreZeroAndIgnoredForTheMax) {
  const std::vector<uint8_t> visible = {1, 0, 1};
  const Matrix psi = RowStableExp(Matrix::FromRows({{1.0, 500.0, 0.0}}), 2.0, visible);
  EXPECT_EQ(psi(0, 0), 1.0);  // exp(2 - 2)
  EXPECT_EQ(psi(0, 1), 0.0);
  EXPECT_NEAR(psi(0, 2), std::exp(-2.0), 1e-15);
  const std::vector<uint8_t> none = {0, 0};
  ExpectCode(ErrorCode::kDegenerateMask, [&] { RowStableExp(Matrix(1, 2), 1.0, none); });
}

TEST(LayerNormTest, ConstantRowBecomesZero) {
  const std::vector<double> gain(4, 1.0), bias(4, 0.0);
  const Matrix out = LayerNorm(Matrix::FromRows({{3, 3, 3, 3}}), gain, bias);
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNormTest, RowsHaveZeroMeanUnitVariance) {
  Rand rand(17);
  const std::vector<double> gain(6, 1.0), bias(6, 0.0);
  const Matrix out = LayerNorm(rand.Mat(4, 6, 10.0), gain, bias, 0.0);
  for (int64_t i = 0; i < 4; ++i) {
    double mean = 0.0, var = 0.0;
    for (int64_t j = 0; j < 6; ++j) mean += out(i, j) / 6.0;
    for (int64_t j = 0; j < 6; ++j) var += (out(i, j) - mean) * (out(i, j) - mean) / 6.0;
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-9);
  }
}

TEST(LayerNormTest, GainAndBiasApply) {
  const std::vector<double> gain = {2.0, 2.0}, bias = {1.0, -1.0};
  const Matrix out = LayerNorm(Matrix::FromRows({{-1, 1}}), gain, bias, 0.0);
  EXPECT_NEAR(out(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(out(0, 1), 1.0, 1e-15);
  ExpectCode(ErrorCode::kShape, [&] { LayerNorm(Matrix(1, 3), gain, bias); });
}

TEST(GeluTest, KnownValues) {
  const Matrix out = Gelu(Matrix::FromRows({{0.0, 10.0, -10.0, 1.0}}));
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_NEAR(out(0, 1), 10.0, 1e-12);
  EXPECT_NEAR(out(0, 2), 0.0, 1e-12);
  EXPECT_NEAR(out(0, 3), 0.8411919906, 1e-9);  // tanh approximation at 1
}

TEST(ConcatTest, RowsKeepOrder) {
  const Matrix a = Matrix::FromRows({{1, 2, 3}, {4, 5, 6}});
  const Matrix b = Matrix::FromRows({{7, 8, 9}});
  EXPECT_EQ(ConcatRows({a, b}), Matrix::FromRows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}));
  EXPECT_EQ(
      ConcatCols(std::vector<Matrix>{Matrix::FromRows({{1}, {2}}), Matrix::FromRows({{3}, {4}})}),
      Matrix::FromRows({{1, 3}, {2, 4}}));
  ExpectCode(ErrorCode::kShape, [] { ConcatRows({Matrix(1, 2), Matrix(1, 3)}); });
}

TEST(SliceTest, SliceRowsAndSegmentMean) {
  const Matrix m = Matrix::FromRows({{1, 1}, {3, 3}, {8, 0}});
  EXPECT_EQ(SliceRows(m, 1, 3), Matrix::FromRows({{3, 3}, {8, 0}}));
  EXPECT_EQ(SegmentRowMean(m, 0, 2), (std::vector<double>{2, 2}));
  ExpectCode(ErrorCode::kShape, [&] { SegmentRowMean(m, 2, 2); });
  ExpectCode(ErrorCode::kShape, [&] { SliceRows(m, 0, 4); });
}

TEST(DeterminismTest, RepeatedCallsAreBitIdentical) {
  Rand rand(18);
  const Matrix a = rand.Mat(9, 7), b = rand.Mat(7, 9);
  EXPECT_EQ(MatMul(a, b), MatMul(a, b));
  EXPECT_EQ(RowSoftmax(MatMul(a, b)), RowSoftmax(MatMul(a, b)));
}

TEST(FlopCounterTest, KernelsChargeTheActiveScope) {
  FlopCounter outer, inner;
  {
    ScopedFlopCounter a(&outer);
    MatMul(Matrix(2, 3), Matrix(3, 4));
    {
      ScopedFlopCounter b(&inner);
      RowSoftmax(Matrix(2, 5));
      Transpose(Matrix(3, 3));  // free
    }
    Add(Matrix(2, 2), Matrix(2, 2));
  }
  EXPECT_EQ(outer.total(), 2 * 2 * 3 * 4 + 4);
  EXPECT_EQ(inner.total(), 4 * 10);
  MatMul(Matrix(2, 2), Matrix(2, 2));  // no scope: dropped
  EXPECT_EQ(outer.total(), 52);
}

TEST(MatrixTest, RejectsWrongDataLength) {
  ExpectCode(ErrorCode::kShape, [] { Matrix(2, 2, std::vector<double>(3)); });
  EXPECT_TRUE(AllFinite(Matrix(2, 2)));
  Matrix m(1, 1);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(AllFinite(m));
}

}  // namespace
}  // namespace seqpar
