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

#ifndef SEQPAR_TENSOR_H_
#define SEQPAR_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace seqpar {

// Dense row-major matrix of doubles. Rows are tokens, columns are features.
class Matrix {
 public:
  Matrix() = default;
  // Zero-filled.
  Matrix(int64_t rows, int64_t cols);
  // Throws kShape unless data.size() == rows * cols.
  Matrix(int64_t rows, int64_t cols, std::vector<double> data);

  static Matrix FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix Identity(int64_t n);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  int64_t size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }

  double& operator()(int64_t r, int64_t c) { return data_[r * cols_ + c]; }
  double operator()(int64_t r, int64_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(int64_t r) {
    return {data_.data() + r * cols_, static_cast<size_t>(cols_)};
  }
  std::span<const double> row(int64_t r) const {
    return {data_.data() + r * cols_, static_cast<size_t>(cols_)};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  int64_t rows_ = 0;
  int64_t cols_ = 0;
  std::vector<double> data_;
};

// a * b.
Matrix MatMul(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix MatMulTransposed(const Matrix& a, const Matrix& b);
Matrix Transpose(const Matrix& m);

Matrix Add(const Matrix& a, const Matrix& b);
Matrix Scale(const Matrix& m, double factor);

// Row-wise softmax with max subtraction. Entries equal to -infinity are
// treated as masked and receive zero probability; a row with every entry
// masked throws kDegenerateMask.
Matrix RowSoftmax(const Matrix& m);

// exp(scale * m[i,j] - rowmax_i) over visible entries, exact zero elsewhere.
// `visible` is row-major rows x cols, or empty for "all visible". The max is
// taken over visible entries only. Throws kDegenerateMask for a row with no
// visible entry.
Matrix RowStableExp(const Matrix& m, double scale, std::span<const uint8_t> visible = {});

// out[i,j] = psi[i,j] * g[j] / sum_k psi[i,k] * g[k]. Entries of psi may be
// zero (masked) but each row must keep positive total mass, otherwise
// kNumericDegenerate.
Matrix RowNormalizeWeighted(const Matrix& psi, std::span<const int64_t> g);

// Per-row standardization followed by gain/bias. Constant rows map to bias.
Matrix LayerNorm(const Matrix& m, std::span<const double> gain, std::span<const double> bias,
                 double eps = 1e-5);

// tanh approximation.
Matrix Gelu(const Matrix& m);

// Stack parts vertically; all parts must share a column count.
Matrix ConcatRows(std::span<const Matrix> parts);
Matrix ConcatRows(std::initializer_list<Matrix> parts);
// Stack parts horizontally; all parts must share a row count.
Matrix ConcatCols(std::span<const Matrix> parts);

// Rows [start, end).
Matrix SliceRows(const Matrix& m, int64_t start, int64_t end);

// Column-wise mean of rows [start, end). Requires start < end <= m.rows().
std::vector<double> SegmentRowMean(const Matrix& m, int64_t start, int64_t end);

double MaxAbsDiff(const Matrix& a, const Matrix& b);
bool AllFinite(const Matrix& m);

}  // namespace seqpar

#endif  // SEQPAR_TENSOR_H_
