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

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "seqpar/error.h"
#include "seqpar/flops.h"

namespace seqpar {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void RequireShape(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    throw Error(ErrorCode::kShape,
                fmt::format("{}: {}x{} vs {}x{}", op, a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace

Matrix::Matrix(int64_t rows, int64_t cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), 0.0) {
  if (rows < 0 || cols < 0) {
    throw Error(ErrorCode::kShape, fmt::format("negative dims {}x{}", rows, cols));
  }
}

Matrix::Matrix(int64_t rows, int64_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0 || static_cast<int64_t>(data_.size()) != rows * cols) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} values for a {}x{} matrix", data_.size(), rows, cols));
  }
}

Matrix Matrix::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  const int64_t n = static_cast<int64_t>(rows.size());
  const int64_t c = n == 0 ? 0 : static_cast<int64_t>(rows.begin()->size());
  std::vector<double> data;
  data.reserve(static_cast<size_t>(n * c));
  for (const auto& r : rows) {
    if (static_cast<int64_t>(r.size()) != c) {
      throw Error(ErrorCode::kShape, "ragged row list");
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(n, c, std::move(data));
}

Matrix Matrix::Identity(int64_t n) {
  Matrix m(n, n);
  for (int64_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  RequireShape(a.cols() == b.rows(), "matmul", a, b);
  const int64_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix out(m, n);
  for (int64_t i = 0; i < m; ++i) {
    auto out_row = out.row(i);
    for (int64_t p = 0; p < k; ++p) {
      const double lhs = a(i, p);
      auto b_row = b.row(p);
      for (int64_t j = 0; j < n; ++j) out_row[j] += lhs * b_row[j];
    }
  }
  ChargeFlops(flop_cost::MatMul(m, k, n));
  return out;
}

Matrix MatMulTransposed(const Matrix& a, const Matrix& b) {
  RequireShape(a.cols() == b.cols(), "matmul_transposed", a, b);
  const int64_t m = a.rows(), k = a.cols(), n = b.rows();
  Matrix out(m, n);
  for (int64_t i = 0; i < m; ++i) {
    auto a_row = a.row(i);
    for (int64_t j = 0; j < n; ++j) {
      auto b_row = b.row(j);
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
      out(i, j) = acc;
    }
  }
  ChargeFlops(flop_cost::MatMul(m, k, n));
  return out;
}

Matrix Transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (int64_t i = 0; i < m.rows(); ++i) {
    for (int64_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

Matrix Add(const Matrix& a, const Matrix& b) {
  RequireShape(a.rows() == b.rows() && a.cols() == b.cols(), "add", a, b);
  Matrix out = a;
  auto dst = out.data();
  auto src = b.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  ChargeFlops(flop_cost::kAddPerElement * a.size());
  return out;
}

Matrix Scale(const Matrix& m, double factor) {
  Matrix out = m;
  for (double& v : out.data()) v *= factor;
  ChargeFlops(flop_cost::kScalePerElement * m.size());
  return out;
}

Matrix RowSoftmax(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (int64_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto dst = out.row(i);
    double row_max = kNegInf;
    for (double v : in) row_max = std::max(row_max, v);
    if (row_max == kNegInf) {
      throw Error(ErrorCode::kDegenerateMask, fmt::format("softmax row {} fully masked", i));
    }
    double sum = 0.0;
    for (size_t j = 0; j < in.size(); ++j) {
      dst[j] = in[j] == kNegInf ? 0.0 : std::exp(in[j] - row_max);
      sum += dst[j];
    }
    for (double& v : dst) v /= sum;
  }
  ChargeFlops(flop_cost::kSoftmaxPerElement * m.size());
  return out;
}

Matrix RowStableExp(const Matrix& m, double scale, std::span<const uint8_t> visible) {
  if (!visible.empty() && static_cast<int64_t>(visible.size()) != m.size()) {
    throw Error(ErrorCode::kShape, fmt::format("mask has {} cells for a {}x{} matrix",
                                               visible.size(), m.rows(), m.cols()));
  }
  auto is_visible = [&](int64_t i, int64_t j) {
    return visible.empty() || visible[static_cast<size_t>(i * m.cols() + j)] != 0;
  };
  Matrix out(m.rows(), m.cols());
  for (int64_t i = 0; i < m.rows(); ++i) {
    double row_max = kNegInf;
    for (int64_t j = 0; j < m.cols(); ++j) {
      if (is_visible(i, j)) row_max = std::max(row_max, scale * m(i, j));
    }
    if (row_max == kNegInf) {
      throw Error(ErrorCode::kDegenerateMask, fmt::format("row {} has no visible column", i));
    }
    for (int64_t j = 0; j < m.cols(); ++j) {
      out(i, j) = is_visible(i, j) ? std::exp(scale * m(i, j) - row_max) : 0.0;
    }
  }
  ChargeFlops(flop_cost::kScaledExpPerElement * m.size());
  return out;
}

Matrix RowNormalizeWeighted(const Matrix& psi, std::span<const int64_t> g) {
  if (static_cast<int64_t>(g.size()) != psi.cols()) {
    throw Error(ErrorCode::kShape,
                fmt::format("g has {} entries, psi has {} columns", g.size(), psi.cols()));
  }
  Matrix out(psi.rows(), psi.cols());
  for (int64_t i = 0; i < psi.rows(); ++i) {
    auto in = psi.row(i);
    auto dst = out.row(i);
    double sum = 0.0;
    for (size_t j = 0; j < in.size(); ++j) {
      dst[j] = in[j] * static_cast<double>(g[j]);
      sum += dst[j];
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      throw Error(ErrorCode::kNumericDegenerate,
                  fmt::format("row {} has weighted mass {}", i, sum));
    }
    for (double& v : dst) v /= sum;
  }
  ChargeFlops(flop_cost::kWeightedNormalizePerElement * psi.size());
  return out;
}

Matrix LayerNorm(const Matrix& m, std::span<const double> gain, std::span<const double> bias,
                 double eps) {
  if (static_cast<int64_t>(gain.size()) != m.cols() ||
      static_cast<int64_t>(bias.size()) != m.cols()) {
    throw Error(ErrorCode::kShape,
                fmt::format("layernorm over {} features with gain {} and bias {}", m.cols(),
                            gain.size(), bias.size()));
  }
  Matrix out(m.rows(), m.cols());
  const double n = static_cast<double>(m.cols());
  for (int64_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto dst = out.row(i);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= n;
    double var = 0.0;
    for (size_t j = 0; j < in.size(); ++j) {
      dst[j] = in[j] - mean;
      var += dst[j] * dst[j];
    }
    const double inv_std = 1.0 / std::sqrt(var / n + eps);
    for (size_t j = 0; j < in.size(); ++j) dst[j] = dst[j] * inv_std * gain[j] + bias[j];
  }
  ChargeFlops(flop_cost::kLayerNormPerElement * m.size());
  return out;
}

Matrix Gelu(const Matrix& m) {
  constexpr double kSqrt2OverPi = 0.7978845608028654;
  Matrix out = m;
  for (double& v : out.data()) {
    v = 0.5 * v * (1.0 + std::tanh(kSqrt2OverPi * (v + 0.044715 * v * v * v)));
  }
  ChargeFlops(flop_cost::kGeluPerElement * m.size());
  return out;
}

Matrix ConcatRows(std::span<const Matrix> parts) {
  if (parts.empty()) return Matrix();
  const int64_t cols = parts.front().cols();
  int64_t rows = 0;
  for (const Matrix& p : parts) {
    RequireShape(p.cols() == cols, "concat_rows", parts.front(), p);
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(static_cast<size_t>(rows * cols));
  for (const Matrix& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return Matrix(rows, cols, std::move(data));
}

Matrix ConcatRows(std::initializer_list<Matrix> parts) {
  return ConcatRows(std::span<const Matrix>(parts.begin(), parts.size()));
}

Matrix ConcatCols(std::span<const Matrix> parts) {
  if (parts.empty()) return Matrix();
  const int64_t rows = parts.front().rows();
  int64_t cols = 0;
  for (const Matrix& p : parts) {
    RequireShape(p.rows() == rows, "concat_cols", parts.front(), p);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  int64_t offset = 0;
  for (const Matrix& p : parts) {
    for (int64_t i = 0; i < rows; ++i) {
      std::copy(p.row(i).begin(), p.row(i).end(), out.row(i).begin() + offset);
    }
    offset += p.cols();
  }
  return out;
}

Matrix SliceRows(const Matrix& m, int64_t start, int64_t end) {
  if (start < 0 || start > end || end > m.rows()) {
    throw Error(ErrorCode::kShape,
                fmt::format("row slice [{}, {}) of {} rows", start, end, m.rows()));
  }
  auto first = m.data().begin() + start * m.cols();
  auto last = m.data().begin() + end * m.cols();
  return Matrix(end - start, m.cols(), std::vector<double>(first, last));
}

std::vector<double> SegmentRowMean(const Matrix& m, int64_t start, int64_t end) {
  if (start < 0 || start >= end || end > m.rows()) {
    throw Error(ErrorCode::kShape,
                fmt::format("segment [{}, {}) of {} rows", start, end, m.rows()));
  }
  std::vector<double> mean(static_cast<size_t>(m.cols()), 0.0);
  for (int64_t i = start; i < end; ++i) {
    auto r = m.row(i);
    for (size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
  }
  const double count = static_cast<double>(end - start);
  for (double& v : mean) v /= count;
  ChargeFlops(flop_cost::SegmentMean(end - start, m.cols()));
  return mean;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  RequireShape(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff", a, b);
  double worst = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

bool AllFinite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace seqpar
