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

#include "seqpar/model.h"

#include <fmt/format.h>

#include <cmath>

#include "seqpar/error.h"
#include "seqpar/rng.h"

namespace seqpar {
namespace {

enum class WeightTensor : uint64_t {
  kQuery,
  kKey,
  kValue,
  kOutput,
  kFfnIn,
  kFfnOut,
  kLn1Gain,
  kLn1Bias,
  kLn2Gain,
  kLn2Bias,
  kFinalGain,
  kFinalBias,
};

constexpr uint64_t kFinalBlock = 0xffff;
constexpr uint64_t kInputSalt = 0x5eed1b9u;

uint64_t Stream(uint64_t block, WeightTensor tensor, uint64_t head = 0) {
  return (block << 32) | (static_cast<uint64_t>(tensor) << 16) | head;
}

Matrix RandomMatrix(uint64_t seed, uint64_t stream, int64_t rows, int64_t cols) {
  const CounterRng rng(seed, stream);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  auto data = m.data();
  for (size_t i = 0; i < data.size(); ++i) data[i] = rng.Normal(i) * scale;
  return m;
}

std::vector<double> AroundOne(uint64_t seed, uint64_t stream, int64_t n, double center) {
  const CounterRng rng(seed, stream);
  std::vector<double> v(static_cast<size_t>(n));
  for (size_t i = 0; i < v.size(); ++i) v[i] = center + 0.1 * (2.0 * rng.Uniform(i) - 1.0);
  return v;
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kEncoder ? "encoder" : "decoder";
}

ModelKind ParseModelKind(std::string_view name) {
  if (name == "encoder") return ModelKind::kEncoder;
  if (name == "decoder") return ModelKind::kDecoder;
  throw Error(ErrorCode::kConfig, fmt::format("unknown model kind '{}'", name));
}

void TransformerConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::kConfig, what);
  };
  require(n_tokens >= 1 && embed_dim >= 1 && head_dim >= 1 && n_heads >= 1 && ffn_dim >= 1 &&
              n_blocks >= 1,
          "all dimensions must be positive");
  require(
      n_heads * head_dim == embed_dim,
      fmt::format("n_heads ({}) x head_dim ({}) != embed_dim ({})", n_heads, head_dim, embed_dim));
  require(n_partitions >= 1 && n_partitions <= n_tokens,
          fmt::format("n_partitions {} outside [1, {}]", n_partitions, n_tokens));
  require(
      landmarks >= 1 && landmarks <= n_tokens / n_partitions,
      fmt::format("landmarks {} outside [1, floor(N/P) = {}]", landmarks, n_tokens / n_partitions));
}

WeightSet GenerateWeights(const TransformerConfig& config, uint64_t seed) {
  config.Validate();
  const int64_t d_model = config.embed_dim;
  WeightSet w;
  for (int64_t b = 0; b < config.n_blocks; ++b) {
    const auto block = static_cast<uint64_t>(b);
    BlockWeights bw;
    for (int64_t h = 0; h < config.n_heads; ++h) {
      const auto head = static_cast<uint64_t>(h);
      bw.heads.push_back(
          {RandomMatrix(seed, Stream(block, WeightTensor::kQuery, head), d_model, config.head_dim),
           RandomMatrix(seed, Stream(block, WeightTensor::kKey, head), d_model, config.head_dim),
           RandomMatrix(seed, Stream(block, WeightTensor::kValue, head), d_model,
                        config.head_dim)});
    }
    bw.output = RandomMatrix(seed, Stream(block, WeightTensor::kOutput), d_model, d_model);
    bw.ffn_in = RandomMatrix(seed, Stream(block, WeightTensor::kFfnIn), d_model, config.ffn_dim);
    bw.ffn_out = RandomMatrix(seed, Stream(block, WeightTensor::kFfnOut), config.ffn_dim, d_model);
    bw.ln1_gain = AroundOne(seed, Stream(block, WeightTensor::kLn1Gain), d_model, 1.0);
    bw.ln1_bias = AroundOne(seed, Stream(block, WeightTensor::kLn1Bias), d_model, 0.0);
    bw.ln2_gain = AroundOne(seed, Stream(block, WeightTensor::kLn2Gain), d_model, 1.0);
    bw.ln2_bias = AroundOne(seed, Stream(block, WeightTensor::kLn2Bias), d_model, 0.0);
    w.blocks.push_back(std::move(bw));
  }
  w.final_gain = AroundOne(seed, Stream(kFinalBlock, WeightTensor::kFinalGain), d_model, 1.0);
  w.final_bias = AroundOne(seed, Stream(kFinalBlock, WeightTensor::kFinalBias), d_model, 0.0);
  return w;
}

Matrix GenerateInput(const TransformerConfig& config, uint64_t seed) {
  const CounterRng rng(seed ^ kInputSalt, 0);
  const int64_t n = config.n_tokens;
  const int64_t d_model = config.embed_dim;
  Matrix x(n, d_model);
  for (int64_t t = 0; t < n; ++t) {
    for (int64_t j = 0; j < d_model; ++j) {
      const double noise = 2.0 * rng.Uniform(static_cast<uint64_t>(t * d_model + j)) - 1.0;
      const double freq =
          std::pow(10000.0, -static_cast<double>(j / 2 * 2) / static_cast<double>(d_model));
      const double angle = static_cast<double>(t) * freq;
      x(t, j) = noise + (j % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return x;
}

Matrix ProjectHeads(std::span<const Matrix> head_outputs, const BlockWeights& block) {
  return MatMul(ConcatCols(head_outputs), block.output);
}

Matrix FeedForwardResidual(const Matrix& x, const BlockWeights& block) {
  const Matrix normed = LayerNorm(x, block.ln2_gain, block.ln2_bias);
  const Matrix hidden = Gelu(MatMul(normed, block.ffn_in));
  return Add(x, MatMul(hidden, block.ffn_out));
}

Matrix FinalLayerNorm(const Matrix& x, const WeightSet& w) {
  return LayerNorm(x, w.final_gain, w.final_bias);
}

Matrix ReferenceForward(const Matrix& x, const WeightSet& w, const TransformerConfig& config) {
  if (x.rows() != config.n_tokens || x.cols() != config.embed_dim) {
    throw Error(ErrorCode::kShape, fmt::format("input {}x{} for a model expecting {}x{}", x.rows(),
                                               x.cols(), config.n_tokens, config.embed_dim));
  }
  if (static_cast<int64_t>(w.blocks.size()) != config.n_blocks) {
    throw Error(ErrorCode::kShape, fmt::format("{} weight blocks for {} model blocks",
                                               w.blocks.size(), config.n_blocks));
  }
  Matrix state = x;
  for (const BlockWeights& block : w.blocks) {
    const Matrix normed = LayerNorm(state, block.ln1_gain, block.ln1_bias);
    std::vector<Matrix> heads;
    heads.reserve(block.heads.size());
    for (const HeadWeights& head : block.heads) {
      heads.push_back(AttentionReference(normed, head, config.causal()));
    }
    state = FeedForwardResidual(Add(state, ProjectHeads(heads, block)), block);
  }
  return FinalLayerNorm(state, w);
}

}  // namespace seqpar
