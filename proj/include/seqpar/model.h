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

#ifndef SEQPAR_MODEL_H_
#define SEQPAR_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqpar/attention.h"
#include "seqpar/tensor.h"

namespace seqpar {

enum class ModelKind { kEncoder, kDecoder };

std::string_view ModelKindName(ModelKind kind);
// Accepts "encoder" / "decoder"; throws kConfig otherwise.
ModelKind ParseModelKind(std::string_view name);

struct TransformerConfig {
  int64_t n_tokens = 0;   // N
  int64_t embed_dim = 0;  // D
  int64_t head_dim = 0;   // d
  int64_t n_heads = 0;
  int64_t ffn_dim = 0;
  int64_t n_blocks = 0;
  ModelKind kind = ModelKind::kEncoder;
  int n_partitions = 1;   // P
  int64_t landmarks = 1;  // L, per partition

  bool causal() const { return kind == ModelKind::kDecoder; }

  // Throws kConfig naming the first violated constraint.
  void Validate() const;

  bool operator==(const TransformerConfig&) const = default;
};

struct BlockWeights {
  std::vector<HeadWeights> heads;
  Matrix output;   // D x D
  Matrix ffn_in;   // D x ffn_dim
  Matrix ffn_out;  // ffn_dim x D
  std::vector<double> ln1_gain, ln1_bias;
  std::vector<double> ln2_gain, ln2_bias;

  bool operator==(const BlockWeights&) const = default;
};

struct WeightSet {
  std::vector<BlockWeights> blocks;
  std::vector<double> final_gain, final_bias;

  bool operator==(const WeightSet&) const = default;
};

// Every matrix entry is Normal(seed, stream, index) / sqrt(fan_in) using the
// counter-based generator in rng.h, so entries are bounded by 6 / sqrt(fan_in).
// Layernorm gains are 1 + 0.1 u and biases 0.1 u with u uniform on [-1, 1).
WeightSet GenerateWeights(const TransformerConfig& config, uint64_t seed);

// Synthetic embedded sequence: uniform [-1, 1) entries plus a sinusoidal
// position code, so |x| <= 2.
Matrix GenerateInput(const TransformerConfig& config, uint64_t seed);

// Pieces of one pre-layernorm block, shared by the reference and distributed
// forward passes so both execute identical arithmetic on identical rows.
Matrix ProjectHeads(std::span<const Matrix> head_outputs, const BlockWeights& block);
// x + ffn(layernorm2(x)).
Matrix FeedForwardResidual(const Matrix& x, const BlockWeights& block);
Matrix FinalLayerNorm(const Matrix& x, const WeightSet& w);

// Single-device forward pass: for every block, layernorm -> multi-head
// attention (causal for decoders) -> residual -> layernorm -> GELU FFN ->
// residual; then a closing layernorm.
Matrix ReferenceForward(const Matrix& x, const WeightSet& w, const TransformerConfig& config);

}  // namespace seqpar

#endif  // SEQPAR_MODEL_H_
