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

#ifndef SEQPAR_PARTITION_H_
#define SEQPAR_PARTITION_H_

#include <cstdint>
#include <vector>

#include "seqpar/tensor.h"

namespace seqpar {

// Partition ids are 1-based and follow sequence order: partition 1 holds the
// earliest tokens.
struct PartitionRange {
  int id = 0;
  int64_t start = 0;
  int64_t end = 0;  // exclusive

  int64_t size() const { return end - start; }
};

// Contiguous split of [0, n_tokens) into equal chunks, with the remainder
// appended to the last partition.
class PartitionPlan {
 public:
  PartitionPlan() = default;
  PartitionPlan(int64_t n_tokens, std::vector<PartitionRange> parts);

  int64_t n_tokens() const { return n_tokens_; }
  int count() const { return static_cast<int>(parts_.size()); }
  // Throws kInvalidPlan for an id outside [1, count()].
  const PartitionRange& Get(int id) const;
  const std::vector<PartitionRange>& parts() const { return parts_; }
  std::vector<int64_t> Sizes() const;

  bool operator==(const PartitionPlan&) const = default;

 private:
  int64_t n_tokens_ = 0;
  std::vector<PartitionRange> parts_;
};

// Throws kInvalidPlan unless 1 <= n_partitions <= n_tokens.
PartitionPlan MakePartitionPlan(int64_t n_tokens, int n_partitions);

// L landmark rows summarizing one partition. Segment l averages counts[l]
// consecutive tokens; all segments hold floor(N_p / L) tokens except the last,
// which also takes the N_p mod L remainder.
struct SegmentMeans {
  int source_partition = 0;
  Matrix means;                 // L x D
  std::vector<int64_t> counts;  // L entries, summing to N_p

  int64_t landmarks() const { return means.rows(); }
};

// Segment sizes for n rows split into `landmarks` segments.
std::vector<int64_t> SegmentCounts(int64_t n_rows, int64_t landmarks);

// Throws kInvalidLandmarkCount unless 1 <= landmarks <= x_p.rows().
SegmentMeans ComputeSegmentMeans(const Matrix& x_p, int64_t landmarks, int source);

// Repeats every landmark counts[l] times in segment order. Test oracle for the
// duplicated key/value representation; production code never materializes it.
Matrix ExpandDuplicated(const SegmentMeans& sm);

enum class RowOrigin { kLocal, kLandmark };

struct RowProvenance {
  int source_partition = 0;
  RowOrigin origin = RowOrigin::kLocal;
  int64_t index = 0;  // local token index or segment index

  bool operator==(const RowProvenance&) const = default;
};

// A device's key/value source: its own tokens followed by every peer's
// landmarks in ascending source order. g[j] is how many original tokens row j
// stands for, so sum(g) == N.
struct AugmentedInput {
  int owner = 0;
  Matrix local;
  std::vector<SegmentMeans> landmark_blocks;
  Matrix assembled;
  std::vector<int64_t> g;
  std::vector<RowProvenance> provenance;

  int64_t local_rows() const { return local.rows(); }
  int64_t total_rows() const { return assembled.rows(); }
};

// Throws kProtocol when `received` does not hold exactly one block per peer,
// when a block's counts do not cover its source partition, or when `local`
// does not match the owner's partition size.
AugmentedInput AssembleAugmented(const Matrix& local, std::vector<SegmentMeans> received,
                                 const PartitionPlan& plan, int self);

}  // namespace seqpar

#endif  // SEQPAR_PARTITION_H_
