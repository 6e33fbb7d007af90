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

#include "seqpar/partition.h"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <utility>

#include "seqpar/error.h"

namespace seqpar {

PartitionPlan::PartitionPlan(int64_t n_tokens, std::vector<PartitionRange> parts)
    : n_tokens_(n_tokens), parts_(std::move(parts)) {
  int64_t cursor = 0;
  for (size_t i = 0; i < parts_.size(); ++i) {
    const PartitionRange& p = parts_[i];
    if (p.id != static_cast<int>(i) + 1 || p.start != cursor || p.end <= p.start) {
      throw Error(ErrorCode::kInvalidPlan,
                  fmt::format("partition {} covers [{}, {}), expected to start at {}", p.id,
                              p.start, p.end, cursor));
    }
    cursor = p.end;
  }
  if (cursor != n_tokens_) {
    throw Error(ErrorCode::kInvalidPlan,
                fmt::format("partitions cover {} of {} tokens", cursor, n_tokens_));
  }
}

const PartitionRange& PartitionPlan::Get(int id) const {
  if (id < 1 || id > count()) {
    throw Error(ErrorCode::kInvalidPlan, fmt::format("partition {} outside [1, {}]", id, count()));
  }
  return parts_[static_cast<size_t>(id - 1)];
}

std::vector<int64_t> PartitionPlan::Sizes() const {
  std::vector<int64_t> sizes;
  sizes.reserve(parts_.size());
  for (const PartitionRange& p : parts_) sizes.push_back(p.size());
  return sizes;
}

PartitionPlan MakePartitionPlan(int64_t n_tokens, int n_partitions) {
  if (n_partitions < 1 || n_partitions > n_tokens) {
    throw Error(ErrorCode::kInvalidPlan,
                fmt::format("cannot split {} tokens into {} partitions", n_tokens, n_partitions));
  }
  const int64_t base = n_tokens / n_partitions;
  const int64_t remainder = n_tokens % n_partitions;
  std::vector<PartitionRange> parts;
  int64_t start = 0;
  for (int i = 1; i <= n_partitions; ++i) {
    int64_t end = start + base;
    if (i == n_partitions) end += remainder;
    parts.push_back({i, start, end});
    start = end;
  }
  return PartitionPlan(n_tokens, std::move(parts));
}

std::vector<int64_t> SegmentCounts(int64_t n_rows, int64_t landmarks) {
  if (landmarks < 1 || landmarks > n_rows) {
    throw Error(ErrorCode::kInvalidLandmarkCount,
                fmt::format("{} landmarks for {} rows", landmarks, n_rows));
  }
  std::vector<int64_t> counts(static_cast<size_t>(landmarks), n_rows / landmarks);
  counts.back() += n_rows % landmarks;
  return counts;
}

SegmentMeans ComputeSegmentMeans(const Matrix& x_p, int64_t landmarks, int source) {
  SegmentMeans sm;
  sm.source_partition = source;
  sm.counts = SegmentCounts(x_p.rows(), landmarks);
  sm.means = Matrix(landmarks, x_p.cols());
  int64_t start = 0;
  for (int64_t l = 0; l < landmarks; ++l) {
    const int64_t end = start + sm.counts[static_cast<size_t>(l)];
    const std::vector<double> mean = SegmentRowMean(x_p, start, end);
    std::copy(mean.begin(), mean.end(), sm.means.row(l).begin());
    start = end;
  }
  return sm;
}

Matrix ExpandDuplicated(const SegmentMeans& sm) {
  const int64_t total = std::accumulate(sm.counts.begin(), sm.counts.end(), int64_t{0});
  Matrix out(total, sm.means.cols());
  int64_t r = 0;
  for (int64_t l = 0; l < sm.landmarks(); ++l) {
    for (int64_t k = 0; k < sm.counts[static_cast<size_t>(l)]; ++k, ++r) {
      std::copy(sm.means.row(l).begin(), sm.means.row(l).end(), out.row(r).begin());
    }
  }
  return out;
}

AugmentedInput AssembleAugmented(const Matrix& local, std::vector<SegmentMeans> received,
                                 const PartitionPlan& plan, int self) {
  const PartitionRange& own = plan.Get(self);
  if (local.rows() != own.size()) {
    throw Error(ErrorCode::kProtocol, fmt::format("partition {} holds {} rows, plan says {}", self,
                                                  local.rows(), own.size()));
  }
  std::sort(received.begin(), received.end(), [](const SegmentMeans& a, const SegmentMeans& b) {
    return a.source_partition < b.source_partition;
  });

  std::vector<int> expected;
  for (const PartitionRange& p : plan.parts()) {
    if (p.id != self) expected.push_back(p.id);
  }
  if (received.size() != expected.size()) {
    throw Error(ErrorCode::kProtocol,
                fmt::format("partition {} received {} landmark blocks, expected {}", self,
                            received.size(), expected.size()));
  }

  AugmentedInput aug;
  aug.owner = self;
  aug.local = local;
  std::vector<Matrix> rows{local};
  for (int64_t i = 0; i < local.rows(); ++i) {
    aug.g.push_back(1);
    aug.provenance.push_back({self, RowOrigin::kLocal, i});
  }
  for (size_t k = 0; k < received.size(); ++k) {
    const SegmentMeans& sm = received[k];
    if (sm.source_partition != expected[k]) {
      throw Error(ErrorCode::kProtocol,
                  fmt::format("partition {} got landmarks from {} where {} was expected", self,
                              sm.source_partition, expected[k]));
    }
    const int64_t covered = std::accumulate(sm.counts.begin(), sm.counts.end(), int64_t{0});
    if (sm.means.cols() != local.cols() ||
        static_cast<int64_t>(sm.counts.size()) != sm.landmarks() ||
        covered != plan.Get(sm.source_partition).size()) {
      throw Error(
          ErrorCode::kProtocol,
          fmt::format("landmark block from {} is inconsistent with the plan", sm.source_partition));
    }
    rows.push_back(sm.means);
    for (int64_t l = 0; l < sm.landmarks(); ++l) {
      aug.g.push_back(sm.counts[static_cast<size_t>(l)]);
      aug.provenance.push_back({sm.source_partition, RowOrigin::kLandmark, l});
    }
  }
  aug.assembled = ConcatRows(rows);
  aug.landmark_blocks = std::move(received);
  return aug;
}

}  // namespace seqpar
