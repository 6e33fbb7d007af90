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

#ifndef SEQPAR_CLI_EXPERIMENT_CONFIG_H_
#define SEQPAR_CLI_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "seqpar/model.h"
#include "seqpar/strategy.h"

namespace seqpar::cli {

enum class Fault { kNone, kWrongG };

std::string_view FaultName(Fault f);

struct RunSettings {
  uint64_t seed = 2026;
  int bytes_per_scalar = 8;  // 4 for f32, 8 for f64
  CommMode mode = CommMode::kUnicast;
  std::string out_dir;  // empty: console only
  double device_flops_per_second = 1e11;
  double per_message_latency_s = 0.0;
  double bandwidth_min_mbps = 10.0;
  double bandwidth_max_mbps = 1000.0;
  int bandwidth_points = 9;

  bool operator==(const RunSettings&) const = default;
};

struct Experiment {
  std::string name;
  std::string model;  // preset name or "custom"
  bool inferred = false;
  TransformerConfig config;  // n_partitions and landmarks unused
  std::vector<Strategy> strategies;
  std::vector<int> partitions;
  std::vector<int64_t> landmarks;
  std::map<int, std::vector<int64_t>> landmarks_by_partitions;  // "landmarks@P" overrides
  std::vector<double> compression_rates;                        // nominal-CR prism rows

  const std::vector<int64_t>& LandmarksFor(int partitions) const;

  bool operator==(const Experiment&) const = default;
};

struct VerifySettings {
  int scaled_instances = 200;
  int permutation_trials = 50;
  int causal_trials = 50;
  std::vector<int> partitions = {2, 3, 4};
  TransformerConfig model;  // end-to-end runs; n_partitions and landmarks unused
  Fault fault = Fault::kNone;

  VerifySettings();
  bool operator==(const VerifySettings&) const = default;
};

struct ExperimentConfig {
  RunSettings run;
  std::vector<Experiment> experiments;
  VerifySettings verify;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses the sectioned key = value format. Errors are kConfig and name the
// source, line and key. `source` only labels diagnostics.
ExperimentConfig ParseExperimentConfig(std::string_view text, std::string_view source = "<config>");
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Text of the built-in configuration, identical to configs/default.ini.
std::string_view DefaultConfigText();

}  // namespace seqpar::cli

#endif  // SEQPAR_CLI_EXPERIMENT_CONFIG_H_
