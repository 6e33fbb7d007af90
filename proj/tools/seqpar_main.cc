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

// seqpar: verify, compare and latency verbs over an experiment file.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "seqpar/cli/commands.h"
#include "seqpar/cli/experiment_config.h"
#include "seqpar/error.h"
#include "seqpar/strategy.h"

namespace {

struct Flags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> precision;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
};

seqpar::cli::ExperimentConfig Resolve(const Flags& flags) {
  seqpar::cli::ExperimentConfig config =
      flags.config_path.empty()
          ? seqpar::cli::ParseExperimentConfig(seqpar::cli::DefaultConfigText(), "<default>")
          : seqpar::cli::LoadExperimentConfig(flags.config_path);
  if (flags.seed) config.run.seed = *flags.seed;
  if (flags.precision) config.run.bytes_per_scalar = *flags.precision == "f32" ? 4 : 8;
  if (flags.out_dir) config.run.out_dir = *flags.out_dir;
  if (flags.mode) config.run.mode = seqpar::ParseCommMode(*flags.mode);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequence-partitioned Transformer inference simulator"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config_path, "Experiment file (built-in default if omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Overrides [run] seed");
  app.add_option("--precision", flags.precision, "Wire scalar width")
      ->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--out", flags.out_dir, "Directory for CSV output");
  app.add_option("--mode", flags.mode, "Exchange topology")
      ->check(CLI::IsMember({"unicast", "broadcast"}));

  auto* verify = app.add_subcommand("verify", "Run the equivalence, invariance and ledger suites");
  auto* compare = app.add_subcommand("compare", "Tabulate FLOP and communication costs");
  auto* latency = app.add_subcommand("latency", "Latency against bandwidth per strategy");
  for (auto* sub : {verify, compare, latency}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? seqpar::cli::kExitOk : seqpar::cli::kExitConfigError;
  }

  try {
    const seqpar::cli::ExperimentConfig config = Resolve(flags);
    if (verify->parsed()) return seqpar::cli::CmdVerify(config, std::cout);
    if (compare->parsed()) return seqpar::cli::CmdCompare(config, std::cout);
    return seqpar::cli::CmdLatency(config, std::cout);
  } catch (const seqpar::Error& e) {
    std::cerr << fmt::format("seqpar: {}\n", e.what());
    return e.code() == seqpar::ErrorCode::kConfig ? seqpar::cli::kExitConfigError
                                                  : seqpar::cli::kExitVerifyFailed;
  }
}
