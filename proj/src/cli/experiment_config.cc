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

#include "seqpar/cli/experiment_config.h"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

#include "seqpar/analysis.h"
#include "seqpar/cli/default_config.h"
#include "seqpar/error.h"

namespace seqpar::cli {
namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string kind;  // "run", "experiment" or "verify"
  std::string name;  // experiment name
  int line = 0;
  std::vector<Entry> entries;
};

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  [[noreturn]] void Fail(int line, std::string_view where, std::string_view what) const {
    throw Error(ErrorCode::kConfig, fmt::format("{}:{}: {}: {}", source_, line, where, what));
  }

  std::vector<Section> Split(std::string_view text) const {
    std::vector<Section> sections;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      const size_t end = std::min(text.find('\n', pos), text.size());
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = Trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') Fail(line_no, "section", "missing ']'");
        const std::string_view header = Trim(line.substr(1, line.size() - 2));
        const auto space = header.find_first_of(" \t");
        Section s;
        s.kind = std::string(header.substr(0, space));
        if (space != std::string_view::npos) s.name = std::string(Trim(header.substr(space)));
        s.line = line_no;
        if (s.kind == "experiment" ? s.name.empty()
                                   : (s.kind != "run" && s.kind != "verify") || !s.name.empty()) {
          Fail(line_no, "section",
               fmt::format("unknown section [{}]; expected [run], [experiment NAME] or [verify]",
                           header));
        }
        sections.push_back(std::move(s));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) Fail(line_no, "line", "expected 'key = value'");
      if (sections.empty())
        Fail(line_no, std::string(Trim(line.substr(0, eq))), "key outside a section");
      Entry e{std::string(Trim(line.substr(0, eq))), std::string(Trim(line.substr(eq + 1))),
              line_no};
      if (e.key.empty()) Fail(line_no, "line", "empty key");
      for (const Entry& prior : sections.back().entries) {
        if (prior.key == e.key) {
          Fail(line_no, e.key, fmt::format("duplicate key (first set on line {})", prior.line));
        }
      }
      sections.back().entries.push_back(std::move(e));
    }
    return sections;
  }

  template <typename T>
  T Number(const Entry& e, std::string_view text) const {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
      Fail(e.line, e.key, fmt::format("'{}' is not a valid number", text));
    }
    return value;
  }

  template <typename T>
  T Number(const Entry& e) const {
    return Number<T>(e, e.value);
  }

  template <typename T>
  T Positive(const Entry& e) const {
    const T v = Number<T>(e);
    if (!(v > T{0})) Fail(e.line, e.key, fmt::format("must be positive, got {}", e.value));
    return v;
  }

  template <typename T>
  std::vector<T> List(const Entry& e, const std::function<T(std::string_view)>& item) const {
    std::vector<T> out;
    std::string_view rest = e.value;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view token = Trim(rest.substr(0, comma));
      if (token.empty()) Fail(e.line, e.key, "empty list item");
      out.push_back(item(token));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  template <typename T>
  std::vector<T> PositiveList(const Entry& e) const {
    return List<T>(e, [&](std::string_view token) {
      const T v = Number<T>(e, token);
      if (!(v > T{0})) Fail(e.line, e.key, fmt::format("'{}' must be positive", token));
      return v;
    });
  }

  // Applies a model dimension key; false when `e` is not one.
  bool ModelKey(const Entry& e, TransformerConfig& c) const {
    if (e.key == "n_tokens") {
      c.n_tokens = Positive<int64_t>(e);
    } else if (e.key == "embed_dim") {
      c.embed_dim = Positive<int64_t>(e);
    } else if (e.key == "head_dim") {
      c.head_dim = Positive<int64_t>(e);
    } else if (e.key == "n_heads") {
      c.n_heads = Positive<int64_t>(e);
    } else if (e.key == "ffn_dim") {
      c.ffn_dim = Positive<int64_t>(e);
    } else if (e.key == "n_blocks") {
      c.n_blocks = Positive<int64_t>(e);
    } else if (e.key == "kind") {
      try {
        c.kind = ParseModelKind(e.value);
      } catch (const Error& err) {
        Fail(e.line, e.key, err.what());
      }
    } else {
      return false;
    }
    return true;
  }

  void CheckModel(const TransformerConfig& c, int line, std::string_view where) const {
    TransformerConfig probe = c;
    probe.n_partitions = 1;
    probe.landmarks = 1;
    try {
      probe.Validate();
    } catch (const Error& err) {
      Fail(line, where, err.what());
    }
  }

  void ParseRun(const Section& s, RunSettings& run) const {
    for (const Entry& e : s.entries) {
      if (e.key == "seed") {
        run.seed = Number<uint64_t>(e);
      } else if (e.key == "precision") {
        if (e.value == "f32") {
          run.bytes_per_scalar = 4;
        } else if (e.value == "f64") {
          run.bytes_per_scalar = 8;
        } else {
          Fail(e.line, e.key, fmt::format("expected f32 or f64, got '{}'", e.value));
        }
      } else if (e.key == "mode") {
        try {
          run.mode = ParseCommMode(e.value);
        } catch (const Error& err) {
          Fail(e.line, e.key, err.what());
        }
      } else if (e.key == "out") {
        run.out_dir = e.value;
      } else if (e.key == "device_flops_per_second") {
        run.device_flops_per_second = Positive<double>(e);
      } else if (e.key == "per_message_latency_s") {
        run.per_message_latency_s = Number<double>(e);
        if (run.per_message_latency_s < 0.0) Fail(e.line, e.key, "must not be negative");
      } else if (e.key == "bandwidth_min_mbps") {
        run.bandwidth_min_mbps = Positive<double>(e);
      } else if (e.key == "bandwidth_max_mbps") {
        run.bandwidth_max_mbps = Positive<double>(e);
      } else if (e.key == "bandwidth_points") {
        run.bandwidth_points = Positive<int>(e);
      } else {
        Fail(e.line, e.key, "unknown key in [run]");
      }
    }
    if (run.bandwidth_max_mbps < run.bandwidth_min_mbps) {
      Fail(s.line, "[run]", "bandwidth_max_mbps is below bandwidth_min_mbps");
    }
  }

  Experiment ParseExperiment(const Section& s) const {
    Experiment ex;
    ex.name = s.name;
    const std::string where = fmt::format("[experiment {}]", s.name);
    // The preset has to be known before dimension overrides apply.
    auto model_entry = std::find_if(s.entries.begin(), s.entries.end(),
                                    [](const Entry& e) { return e.key == "model"; });
    if (model_entry == s.entries.end()) Fail(s.line, where, "missing key 'model'");
    ex.model = model_entry->value;
    if (ex.model != "custom") {
      const auto preset = FindPreset(ex.model);
      if (!preset) {
        Fail(model_entry->line, "model",
             fmt::format("unknown preset '{}'; expected vit-base, bert-base, gpt2-base or custom",
                         ex.model));
      }
      ex.config = preset->config;
      ex.inferred = preset->inferred;
    }
    std::set<std::string> seen;
    for (const Entry& e : s.entries) {
      seen.insert(e.key);
      if (e.key == "model" || ModelKey(e, ex.config)) continue;
      if (e.key == "strategies") {
        ex.strategies = List<Strategy>(e, [&](std::string_view token) {
          try {
            return ParseStrategy(token);
          } catch (const Error& err) {
            Fail(e.line, e.key, err.what());
          }
        });
      } else if (e.key == "partitions") {
        ex.partitions = PositiveList<int>(e);
      } else if (e.key == "landmarks") {
        ex.landmarks = PositiveList<int64_t>(e);
      } else if (e.key.starts_with("landmarks@")) {
        const int p = Number<int>(e, std::string_view(e.key).substr(10));
        ex.landmarks_by_partitions[p] = PositiveList<int64_t>(e);
      } else if (e.key == "compression_rates") {
        ex.compression_rates = List<double>(e, [&](std::string_view token) {
          const double cr = Number<double>(e, token);
          if (!(cr >= 1.0)) Fail(e.line, e.key, fmt::format("rate {} is below 1", token));
          return cr;
        });
      } else {
        Fail(e.line, e.key, fmt::format("unknown key in {}", where));
      }
    }
    if (ex.model == "custom") {
      for (const char* key :
           {"n_tokens", "embed_dim", "head_dim", "n_heads", "ffn_dim", "n_blocks"}) {
        if (!seen.contains(key)) Fail(s.line, where, fmt::format("custom model needs '{}'", key));
      }
    }
    CheckModel(ex.config, s.line, where);
    if (ex.strategies.empty() && ex.compression_rates.empty()) {
      Fail(s.line, where, "needs 'strategies' or 'compression_rates'");
    }
    const bool needs_partitions = !ex.compression_rates.empty() ||
                                  std::any_of(ex.strategies.begin(), ex.strategies.end(),
                                              [](Strategy st) { return st != Strategy::kSingle; });
    if (needs_partitions && ex.partitions.empty()) Fail(s.line, where, "missing 'partitions'");
    for (int p : ex.partitions) {
      if (p > ex.config.n_tokens) {
        Fail(s.line, where, fmt::format("P = {} exceeds N = {}", p, ex.config.n_tokens));
      }
    }
    for (const auto& [p, list] : ex.landmarks_by_partitions) {
      if (std::find(ex.partitions.begin(), ex.partitions.end(), p) == ex.partitions.end()) {
        Fail(s.line, where, fmt::format("landmarks@{} names a P not in 'partitions'", p));
      }
    }
    const bool has_prism = std::find(ex.strategies.begin(), ex.strategies.end(),
                                     Strategy::kPrism) != ex.strategies.end();
    for (int p : ex.partitions) {
      if (has_prism && ex.LandmarksFor(p).empty()) {
        Fail(s.line, where, fmt::format("prism needs landmarks for P = {}", p));
      }
      for (int64_t l : ex.LandmarksFor(p)) {
        if (l > ex.config.n_tokens / p) {
          Fail(s.line, where,
               fmt::format("L = {} exceeds floor(N/P) = {} for P = {}", l, ex.config.n_tokens / p,
                           p));
        }
      }
    }
    return ex;
  }

  void ParseVerify(const Section& s, VerifySettings& v) const {
    for (const Entry& e : s.entries) {
      if (ModelKey(e, v.model)) continue;
      if (e.key == "scaled_instances") {
        v.scaled_instances = Positive<int>(e);
      } else if (e.key == "permutation_trials") {
        v.permutation_trials = Positive<int>(e);
      } else if (e.key == "causal_trials") {
        v.causal_trials = Positive<int>(e);
      } else if (e.key == "partitions") {
        v.partitions = PositiveList<int>(e);
      } else if (e.key == "inject_fault") {
        if (e.value == "none") {
          v.fault = Fault::kNone;
        } else if (e.value == "wrong_g") {
          v.fault = Fault::kWrongG;
        } else {
          Fail(e.line, e.key, fmt::format("expected none or wrong_g, got '{}'", e.value));
        }
      } else {
        Fail(e.line, e.key, "unknown key in [verify]");
      }
    }
    CheckModel(v.model, s.line, "[verify]");
    for (int p : v.partitions) {
      if (p > v.model.n_tokens) {
        Fail(s.line, "[verify]", fmt::format("P = {} exceeds N = {}", p, v.model.n_tokens));
      }
    }
  }

 private:
  std::string source_;
};

}  // namespace

std::string_view FaultName(Fault f) { return f == Fault::kWrongG ? "wrong_g" : "none"; }

const std::vector<int64_t>& Experiment::LandmarksFor(int partitions) const {
  auto it = landmarks_by_partitions.find(partitions);
  return it == landmarks_by_partitions.end() ? landmarks : it->second;
}

VerifySettings::VerifySettings() {
  model.n_tokens = 64;
  model.embed_dim = 64;
  model.head_dim = 16;
  model.n_heads = 4;
  model.ffn_dim = 128;
  model.n_blocks = 12;
}

ExperimentConfig ParseExperimentConfig(std::string_view text, std::string_view source) {
  const Parser parser(source);
  ExperimentConfig config;
  std::set<std::string> singletons, names;
  for (const Section& s : parser.Split(text)) {
    if (s.kind == "experiment") {
      if (!names.insert(s.name).second) {
        parser.Fail(s.line, "section", fmt::format("experiment '{}' defined twice", s.name));
      }
      config.experiments.push_back(parser.ParseExperiment(s));
      continue;
    }
    if (!singletons.insert(s.kind).second) {
      parser.Fail(s.line, "section", fmt::format("[{}] appears twice", s.kind));
    }
    if (s.kind == "run") {
      parser.ParseRun(s, config.run);
    } else {
      parser.ParseVerify(s, config.verify);
    }
  }
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, fmt::format("{}: cannot open", path));
  std::ostringstream text;
  text << in.rdbuf();
  return ParseExperimentConfig(text.str(), path);
}

std::string_view DefaultConfigText() { return kDefaultConfigText; }

}  // namespace seqpar::cli
