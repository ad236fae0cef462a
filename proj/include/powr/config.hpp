// Copyright 2026 The POWR Authors
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

#pragma once

// Experiment configuration: JSON files layered over built-in defaults, plus
// dotted-path overrides such as `kernel.sigma=0.2` or `rounds=[[500,20]]`.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "powr/errors.hpp"

namespace powr {

using Json = nlohmann::json;

struct KernelConfig {
  std::string family = "one_hot";
  double sigma = 1.0;
  std::vector<double> length_scales;
  bool normalize = false;  // length scales = state box ranges
};

struct ExplorationConfig {
  double epsilon = 0.1;
  double decay = 0.7;
  int hold = 1;
};

struct DatasetConfig {
  std::string source = "collect";  // collect | exhaustive
  long max_size = 4000;
  bool dedup = false;
};

struct Round {
  long collect_steps = 0;
  int pmd_iters = 0;
};

struct ExperimentConfig {
  std::string env = "gridworld4";
  int max_episode_steps = 0;  // 0: environment default
  KernelConfig kernel;
  double lambda = 1e-6;
  double gamma = 0.99;
  double eta = 1.0;
  std::vector<Round> rounds;
  int eval_episodes = 100;
  int final_eval_episodes = 0;  // 0: same as eval_episodes
  std::vector<std::uint64_t> seeds;
  std::string output = "runs/out";
  ExplorationConfig exploration;
  DatasetConfig dataset;
  bool track_epsilon = false;
  int max_refits = 3;

  void validate() const;
};

inline Json default_config_json() {
  return Json{
      {"env", "gridworld4"},
      {"max_episode_steps", 0},
      {"kernel", {{"family", "one_hot"}, {"sigma", 1.0}, {"length_scales", Json::array()},
                  {"normalize", false}}},
      {"lambda", 1e-6},
      {"gamma", 0.99},
      {"eta", 1.0},
      {"rounds", Json::array({Json::array({1000, 20})})},
      {"eval_episodes", 100},
      {"final_eval_episodes", 0},
      {"seeds", Json::array({0})},
      {"output", "runs/out"},
      {"exploration", {{"epsilon", 0.1}, {"decay", 0.7}, {"hold", 1}}},
      {"dataset", {{"source", "collect"}, {"max_size", 4000}, {"dedup", false}}},
      {"track_epsilon", false},
      {"max_refits", 3},
  };
}

namespace detail {

inline void merge_known(Json& base, const Json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config: expected an object at '" + prefix + "'");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + path + "'");
    auto& slot = base[it.key()];
    if (slot.is_object()) {
      merge_known(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

}  // namespace detail

/// Defaults overlaid with the contents of a JSON file.
inline Json load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Json file;
  try {
    file = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  Json cfg = default_config_json();
  detail::merge_known(cfg, file, "");
  return cfg;
}

/// Applies `dotted.key=value`. The value is read as JSON when it parses and
/// as a bare string otherwise. The key must already exist.
inline void apply_override(Json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &cfg;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("override: unknown key '" + key + "'");
    }
    node = &(*node)[part];
  }
  if (node->is_object()) throw ConfigError("override: '" + key + "' is a section, not a value");
  *node = std::move(value);
}

inline ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig c;
  try {
    c.env = j.at("env").get<std::string>();
    c.max_episode_steps = j.at("max_episode_steps").get<int>();
    const auto& k = j.at("kernel");
    c.kernel.family = k.at("family").get<std::string>();
    c.kernel.sigma = k.at("sigma").get<double>();
    c.kernel.length_scales = k.at("length_scales").get<std::vector<double>>();
    c.kernel.normalize = k.at("normalize").get<bool>();
    c.lambda = j.at("lambda").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.eta = j.at("eta").get<double>();
    for (const auto& r : j.at("rounds")) {
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("config: each round is [collect_steps, pmd_iters]");
      }
      c.rounds.push_back({r[0].get<long>(), r[1].get<int>()});
    }
    c.eval_episodes = j.at("eval_episodes").get<int>();
    c.final_eval_episodes = j.at("final_eval_episodes").get<int>();
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.output = j.at("output").get<std::string>();
    const auto& e = j.at("exploration");
    c.exploration.epsilon = e.at("epsilon").get<double>();
    c.exploration.decay = e.at("decay").get<double>();
    c.exploration.hold = e.at("hold").get<int>();
    const auto& d = j.at("dataset");
    c.dataset.source = d.at("source").get<std::string>();
    c.dataset.max_size = d.at("max_size").get<long>();
    c.dataset.dedup = d.at("dedup").get<bool>();
    c.track_epsilon = j.at("track_epsilon").get<bool>();
    c.max_refits = j.at("max_refits").get<int>();
  } catch (const Json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  c.validate();
  return c;
}

inline void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (!(lambda > 0.0)) fail("lambda must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(eta >= 0.0)) fail("eta must be non-negative");
  if (rounds.empty()) fail("at least one round is required");
  for (const auto& r : rounds) {
    if (r.collect_steps < 0 || r.pmd_iters < 0) fail("round sizes must be non-negative");
  }
  if (eval_episodes < 1) fail("eval_episodes must be positive");
  if (final_eval_episodes < 0) fail("final_eval_episodes must be non-negative");
  if (seeds.empty()) fail("at least one seed is required");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) fail("seeds must be distinct");
    }
  }
  if (!(kernel.sigma > 0.0)) fail("kernel.sigma must be positive");
  if (!(exploration.epsilon >= 0.0 && exploration.epsilon <= 1.0)) fail("exploration.epsilon must lie in [0, 1]");
  if (!(exploration.decay >= 0.0 && exploration.decay <= 1.0)) fail("exploration.decay must lie in [0, 1]");
  if (exploration.hold < 1) fail("exploration.hold must be at least 1");
  if (dataset.source != "collect" && dataset.source != "exhaustive") {
    fail("dataset.source must be 'collect' or 'exhaustive'");
  }
  if (dataset.max_size < 1) fail("dataset.max_size must be positive");
  if (max_refits < 0) fail("max_refits must be non-negative");
}

}  // namespace powr
