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

// powr: train, verify, eval and dump-config.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "powr/powr.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

powr::Json build_config(const std::string& path, const std::vector<std::string>& overrides) {
  powr::Json cfg = path.empty() ? powr::default_config_json() : powr::load_config_json(path);
  for (const auto& o : overrides) powr::apply_override(cfg, o);
  return cfg;
}

int cmd_train(const std::string& config, const std::vector<std::string>& overrides,
              const std::vector<std::uint64_t>& seed, int jobs, const std::string& out,
              bool quiet) {
  if (config.empty()) throw powr::ConfigError("train needs --config");
  auto json = build_config(config, overrides);
  if (!seed.empty()) json["seeds"] = seed;
  if (!out.empty()) json["output"] = out;
  const auto cfg = powr::parse_config(json);
  const powr::LogFn log = quiet ? powr::LogFn{} : powr::LogFn([](const std::string& m) {
    std::cerr << m << '\n';
  });
  const auto curve = powr::run_experiment(cfg, jobs, log);
  powr::write_outputs(curve, cfg.output);
  {
    std::ofstream f(cfg.output + "/config.json");
    f << json.dump(2) << '\n';
  }
  powr::write_curve_csv(std::cout, curve);
  for (const auto& run : curve.runs) {
    if (!run.error.empty()) std::cerr << "seed " << run.seed << ": " << run.error << '\n';
  }
  if (curve.numerical_failure()) return kExitNumerical;
  return curve.ok() ? 0 : kExitFailure;
}

int cmd_verify(std::uint64_t seed, int instances) {
  auto rows = powr::identity_suite(seed, instances);
  rows.push_back(powr::gridworld_path_equivalence());
  bool pass = true;
  std::printf("%-26s %10s %14s  %s\n", "identity", "instances", "max residual", "status");
  for (const auto& r : rows) {
    const bool ok = r.max_residual < powr::kIdentityTolerance;
    pass = pass && ok;
    std::printf("%-26s %10d %14.3e  %s\n", r.name.c_str(), r.instances, r.max_residual,
                ok ? "ok" : "FAIL");
  }
  return pass ? 0 : kExitFailure;
}

int cmd_eval(const std::string& policy_path, const std::string& config,
             const std::vector<std::string>& overrides, const std::string& env_id, int episodes,
             std::uint64_t seed) {
  std::ifstream in(policy_path, std::ios::binary);
  if (!in) throw powr::ConfigError("cannot open policy file '" + policy_path + "'");
  const auto policy = powr::load_policy(in);
  std::unique_ptr<powr::Environment> env;
  if (!config.empty()) {
    env = powr::make_env(powr::parse_config(build_config(config, overrides)));
  } else {
    env = powr::make_env(env_id);
  }
  const auto s = powr::evaluate(policy, *env, episodes, seed);
  std::printf("episodes %d mean %.6f min %.6f max %.6f\n", s.episodes, s.mean, s.min, s.max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy mirror descent with kernel world models"};
  app.require_subcommand(1);

  std::string config, out, policy_path, env_id = "gridworld4";
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 0;
  int jobs = 1, instances = 100, episodes = 100;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "Run an experiment and write curve.csv / diagnostics.jsonl");
  train->add_option("--config", config, "JSON config file")->required();
  train->add_option("--override", overrides, "dotted.key=value (repeatable)");
  train->add_option("--seed", seeds, "run only these seeds");
  train->add_option("--jobs", jobs, "seeds run in parallel")->check(CLI::PositiveNumber);
  train->add_option("--out", out, "output directory");
  train->add_flag("--quiet", quiet, "no progress on stderr");

  auto* verify = app.add_subcommand("verify", "Check the operator identities on random MDPs");
  verify->add_option("--seed", seed, "random seed");
  verify->add_option("--instances", instances, "random MDPs")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Replay a saved policy");
  eval->add_option("--policy", policy_path, "policy file written by train")->required();
  eval->add_option("--config", config, "config naming the environment");
  eval->add_option("--override", overrides, "dotted.key=value (repeatable)");
  eval->add_option("--env", env_id, "environment id when no config is given");
  eval->add_option("--episodes", episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "random seed");

  auto* dump = app.add_subcommand("dump-config", "Print the effective configuration");
  dump->add_option("--config", config, "JSON config file");
  dump->add_option("--override", overrides, "dotted.key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(config, overrides, seeds, jobs, out, quiet);
    if (*verify) return cmd_verify(seed, instances);
    if (*eval) return cmd_eval(policy_path, config, overrides, env_id, episodes, seed);
    if (*dump) {
      const auto json = build_config(config, overrides);
      powr::parse_config(json);
      std::cout << json.dump(2) << '\n';
      return 0;
    }
  } catch (const powr::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const powr::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const powr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
