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

// Experiment loop: alternate data collection with world-model fits and
// mirror-descent iterations, evaluating the policy after every round.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "powr/config.hpp"
#include "powr/env.hpp"
#include "powr/kernel.hpp"
#include "powr/oracle.hpp"
#include "powr/pmd.hpp"
#include "powr/worldmodel.hpp"

namespace powr {

struct EvalSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  int episodes = 0;
};

/// Undiscounted raw returns of `episodes` stochastic rollouts.
inline EvalSummary evaluate(const PolicyFn& policy, const Environment& env, int episodes,
                            std::uint64_t seed) {
  if (episodes < 1) throw ArgumentError("evaluate: episodes must be positive");
  EvalSummary s;
  s.episodes = episodes;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int k = 0; k < episodes; ++k) {
    const auto r = rollout(env, policy, env.spec().max_episode_steps,
                           detail::episode_seed(seed, static_cast<std::uint64_t>(k)));
    sum += r.undiscounted_return;
    s.min = std::min(s.min, r.undiscounted_return);
    s.max = std::max(s.max, r.undiscounted_return);
  }
  s.mean = sum / episodes;
  return s;
}

inline EvalSummary evaluate(const SoftmaxPolicy& policy, const Environment& env, int episodes,
                            std::uint64_t seed) {
  return evaluate(policy.as_fn(), env, episodes, seed);
}

/// Tabular view of a state-conditional policy.
inline TabularPolicy tabulate(const PolicyFn& pi, int num_states, int num_actions) {
  TabularPolicy out{Eigen::MatrixXd(num_states, num_actions)};
  for (int x = 0; x < num_states; ++x) out.probs.row(x) = pi(discrete_state(x)).transpose();
  return out;
}

/// sup over non-terminal (x, a) of |q_hat(x, a) - q(x, a)| in raw units,
/// where q is the exact action-value function of `pi` in `mdp`.
inline double track_epsilon(const QEstimate& q, const TabularMDP& mdp, const PolicyFn& pi) {
  const auto exact = oracle::exact_q(mdp, tabulate(pi, mdp.num_states, mdp.num_actions));
  double worst = 0.0;
  for (int x = 0; x < mdp.num_states; ++x) {
    if (mdp.is_terminal(x)) continue;
    for (int a = 0; a < mdp.num_actions; ++a) {
      worst = std::max(worst, std::abs(q.raw(discrete_state(x), a) - exact(mdp.pair_index(x, a))));
    }
  }
  return worst;
}

inline Kernel make_kernel(const KernelConfig& kc, const Environment& env) {
  const auto family = kernel_family_from_string(kc.family);
  const auto& st = env.spec().state;
  if (family == KernelFamily::one_hot) {
    if (!st.discrete) throw ConfigError("one_hot kernel needs a discrete environment");
    return Kernel::one_hot();
  }
  Eigen::VectorXd scales;
  if (kc.normalize && !st.discrete) {
    scales = st.upper - st.lower;
  } else if (!kc.length_scales.empty()) {
    scales = Eigen::Map<const Eigen::VectorXd>(kc.length_scales.data(),
                                               static_cast<Eigen::Index>(kc.length_scales.size()));
    if (scales.size() != st.dimension()) {
      throw ConfigError("kernel.length_scales must have one entry per state dimension");
    }
  }
  return family == KernelFamily::gaussian ? Kernel::gaussian(kc.sigma, scales)
                                          : Kernel::laplacian(kc.sigma, scales);
}

/// Uniform subsample of at most `max_size` transitions that keeps every
/// terminal transition (unless those alone exceed the cap).
inline TransitionDataset subsample(const TransitionDataset& data, std::size_t max_size,
                                   CounterRng& rng) {
  if (data.size() <= max_size) return data;
  std::vector<std::size_t> terminal, other;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data.transitions[i].terminal() ? terminal : other).push_back(i);
  }
  auto take = [&rng](std::vector<std::size_t>& pool, std::size_t k) {
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(std::min(k, pool.size()));
  };
  take(terminal, max_size);
  take(other, max_size - terminal.size());
  std::vector<std::size_t> keep = terminal;
  keep.insert(keep.end(), other.begin(), other.end());
  std::sort(keep.begin(), keep.end());
  TransitionDataset out;
  out.env_id = data.env_id;
  out.seed = data.seed;
  out.policy_tag = data.policy_tag;
  for (auto i : keep) out.transitions.push_back(data.transitions[i]);
  return out;
}

/// Weights C for `model` such that eta H C reproduces the policy `old` at
/// the new evolved states, in the minimum-norm ridge sense. Target logits
/// are max-centred and floored at -kSaturationSpread, which changes the
/// old probabilities by at most |A| exp(-kSaturationSpread).
inline Eigen::MatrixXd reproject_weights(const SoftmaxPolicy& old, const WorldModel& model,
                                         double eta) {
  const auto n = model.size();
  if (eta == 0.0) return Eigen::MatrixXd::Zero(n, model.action_count);
  Eigen::MatrixXd target(n, model.action_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (model.terminal[static_cast<std::size_t>(i)]) {
      target.row(i).setZero();
    } else {
      Eigen::VectorXd l = old.weights().logits(model.evolved[static_cast<std::size_t>(i)]);
      l.array() -= l.maxCoeff();
      target.row(i) = l.cwiseMax(-kSaturationSpread).transpose();
    }
  }
  Eigen::MatrixXd hh = model.H * model.H.transpose();
  const double mu = std::max(1e-12, 1e-8 * hh.trace() / static_cast<double>(std::max<Eigen::Index>(n, 1)));
  hh.diagonal().array() += mu;
  Eigen::LLT<Eigen::MatrixXd> llt(hh);
  if (llt.info() != Eigen::Success) throw NumericalError("reproject_weights: factorization failed");
  return model.H.transpose() * llt.solve(target) / eta;
}

struct Checkpoint {
  int round = 0;
  long timesteps = 0;
  EvalSummary eval;
  double wall_seconds = 0.0;
  std::size_t dataset_size = 0;
  Eigen::Index anchors = 0;
  double lambda = 0.0;
};

struct IterationRecord {
  int round = 0;
  PmdDiagnostics diagnostics;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<Checkpoint> checkpoints;
  std::vector<IterationRecord> iterations;
  std::optional<SoftmaxPolicy> policy;
  std::string error;
  bool numerical_failure = false;
};

struct TrainingCurve {
  std::vector<SeedRun> runs;

  bool ok() const {
    return std::all_of(runs.begin(), runs.end(), [](const SeedRun& r) { return r.error.empty(); });
  }
  bool numerical_failure() const {
    return std::any_of(runs.begin(), runs.end(), [](const SeedRun& r) { return r.numerical_failure; });
  }
};

using LogFn = std::function<void(const std::string&)>;

inline std::unique_ptr<Environment> make_env(const ExperimentConfig& cfg) {
  EnvOptions opts;
  if (cfg.max_episode_steps > 0) opts.max_episode_steps = cfg.max_episode_steps;
  opts.gamma = cfg.gamma;
  return make_env(cfg.env, opts);
}

/// All rounds for one seed. Errors stop the run and are reported in the
/// result together with the checkpoints reached so far.
inline SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const LogFn& log = {}) {
  SeedRun out;
  out.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto env = make_env(cfg);
    const auto& spec = env->spec();
    const Kernel kernel = make_kernel(cfg.kernel, *env);
    std::optional<TabularMDP> mdp;
    if (cfg.track_epsilon && env->is_discrete()) mdp = exact_dynamics(*env);

    TransitionDataset data;
    data.env_id = spec.id;
    data.seed = seed;
    long timesteps = 0;
    std::optional<SoftmaxPolicy> policy;
    double epsilon = cfg.exploration.epsilon;

    for (std::size_t r = 0; r < cfg.rounds.size(); ++r) {
      const auto& round = cfg.rounds[r];
      const int ri = static_cast<int>(r);
      if (r == 0 && cfg.dataset.source == "exhaustive") {
        data = exhaustive_dataset(*env);
        timesteps = static_cast<long>(data.size());
      } else if (round.collect_steps > 0) {
        const PolicyFn behaviour = policy ? policy->as_fn() : uniform_policy(spec.action_count);
        const Exploration explore = policy ? Exploration{epsilon, cfg.exploration.hold}
                                           : Exploration{1.0, cfg.exploration.hold};
        if (policy) epsilon *= cfg.exploration.decay;
        auto got = collect(*env, behaviour, round.collect_steps, mix64(seed * 1009 + r),
                           explore, policy ? "softmax" : "uniform");
        data.append(got.data);
        timesteps += round.collect_steps;
      }

      CounterRng sub_rng(seed, 0x7375620000ULL + r);
      const auto train = cfg.dataset.dedup
                             ? data
                             : subsample(data, static_cast<std::size_t>(cfg.dataset.max_size), sub_rng);
      const auto model = fit(train, kernel, spec.action_count,
                             {cfg.lambda, spec.reward_shift, cfg.dataset.dedup});

      RunPmdOptions opts;
      opts.max_refits = cfg.max_refits;
      if (policy) opts.initial_weights = reproject_weights(*policy, *model, cfg.eta);
      if (mdp) {
        opts.epsilon = [&mdp](const QEstimate& q, const SoftmaxPolicy& pi) {
          return track_epsilon(q, *mdp, pi.as_fn());
        };
      }
      opts.on_step = [&out, ri](const PmdStep& s) { out.iterations.push_back({ri, s.diagnostics}); };
      auto run = run_pmd(model, cfg.gamma, cfg.eta, round.pmd_iters, opts);
      policy = run.policy;

      const bool last = r + 1 == cfg.rounds.size();
      const int episodes = last && cfg.final_eval_episodes > 0 ? cfg.final_eval_episodes : cfg.eval_episodes;
      Checkpoint cp;
      cp.round = ri;
      cp.timesteps = timesteps;
      cp.eval = evaluate(*policy, *env, episodes, mix64(seed ^ (0xe7a1ULL + r)));
      cp.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      cp.dataset_size = train.size();
      cp.anchors = model->size();
      cp.lambda = run.model->lambda;
      out.checkpoints.push_back(cp);
      out.policy = policy;
      if (log) {
        log("seed " + std::to_string(seed) + " round " + std::to_string(r) + ": timesteps " +
            std::to_string(timesteps) + ", anchors " + std::to_string(cp.anchors) + ", mean return " +
            std::to_string(cp.eval.mean) + " (" + std::to_string(cp.wall_seconds) + " s)");
      }
    }
  } catch (const NumericalError& e) {
    out.error = e.what();
    out.numerical_failure = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

/// Runs every seed, `jobs` at a time. Results are in seed order.
inline TrainingCurve run_experiment(const ExperimentConfig& cfg, int jobs = 1, const LogFn& log = {}) {
  cfg.validate();
  TrainingCurve curve;
  curve.runs.resize(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const LogFn locked = log ? LogFn([&](const std::string& m) {
    std::lock_guard<std::mutex> lock(log_mutex);
    log(m);
  })
                           : LogFn{};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cfg.seeds.size();) {
      curve.runs[i] = run_seed(cfg, cfg.seeds[i], locked);
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.seeds.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return curve;
}

/// Per-seed rows, then one `all` row per checkpoint with the mean of the
/// seed means and their min and max.
inline void write_curve_csv(std::ostream& os, const TrainingCurve& curve) {
  os << "timesteps,mean,min,max,seed\n";
  os.precision(10);
  std::size_t rounds = 0;
  for (const auto& run : curve.runs) {
    for (const auto& cp : run.checkpoints) {
      os << cp.timesteps << ',' << cp.eval.mean << ',' << cp.eval.min << ',' << cp.eval.max << ','
         << run.seed << '\n';
    }
    rounds = std::max(rounds, run.checkpoints.size());
  }
  for (std::size_t r = 0; r < rounds; ++r) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    long ts = 0;
    int count = 0;
    for (const auto& run : curve.runs) {
      if (r >= run.checkpoints.size()) continue;
      const auto& cp = run.checkpoints[r];
      sum += cp.eval.mean;
      lo = std::min(lo, cp.eval.mean);
      hi = std::max(hi, cp.eval.mean);
      ts = cp.timesteps;
      ++count;
    }
    os << ts << ',' << sum / count << ',' << lo << ',' << hi << ",all\n";
  }
}

/// One JSON object per PMD iteration, then one per checkpoint.
inline void write_diagnostics_jsonl(std::ostream& os, const TrainingCurve& curve) {
  for (const auto& run : curve.runs) {
    for (const auto& it : run.iterations) {
      const auto& d = it.diagnostics;
      Json j{{"kind", "iteration"},   {"seed", run.seed},       {"round", it.round},
             {"t", d.t},              {"c_inf", d.c_inf},       {"spectral_radius", d.spectral_radius},
             {"wall_time", d.wall_seconds}, {"lambda", d.lambda}, {"logit_spread", d.logit_spread},
             {"saturated", d.saturated}};
      if (d.epsilon) j["epsilon"] = *d.epsilon;
      os << j.dump() << '\n';
    }
    for (const auto& cp : run.checkpoints) {
      os << Json{{"kind", "checkpoint"},   {"seed", run.seed},        {"round", cp.round},
                 {"timesteps", cp.timesteps}, {"mean", cp.eval.mean}, {"min", cp.eval.min},
                 {"max", cp.eval.max},     {"episodes", cp.eval.episodes},
                 {"wall_time", cp.wall_seconds}, {"dataset_size", cp.dataset_size},
                 {"anchors", cp.anchors},  {"lambda", cp.lambda}}
                .dump()
         << '\n';
    }
    if (!run.error.empty()) {
      os << Json{{"kind", "error"}, {"seed", run.seed}, {"message", run.error}}.dump() << '\n';
    }
  }
}

/// curve.csv, diagnostics.jsonl and policy_seed<k>.bin under `dir`.
inline void write_outputs(const TrainingCurve& curve, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(std::filesystem::path(dir) / "curve.csv");
    write_curve_csv(f, curve);
  }
  {
    std::ofstream f(std::filesystem::path(dir) / "diagnostics.jsonl");
    write_diagnostics_jsonl(f, curve);
  }
  for (const auto& run : curve.runs) {
    if (!run.policy) continue;
    std::ofstream f(std::filesystem::path(dir) / ("policy_seed" + std::to_string(run.seed) + ".bin"),
                    std::ios::binary);
    save_policy(f, *run.policy);
  }
}

}  // namespace powr
