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

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "powr/env/types.hpp"
#include "powr/oracle.hpp"

namespace powr {

/// Maps a state to a probability vector over actions.
using PolicyFn = std::function<Eigen::VectorXd(const State&)>;

inline PolicyFn uniform_policy(int action_count) {
  return [action_count](const State&) {
    return Eigen::VectorXd::Constant(action_count, 1.0 / action_count);
  };
}

/// Throws PolicyError unless p is a probability vector of the right length.
inline void check_probabilities(const Eigen::VectorXd& p, int action_count,
                                double tol = 1e-9) {
  if (p.size() != action_count) {
    throw PolicyError("policy returned " + std::to_string(p.size()) +
                      " probabilities for " + std::to_string(action_count) +
                      " actions");
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (std::isnan(p(i)) || p(i) < 0.0) {
      throw PolicyError("policy returned negative or NaN probability mass");
    }
  }
  if (std::abs(p.sum() - 1.0) > tol) {
    throw PolicyError("policy probabilities sum to " + std::to_string(p.sum()));
  }
}

struct RolloutResult {
  TransitionDataset data;
  double discounted_return = 0.0;
  double undiscounted_return = 0.0;
  bool terminated = false;
};

/// Exploration layered on top of a policy during data collection. With
/// probability epsilon a uniformly random action is started and then held
/// for `hold` consecutive steps; hold = 1 is the plain epsilon-uniform
/// mixture (1 - epsilon) pi + epsilon U.
struct Exploration {
  double epsilon = 0.0;
  int hold = 1;
};

namespace detail {

inline std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t episode) {
  return mix64(seed ^ mix64(episode + 0x5eed));
}

/// Runs one episode of at most `horizon` steps, appending to `out`.
inline RolloutResult run_episode(const Environment& env, const PolicyFn& policy,
                                 int horizon, std::uint64_t seed,
                                 const Exploration& explore) {
  const auto& spec = env.spec();
  RolloutResult res;
  res.data.env_id = spec.id;
  res.data.seed = seed;
  CounterRng rng(seed, 0x726f6c6cULL);
  State x = env.reset(seed);
  const int limit = std::min(horizon, spec.max_episode_steps);
  double discount = 1.0;
  int held_action = -1;
  int hold_left = 0;
  for (int t = 0; t < limit; ++t) {
    int a;
    if (hold_left > 0) {
      a = held_action;
      --hold_left;
    } else if (explore.epsilon > 0.0 && rng.uniform() < explore.epsilon) {
      a = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.action_count)));
      held_action = a;
      hold_left = std::max(explore.hold, 1) - 1;
    } else {
      const Eigen::VectorXd p = policy(x);
      check_probabilities(p, spec.action_count);
      a = sample_categorical(p, rng);
    }
    auto step = env.step(x, a, rng);
    Transition tr{x, a, step.next, step.reward, step.done, false};
    if (!step.done && t + 1 == limit) {
      tr.done = true;
      tr.truncated = true;
    }
    res.discounted_return += discount * step.reward;
    res.undiscounted_return += step.reward;
    discount *= spec.gamma;
    res.data.transitions.push_back(std::move(tr));
    if (step.done) {
      res.terminated = true;
      break;
    }
    x = std::move(step.next);
  }
  return res;
}

}  // namespace detail

/// One episode of length <= horizon (and <= the env's step limit).
/// episode_return is the discounted sum sum_t gamma^t r_t of raw rewards.
inline RolloutResult rollout(const Environment& env, const PolicyFn& policy,
                             int horizon, std::uint64_t seed) {
  return detail::run_episode(env, policy, horizon, seed, Exploration{});
}

struct CollectResult {
  TransitionDataset data;
  int episodes = 0;
};

/// Collects exactly `steps` transitions over as many episodes as needed.
/// Episode k uses a seed derived from (seed, k). The final episode is cut
/// by the budget; its last transition is then flagged truncated.
inline CollectResult collect(const Environment& env, const PolicyFn& policy,
                             long steps, std::uint64_t seed,
                             const Exploration& explore = {},
                             const std::string& policy_tag = "") {
  CollectResult out;
  out.data.env_id = env.spec().id;
  out.data.seed = seed;
  out.data.policy_tag = policy_tag;
  long remaining = steps;
  for (std::uint64_t k = 0; remaining > 0; ++k) {
    const int horizon = static_cast<int>(
        std::min<long>(remaining, env.spec().max_episode_steps));
    auto ep = detail::run_episode(env, policy, horizon,
                                  detail::episode_seed(seed, k), explore);
    remaining -= static_cast<long>(ep.data.size());
    out.data.transitions.insert(out.data.transitions.end(),
                                ep.data.transitions.begin(),
                                ep.data.transitions.end());
    ++out.episodes;
  }
  return out;
}

/// Exact dynamics of a discrete environment. Terminal states become
/// absorbing with zero reward; r(x, a) is the expected one-step reward.
inline TabularMDP exact_dynamics(const Environment& env) {
  if (!env.is_discrete()) {
    throw UnsupportedError(env.spec().id + ": exact dynamics need a discrete environment");
  }
  const auto& spec = env.spec();
  TabularMDP mdp;
  mdp.num_states = spec.state.cardinality;
  mdp.num_actions = spec.action_count;
  mdp.gamma = spec.gamma;
  mdp.transition = Eigen::MatrixXd::Zero(mdp.pair_count(), mdp.num_states);
  mdp.reward = Eigen::VectorXd::Zero(mdp.pair_count());
  mdp.start = env.start_distribution();
  mdp.terminal.assign(static_cast<std::size_t>(mdp.num_states), false);
  for (int x = 0; x < mdp.num_states; ++x) {
    const bool term = env.is_terminal(x);
    mdp.terminal[static_cast<std::size_t>(x)] = term;
    for (int a = 0; a < mdp.num_actions; ++a) {
      const int row = mdp.pair_index(x, a);
      if (term) {
        mdp.transition(row, x) = 1.0;
        continue;
      }
      for (const auto& o : env.outcomes(x, a)) {
        mdp.transition(row, o.next_state) += o.probability;
        mdp.reward(row) += o.probability * o.reward;
      }
    }
  }
  mdp.validate(1e-12);
  return mdp;
}

/// Dataset holding every non-terminal (x, a) exactly m times, with next
/// states in exactly the proportions of the true transition law. m is the
/// smallest multiplicity (<= 64) making all branch counts integral.
inline TransitionDataset exhaustive_dataset(const Environment& env) {
  if (!env.is_discrete()) {
    throw UnsupportedError(env.spec().id + ": exhaustive dataset needs a discrete environment");
  }
  const auto& spec = env.spec();
  int m = 0;
  for (int cand = 1; cand <= 64 && m == 0; ++cand) {
    bool ok = true;
    for (int x = 0; x < spec.state.cardinality && ok; ++x) {
      if (env.is_terminal(x)) continue;
      for (int a = 0; a < spec.action_count && ok; ++a) {
        for (const auto& o : env.outcomes(x, a)) {
          const double k = o.probability * cand;
          if (std::abs(k - std::round(k)) > 1e-9) ok = false;
        }
      }
    }
    if (ok) m = cand;
  }
  if (m == 0) throw UnsupportedError(spec.id + ": transition probabilities are not rational with small denominators");
  TransitionDataset ds;
  ds.env_id = spec.id;
  ds.policy_tag = "exhaustive";
  for (int x = 0; x < spec.state.cardinality; ++x) {
    if (env.is_terminal(x)) continue;
    for (int a = 0; a < spec.action_count; ++a) {
      for (const auto& o : env.outcomes(x, a)) {
        const int count = static_cast<int>(std::lround(o.probability * m));
        for (int k = 0; k < count; ++k) {
          ds.transitions.push_back({discrete_state(x), a,
                                    discrete_state(o.next_state), o.reward,
                                    o.done, false});
        }
      }
    }
  }
  return ds;
}

}  // namespace powr
