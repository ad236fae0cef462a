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

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "powr/errors.hpp"
#include "powr/rng.hpp"

namespace powr {

/// States are real vectors. Discrete environments use a one-element vector
/// holding the state index (exactly representable as a double).
using State = Eigen::VectorXd;

inline State discrete_state(int index) {
  State s(1);
  s(0) = static_cast<double>(index);
  return s;
}

/// Either a finite set {0, ..., cardinality-1} or a box in R^d.
struct StateDescriptor {
  bool discrete = true;
  int cardinality = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static StateDescriptor finite(int n) { return {true, n, {}, {}}; }
  static StateDescriptor box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    return {false, 0, std::move(lo), std::move(hi)};
  }

  int dimension() const { return discrete ? 1 : static_cast<int>(lower.size()); }

  bool contains(const State& x) const {
    if (x.size() != dimension()) return false;
    if (discrete) {
      const double v = x(0);
      return v >= 0 && v < cardinality && v == std::floor(v);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x(i) >= lower(i) && x(i) <= upper(i))) return false;
    }
    return true;
  }
};

struct EnvSpec {
  std::string id;
  StateDescriptor state;
  int action_count = 0;
  int max_episode_steps = 0;
  double gamma = 0.99;
  double reward_threshold = 0.0;
  // Added to every raw reward before world-model fitting so the fitted
  // reward is non-negative; reported returns always use raw rewards.
  double reward_shift = 0.0;

  void validate() const {
    if (action_count < 2) throw ArgumentError(id + ": action_count must be >= 2");
    if (max_episode_steps < 1) throw ArgumentError(id + ": max_episode_steps must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError(id + ": gamma must lie in (0, 1)");
    if (state.discrete) {
      if (state.cardinality < 1) throw ArgumentError(id + ": empty state set");
    } else {
      if (state.lower.size() == 0 || state.lower.size() != state.upper.size()) {
        throw ArgumentError(id + ": malformed state box");
      }
      for (Eigen::Index i = 0; i < state.lower.size(); ++i) {
        if (!std::isfinite(state.lower(i)) || !std::isfinite(state.upper(i)) ||
            !(state.lower(i) < state.upper(i))) {
          throw ArgumentError(id + ": state box bounds must be finite with lower < upper");
        }
      }
    }
  }
};

/// One sample (x, a, x', r). `done` is set both on termination and on
/// step-limit truncation; `truncated` tells the two apart.
struct Transition {
  State x;
  int a = 0;
  State x_next;
  double r = 0.0;
  bool done = false;
  bool truncated = false;

  bool terminal() const { return done && !truncated; }
};

struct TransitionDataset {
  std::vector<Transition> transitions;
  std::string env_id;
  std::uint64_t seed = 0;
  std::string policy_tag;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }

  void append(const TransitionDataset& other) {
    if (!other.env_id.empty() && !env_id.empty() && other.env_id != env_id) {
      throw ArgumentError("TransitionDataset: cannot mix environments " +
                          env_id + " and " + other.env_id);
    }
    if (env_id.empty()) env_id = other.env_id;
    transitions.insert(transitions.end(), other.transitions.begin(),
                       other.transitions.end());
  }
};

struct StepResult {
  State next;
  double reward = 0.0;
  bool done = false;  // terminal; step limits are the caller's business
};

/// One branch of the exact transition law of a discrete environment.
struct Outcome {
  int next_state = 0;
  double probability = 0.0;
  double reward = 0.0;
  bool done = false;
};

/// Environments are immutable: the state is passed in and out, and all
/// randomness comes from the caller's generator, so one instance can be
/// shared by any number of threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;

  /// Start state drawn from the reset distribution; a pure function of seed.
  virtual State reset(std::uint64_t seed) const = 0;

  virtual StepResult step(const State& x, int action, CounterRng& rng) const = 0;

  bool is_discrete() const { return spec().state.discrete; }

  /// Exact transition branches from (x, a). Discrete environments only.
  virtual std::vector<Outcome> outcomes(int /*state*/, int /*action*/) const {
    throw UnsupportedError(spec().id + ": exact dynamics need a discrete environment");
  }

  /// Exact reset distribution. Discrete environments only.
  virtual Eigen::VectorXd start_distribution() const {
    throw UnsupportedError(spec().id + ": start distribution needs a discrete environment");
  }

  /// Terminal states are never the source of a transition in an episode.
  virtual bool is_terminal(int /*state*/) const { return false; }

 protected:
  void check_action(int action) const {
    if (action < 0 || action >= spec().action_count) {
      throw ArgumentError(spec().id + ": action " + std::to_string(action) +
                          " out of range [0, " +
                          std::to_string(spec().action_count) + ")");
    }
  }

  int check_discrete_state(const State& x) const {
    if (!spec().state.contains(x)) {
      throw ArgumentError(spec().id + ": invalid state");
    }
    return static_cast<int>(x(0));
  }
};

}  // namespace powr
