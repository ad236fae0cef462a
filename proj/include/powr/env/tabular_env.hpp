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

#include <string>
#include <vector>

#include "powr/env/types.hpp"
#include "powr/oracle.hpp"

namespace powr {

/// Environment backed by an explicit TabularMDP. Rewards are deterministic
/// per (x, a); landing in a state flagged terminal ends the episode.
class TabularEnv final : public Environment {
 public:
  explicit TabularEnv(TabularMDP mdp, int max_episode_steps = 100,
                      std::string id = "tabular")
      : mdp_(std::move(mdp)) {
    mdp_.validate();
    spec_.id = std::move(id);
    spec_.state = StateDescriptor::finite(mdp_.num_states);
    spec_.action_count = mdp_.num_actions;
    spec_.max_episode_steps = max_episode_steps;
    spec_.gamma = mdp_.gamma;
    spec_.reward_threshold = 0.0;
    const double lowest = mdp_.reward.minCoeff();
    spec_.reward_shift = lowest < 0.0 ? -lowest : 0.0;
    if (mdp_.num_actions >= 2 && mdp_.gamma > 0.0) spec_.validate();
  }

  const EnvSpec& spec() const override { return spec_; }
  const TabularMDP& mdp() const { return mdp_; }

  State reset(std::uint64_t seed) const override {
    CounterRng rng(seed, 0x746162ULL);
    return discrete_state(sample_categorical(mdp_.start, rng));
  }

  StepResult step(const State& x, int action, CounterRng& rng) const override {
    check_action(action);
    const int s = check_discrete_state(x);
    const int row = mdp_.pair_index(s, action);
    const Eigen::VectorXd p = mdp_.transition.row(row).transpose();
    const int next = sample_categorical(p, rng);
    return {discrete_state(next), mdp_.reward(row), mdp_.is_terminal(next)};
  }

  std::vector<Outcome> outcomes(int s, int action) const override {
    check_action(action);
    std::vector<Outcome> out;
    const int row = mdp_.pair_index(s, action);
    for (int next = 0; next < mdp_.num_states; ++next) {
      const double p = mdp_.transition(row, next);
      if (p > 0.0) out.push_back({next, p, mdp_.reward(row), mdp_.is_terminal(next)});
    }
    return out;
  }

  Eigen::VectorXd start_distribution() const override { return mdp_.start; }

  bool is_terminal(int s) const override { return mdp_.is_terminal(s); }

 private:
  TabularMDP mdp_;
  EnvSpec spec_;
};

}  // namespace powr
