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

// Random tabular problems and datasets shared by the tests.

#include <Eigen/Dense>

#include "powr/env.hpp"
#include "powr/oracle.hpp"
#include "powr/rng.hpp"

namespace powr::testing {

inline PolicyFn tabular_fn(const TabularPolicy& pi) {
  return [pi](const State& x) {
    return Eigen::VectorXd(pi.probs.row(static_cast<int>(x(0))).transpose());
  };
}

/// n uniformly drawn (x, a) pairs, skipping terminal states, with one
/// sampled step each.
inline TransitionDataset random_dataset(CounterRng& rng, const TabularMDP& mdp, int n) {
  TabularEnv env(mdp, 1000);
  TransitionDataset ds;
  ds.env_id = env.spec().id;
  for (int i = 0; i < n; ++i) {
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(mdp.num_states)));
    if (mdp.is_terminal(x)) continue;
    const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(mdp.num_actions)));
    const auto s = env.step(discrete_state(x), a, rng);
    ds.transitions.push_back({discrete_state(x), a, s.next, s.reward, s.done, false});
  }
  return ds;
}

/// Random MDP whose last state is absorbing, rewardless and terminal.
inline TabularMDP random_mdp_with_terminal(CounterRng& rng, int ns, int na, double gamma) {
  auto m = oracle::random_mdp(rng, ns, na, gamma);
  m.terminal.assign(static_cast<std::size_t>(ns), false);
  m.terminal.back() = true;
  for (int a = 0; a < na; ++a) {
    const int r = m.pair_index(ns - 1, a);
    m.transition.row(r).setZero();
    m.transition(r, ns - 1) = 1.0;
    m.reward(r) = 0.0;
  }
  return m;
}

}  // namespace powr::testing
