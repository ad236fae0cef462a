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

// Numerical identity suite over seeded random tabular MDPs, plus the
// recursive-versus-cumulative check of the mirror-descent policy path.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "powr/env.hpp"
#include "powr/oracle.hpp"
#include "powr/pmd.hpp"
#include "powr/rng.hpp"
#include "powr/worldmodel.hpp"

namespace powr {

struct ResidualRow {
  std::string name;
  double max_residual = 0.0;
  int instances = 0;
};

inline constexpr double kIdentityTolerance = 1e-10;

/// Max residual of every identity over `instances` random MDPs with
/// |X| in [2, 8], |A| in [2, 4] and gamma in [0.5, 0.99].
inline std::vector<ResidualRow> identity_suite(std::uint64_t seed, int instances = 100) {
  std::vector<ResidualRow> rows{{"performance_difference"}, {"simulation_lemma"},
                                {"simulation_lemma_reward"}, {"sherman_woodbury"},
                                {"markov_row_sum"},         {"markov_dominance"},
                                {"markov_positivity"}};
  CounterRng rng(seed, 0x6964656eULL);
  auto note = [&rows](std::size_t i, double r) {
    rows[i].max_residual = std::max(rows[i].max_residual, r);
    ++rows[i].instances;
  };
  for (int k = 0; k < instances; ++k) {
    const int nx = 2 + static_cast<int>(rng.below(7));
    const int na = 2 + static_cast<int>(rng.below(3));
    const double gamma = rng.uniform(0.5, 0.99);
    const auto mdp = oracle::random_mdp(rng, nx, na, gamma);
    const auto pi1 = oracle::random_policy(rng, nx, na);
    const auto pi2 = oracle::random_policy(rng, nx, na);
    note(0, oracle::check_performance_difference(mdp, pi1, pi2));

    const auto other = oracle::random_mdp(rng, nx, na, gamma);
    const auto sim = oracle::check_simulation_lemma(mdp, {other.transition, other.reward}, pi1);
    note(1, sim.plain);
    note(2, sim.reward_perturbed);

    const Eigen::MatrixXd a = -gamma * mdp.transition;
    note(3, oracle::sherman_woodbury_residual(a, oracle::policy_operator(pi1)));

    Eigen::VectorXd f(nx);
    for (int x = 0; x < nx; ++x) f(x) = rng.uniform();
    const auto mk = oracle::check_markov_facts(mdp, pi1, f);
    note(4, mk.row_sum);
    note(5, mk.dominance);
    note(6, mk.positivity);
  }
  return rows;
}

/// Largest gap, over `iterations` mirror-descent steps, between the
/// cumulative policy softmax(eta H C_t) at the evolved states and the
/// recursively reweighted pi_{t+1} = pi_t exp(eta q_t) / Z.
inline double recursive_cumulative_gap(const WorldModelPtr& model, double gamma, double eta,
                                       int iterations) {
  auto w = PolicyWeights::zeros(model, eta);
  const auto na = model->action_count;
  Eigen::MatrixXd recursive = Eigen::MatrixXd::Constant(model->size(), na, 1.0 / na);
  double worst = 0.0;
  for (int t = 0; t < iterations; ++t) {
    const auto step = pmd_step(w, gamma);
    worst = std::max(worst, (step.evaluated - recursive).cwiseAbs().maxCoeff());
    const Eigen::MatrixXd qe = step.q.at_evolved();
    for (Eigen::Index i = 0; i < recursive.rows(); ++i) {
      const Eigen::VectorXd logits =
          recursive.row(i).transpose().array().log() + eta * qe.row(i).transpose().array();
      recursive.row(i) = softmax(logits).transpose();
    }
    w = step.next;
  }
  return worst;
}

/// Recursive-versus-cumulative gap on the exhaustive gridworld model.
inline ResidualRow gridworld_path_equivalence(int iterations = 50) {
  const FrozenLake env;
  const auto model = fit(exhaustive_dataset(env), Kernel::one_hot(), 4, {1e-6, 0.0, true});
  return {"recursive_cumulative_path", recursive_cumulative_gap(model, env.spec().gamma, 1.0, iterations), 1};
}

}  // namespace powr
