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

// Exact tabular linear algebra. Everything here works on the |X||A| x |X|
// matrix form of the transfer operator (row x * |A| + a holds tau(.|x,a))
// and the |X| x |X||A| matrix form of a policy operator. Dense solves only;
// this module validates, it does not scale.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "powr/errors.hpp"
#include "powr/rng.hpp"

namespace powr {

/// Finite MDP with explicit dynamics.
struct TabularMDP {
  int num_states = 0;
  int num_actions = 0;
  Eigen::MatrixXd transition;  // (|X||A|) x |X|
  Eigen::VectorXd reward;      // |X||A|
  double gamma = 0.9;
  Eigen::VectorXd start;       // nu over X
  std::vector<bool> terminal;  // absorbing states with zero reward

  int pair_count() const { return num_states * num_actions; }
  int pair_index(int x, int a) const { return x * num_actions + a; }

  static constexpr int kMaxPairs = 5000;

  void validate(double tol = 1e-12) const {
    if (num_states <= 0 || num_actions <= 0) {
      throw ArgumentError("TabularMDP: empty state or action set");
    }
    if (pair_count() > kMaxPairs) {
      throw ArgumentError("TabularMDP: |X||A| exceeds the dense-oracle cap");
    }
    if (transition.rows() != pair_count() || transition.cols() != num_states ||
        reward.size() != pair_count() || start.size() != num_states) {
      throw ArgumentError("TabularMDP: inconsistent shapes");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) {
      throw ArgumentError("TabularMDP: gamma must lie in [0, 1)");
    }
    if ((transition.array() < 0.0).any()) {
      throw ArgumentError("TabularMDP: negative transition probability");
    }
    const Eigen::VectorXd rows = transition.rowwise().sum();
    if ((rows.array() - 1.0).abs().maxCoeff() > tol) {
      throw ArgumentError("TabularMDP: transition rows must sum to 1");
    }
    if (!reward.allFinite()) throw ArgumentError("TabularMDP: reward not finite");
    if ((start.array() < 0.0).any() || std::abs(start.sum() - 1.0) > 1e-10) {
      throw ArgumentError("TabularMDP: start distribution invalid");
    }
    if (!terminal.empty() && static_cast<int>(terminal.size()) != num_states) {
      throw ArgumentError("TabularMDP: terminal mask has wrong length");
    }
  }

  bool is_terminal(int x) const {
    return !terminal.empty() && terminal[static_cast<std::size_t>(x)];
  }
};

/// Stochastic |X| x |A| matrix.
struct TabularPolicy {
  Eigen::MatrixXd probs;

  static TabularPolicy uniform(int num_states, int num_actions) {
    return {Eigen::MatrixXd::Constant(num_states, num_actions,
                                      1.0 / num_actions)};
  }

  static TabularPolicy deterministic(const std::vector<int>& actions,
                                     int num_actions) {
    TabularPolicy p{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()),
                                          num_actions)};
    for (std::size_t x = 0; x < actions.size(); ++x) {
      p.probs(static_cast<Eigen::Index>(x), actions[x]) = 1.0;
    }
    return p;
  }

  int num_states() const { return static_cast<int>(probs.rows()); }
  int num_actions() const { return static_cast<int>(probs.cols()); }

  void validate(double tol = 1e-10) const {
    if ((probs.array() < 0.0).any() || !probs.allFinite()) {
      throw PolicyError("TabularPolicy: negative or non-finite entry");
    }
    if ((probs.rowwise().sum().array() - 1.0).abs().maxCoeff() > tol) {
      throw PolicyError("TabularPolicy: rows must sum to 1");
    }
  }
};

namespace oracle {

/// Row-major |X| x |A| view of a flattened pair vector.
inline Eigen::MatrixXd to_table(const Eigen::VectorXd& v, int num_actions) {
  const auto rows = v.size() / num_actions;
  Eigen::MatrixXd t(rows, num_actions);
  for (Eigen::Index x = 0; x < rows; ++x) {
    for (int a = 0; a < num_actions; ++a) t(x, a) = v(x * num_actions + a);
  }
  return t;
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& table) {
  Eigen::VectorXd v(table.size());
  for (Eigen::Index x = 0; x < table.rows(); ++x) {
    for (Eigen::Index a = 0; a < table.cols(); ++a) {
      v(x * table.cols() + a) = table(x, a);
    }
  }
  return v;
}

/// Policy operator P_pi: (P g)(x) = sum_a pi(a|x) g(x,a). |X| x |X||A|.
inline Eigen::MatrixXd policy_operator(const TabularPolicy& pi) {
  const int nx = pi.num_states();
  const int na = pi.num_actions();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(nx, nx * na);
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < na; ++a) p(x, x * na + a) = pi.probs(x, a);
  }
  return p;
}

/// (Id - gamma T P)^{-1} r for an arbitrary (not necessarily stochastic) T.
inline Eigen::VectorXd action_values(const Eigen::MatrixXd& transfer,
                                     const Eigen::VectorXd& reward,
                                     const Eigen::MatrixXd& policy_op,
                                     double gamma) {
  const auto n = transfer.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
  system.noalias() -= gamma * transfer * policy_op;
  return system.partialPivLu().solve(reward);
}

/// Exact action values as a flattened |X||A| vector.
inline Eigen::VectorXd exact_q(const TabularMDP& mdp, const TabularPolicy& pi) {
  return action_values(mdp.transition, mdp.reward, policy_operator(pi),
                       mdp.gamma);
}

struct ValueAndObjective {
  Eigen::VectorXd v;  // |X|
  double J = 0.0;
};

/// v = P_pi q_pi and J = <v, nu>.
inline ValueAndObjective exact_value_and_J(const TabularMDP& mdp,
                                           const TabularPolicy& pi) {
  ValueAndObjective out;
  out.v = policy_operator(pi) * exact_q(mdp, pi);
  out.J = mdp.start.dot(out.v);
  return out;
}

/// Normalized discounted occupancy d = (1 - gamma) (Id - gamma P T)^{-*} nu.
inline Eigen::VectorXd state_visitation(const TabularMDP& mdp,
                                        const TabularPolicy& pi) {
  const Eigen::MatrixXd pt = policy_operator(pi) * mdp.transition;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(pt.rows(), pt.cols());
  system -= mdp.gamma * pt;
  return (1.0 - mdp.gamma) *
         system.transpose().partialPivLu().solve(mdp.start);
}

/// |J(pi1) - J(pi2) - <(P1 - P2) q(P2), d(P1)> / (1 - gamma)|.
inline double check_performance_difference(const TabularMDP& mdp,
                                           const TabularPolicy& pi1,
                                           const TabularPolicy& pi2) {
  const double lhs =
      exact_value_and_J(mdp, pi1).J - exact_value_and_J(mdp, pi2).J;
  const Eigen::VectorXd advantage =
      (policy_operator(pi1) - policy_operator(pi2)) * exact_q(mdp, pi2);
  const double rhs =
      advantage.dot(state_visitation(mdp, pi1)) / (1.0 - mdp.gamma);
  return std::abs(lhs - rhs);
}

/// Alternative dynamics/reward used to perturb an MDP.
struct Perturbation {
  Eigen::MatrixXd transition;  // same shape as TabularMDP::transition
  Eigen::VectorXd reward;      // same shape as TabularMDP::reward
};

struct SimulationResiduals {
  double plain = 0.0;            // dynamics-only identity
  double reward_perturbed = 0.0; // dynamics + reward identity
};

/// Sup-norm residuals of
///   q(P,T1) - q(P,T2) = gamma (Id - gamma T1 P)^{-1} (T1 - T2) v(P,T2)
/// and its reward-perturbed form
///   q(P,T1,r1) - q(P,T2,r2) = (Id - gamma T1 P)^{-1} (r1 - r2)
///                           + gamma (Id - gamma T1 P)^{-1} (T1 - T2) v(P,T2,r2)
/// with (T1, r1) the perturbation and (T2, r2) the MDP itself.
inline SimulationResiduals check_simulation_lemma(const TabularMDP& mdp,
                                                  const Perturbation& perturbed,
                                                  const TabularPolicy& pi) {
  const Eigen::MatrixXd p = policy_operator(pi);
  const double g = mdp.gamma;
  const auto n = mdp.transition.rows();
  Eigen::MatrixXd system1 = Eigen::MatrixXd::Identity(n, n);
  system1 -= g * perturbed.transition * p;
  const auto lu1 = system1.partialPivLu();
  const Eigen::MatrixXd dt = perturbed.transition - mdp.transition;

  SimulationResiduals out;
  {
    const Eigen::VectorXd q1 = action_values(perturbed.transition, mdp.reward, p, g);
    const Eigen::VectorXd q2 = action_values(mdp.transition, mdp.reward, p, g);
    const Eigen::VectorXd rhs = g * lu1.solve(dt * (p * q2));
    out.plain = (q1 - q2 - rhs).lpNorm<Eigen::Infinity>();
  }
  {
    const Eigen::VectorXd q1 =
        action_values(perturbed.transition, perturbed.reward, p, g);
    const Eigen::VectorXd q2 = action_values(mdp.transition, mdp.reward, p, g);
    const Eigen::VectorXd rhs = lu1.solve(perturbed.reward - mdp.reward) +
                                g * lu1.solve(dt * (p * q2));
    out.reward_perturbed = (q1 - q2 - rhs).lpNorm<Eigen::Infinity>();
  }
  return out;
}

/// max |(I + AB)^{-1} A - A (I + BA)^{-1}|.
inline double sherman_woodbury_residual(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b) {
  const auto m = a.rows();
  const auto k = a.cols();
  if (b.rows() != k || b.cols() != m) {
    throw ArgumentError("sherman_woodbury_residual: shapes not conformable");
  }
  const Eigen::MatrixXd left =
      (Eigen::MatrixXd::Identity(m, m) + a * b).partialPivLu().solve(a);
  const Eigen::MatrixXd right_inv =
      (Eigen::MatrixXd::Identity(k, k) + b * a).partialPivLu().inverse();
  return (left - a * right_inv).cwiseAbs().maxCoeff();
}

struct MarkovFactResiduals {
  double row_sum = 0.0;     // |(1-g)(Id - g P T)^{-1} 1 - 1|_inf
  double dominance = 0.0;   // max(f - (Id - g P T)^{-1} f, 0) for f >= 0
  double positivity = 0.0;  // max(-(1-g)(Id - g P T)^{-1}, 0) entrywise
};

/// Numerical check that (1 - gamma)(Id - gamma P T)^{-1} is a Markov
/// operator and dominates the identity on non-negative functions.
inline MarkovFactResiduals check_markov_facts(const TabularMDP& mdp,
                                              const TabularPolicy& pi,
                                              const Eigen::VectorXd& f) {
  const Eigen::MatrixXd pt = policy_operator(pi) * mdp.transition;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(pt.rows(), pt.cols());
  system -= mdp.gamma * pt;
  const Eigen::MatrixXd resolvent = system.partialPivLu().inverse();
  MarkovFactResiduals out;
  out.row_sum = ((1.0 - mdp.gamma) * resolvent.rowwise().sum().array() - 1.0)
                    .abs()
                    .maxCoeff();
  out.dominance = std::max(0.0, (f - resolvent * f).maxCoeff());
  out.positivity = std::max(0.0, -((1.0 - mdp.gamma) * resolvent).minCoeff());
  return out;
}

struct OptimalPolicy {
  TabularPolicy policy;
  std::vector<int> actions;
  Eigen::VectorXd q;  // flattened
  double J = 0.0;
  int iterations = 0;
};

/// Howard policy iteration; greedy ties go to the lowest action index.
inline OptimalPolicy policy_iteration(const TabularMDP& mdp,
                                      int max_iterations = 1000) {
  const int nx = mdp.num_states;
  const int na = mdp.num_actions;
  std::vector<int> actions(static_cast<std::size_t>(nx), 0);
  OptimalPolicy out;
  for (int it = 1; it <= max_iterations; ++it) {
    const auto pi = TabularPolicy::deterministic(actions, na);
    const Eigen::VectorXd q = exact_q(mdp, pi);
    bool stable = true;
    for (int x = 0; x < nx; ++x) {
      const auto cur = static_cast<std::size_t>(x);
      int best = 0;
      for (int a = 1; a < na; ++a) {
        if (q(x * na + a) > q(x * na + best)) best = a;
      }
      // Keep the incumbent unless the greedy action beats it beyond
      // round-off; this is what guarantees finite termination.
      const double incumbent = q(x * na + actions[cur]);
      if (q(x * na + best) <= incumbent + 1e-12 * std::max(1.0, std::abs(incumbent))) {
        best = actions[cur];
      }
      if (best != actions[cur]) {
        actions[cur] = best;
        stable = false;
      }
    }
    out.iterations = it;
    if (stable) {
      out.policy = pi;
      out.q = q;
      out.actions = actions;
      out.J = mdp.start.dot(policy_operator(pi) * q);
      return out;
    }
  }
  throw NumericalError("policy_iteration: no convergence");
}

struct ExactPmdResult {
  std::vector<TabularPolicy> policies;  // pi_0 .. pi_T
  std::vector<double> objective;        // J(pi_t)
  std::vector<double> gaps;             // J* - J(pi_t)
  double optimal_objective = 0.0;
};

/// Exact KL mirror descent: pi_{t+1} ∝ pi_t exp(eta q_{pi_t}), pi_0 uniform.
inline ExactPmdResult exact_pmd(const TabularMDP& mdp, double eta, int iterations) {
  const int nx = mdp.num_states;
  const int na = mdp.num_actions;
  ExactPmdResult out;
  out.optimal_objective = policy_iteration(mdp).J;
  auto pi = TabularPolicy::uniform(nx, na);
  for (int t = 0;; ++t) {
    const Eigen::VectorXd q = exact_q(mdp, pi);
    const double j = mdp.start.dot(policy_operator(pi) * q);
    out.policies.push_back(pi);
    out.objective.push_back(j);
    out.gaps.push_back(out.optimal_objective - j);
    if (t == iterations) break;
    // Work in the log domain so repeated reweighting never underflows a row.
    for (int x = 0; x < nx; ++x) {
      Eigen::VectorXd logits(na);
      for (int a = 0; a < na; ++a) {
        logits(a) = std::log(pi.probs(x, a)) + eta * q(x * na + a);
      }
      logits.array() -= logits.maxCoeff();
      const Eigen::VectorXd w = logits.array().exp();
      pi.probs.row(x) = (w / w.sum()).transpose();
    }
  }
  return out;
}

/// Random MDP: Dirichlet(1) transition rows, rewards U[0,1), random nu.
inline TabularMDP random_mdp(CounterRng& rng, int num_states, int num_actions,
                             double gamma) {
  TabularMDP mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.gamma = gamma;
  mdp.transition.resize(num_states * num_actions, num_states);
  for (Eigen::Index i = 0; i < mdp.transition.rows(); ++i) {
    for (int x = 0; x < num_states; ++x) {
      mdp.transition(i, x) = -std::log(1.0 - rng.uniform());
    }
    mdp.transition.row(i) /= mdp.transition.row(i).sum();
  }
  mdp.reward.resize(num_states * num_actions);
  for (Eigen::Index i = 0; i < mdp.reward.size(); ++i) mdp.reward(i) = rng.uniform();
  mdp.start.resize(num_states);
  for (int x = 0; x < num_states; ++x) mdp.start(x) = -std::log(1.0 - rng.uniform());
  mdp.start /= mdp.start.sum();
  return mdp;
}

inline TabularPolicy random_policy(CounterRng& rng, int num_states,
                                   int num_actions) {
  TabularPolicy pi{Eigen::MatrixXd(num_states, num_actions)};
  for (int x = 0; x < num_states; ++x) {
    for (int a = 0; a < num_actions; ++a) {
      pi.probs(x, a) = -std::log(1.0 - rng.uniform());
    }
    pi.probs.row(x) /= pi.probs.row(x).sum();
  }
  return pi;
}

}  // namespace oracle
}  // namespace powr
