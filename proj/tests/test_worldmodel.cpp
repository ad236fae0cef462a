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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "powr/env.hpp"
#include "powr/worldmodel.hpp"
#include "support/explicit_operator.hpp"
#include "support/random_data.hpp"

namespace powr {
namespace {

using testing::random_dataset;
using testing::random_mdp_with_terminal;
using testing::tabular_fn;

TEST(Fit, SingleSampleCoefficients) {
  TransitionDataset ds;
  ds.transitions.push_back({discrete_state(0), 0, discrete_state(0), 1.0, false, false});
  const auto m = fit(ds, Kernel::one_hot(), 1, {1.0, 0.0, false});
  EXPECT_DOUBLE_EQ(m->regularized_gram()(0, 0), 2.0);
  EXPECT_NEAR(m->b(0), 0.5, 1e-15);
  EXPECT_NEAR(m->reward_estimate(discrete_state(0), 0), 0.5, 1e-15);
}

TEST(Fit, RejectsBadInput) {
  TransitionDataset empty;
  EXPECT_THROW(fit(empty, Kernel::one_hot(), 2), ArgumentError);
  TransitionDataset ds;
  ds.transitions.push_back({discrete_state(0), 3, discrete_state(0), 1.0, false, false});
  EXPECT_THROW(fit(ds, Kernel::one_hot(), 2), ArgumentError);
  ds.transitions[0].a = 0;
  EXPECT_THROW(fit(ds, Kernel::one_hot(), 2, {0.0}), ArgumentError);
  ds.transitions[0].r = std::nan("");
  EXPECT_THROW(fit(ds, Kernel::one_hot(), 2), NumericalError);
}

TEST(EstimateQ, SelfLoopGeometricSeries) {
  TransitionDataset ds;
  ds.transitions.push_back({discrete_state(0), 0, discrete_state(0), 1.0, false, false});
  const auto m = fit(ds, Kernel::one_hot(), 1, {1e-12});
  const auto q = estimate_q(m, uniform_policy(1), 0.5);
  EXPECT_NEAR(q(discrete_state(0), 0), 2.0, 1e-9);
}

TEST(EstimateQ, ZeroDiscountIsRewardEstimate) {
  CounterRng rng(1);
  const auto mdp = oracle::random_mdp(rng, 4, 2, 0.9);
  const auto ds = random_dataset(rng, mdp, 60);
  const auto m = fit(ds, Kernel::one_hot(), 2, {1e-3});
  const auto q = estimate_q(m, uniform_policy(2), 0.0);
  for (int x = 0; x < 4; ++x) {
    for (int a = 0; a < 2; ++a) {
      EXPECT_NEAR(q(discrete_state(x), a), m->reward_estimate(discrete_state(x), a), 1e-12);
    }
  }
}

TEST(EstimateQ, MatchesExplicitOperatorForm) {
  CounterRng rng(2);
  for (int inst = 0; inst < 10; ++inst) {
    const int ns = 3 + static_cast<int>(rng.below(5));
    const int na = 2 + static_cast<int>(rng.below(3));
    const auto mdp = random_mdp_with_terminal(rng, ns, na, 0.9);
    const auto ds = random_dataset(rng, mdp, 80);
    const double shift = inst % 2 ? 0.0 : 2.0;
    const double lambda = 1e-3;
    const auto pi = oracle::random_policy(rng, ns, na);
    const auto m = fit(ds, Kernel::one_hot(), na, {lambda, shift, inst % 3 == 0});
    const auto q = estimate_q(m, tabular_fn(pi), 0.9);
    const auto ex = testing::explicit_q(testing::explicit_model(ds, ns, na, lambda, shift, 0.9), pi);
    for (int x = 0; x < ns; ++x) {
      for (int a = 0; a < na; ++a) {
        EXPECT_NEAR(q(discrete_state(x), a), ex(x * na + a), 1e-8);
      }
    }
  }
}

TEST(EstimateQ, DedupMatchesDuplicatedData) {
  const FrozenLake env;
  const auto ds = exhaustive_dataset(env);
  const auto plain = fit(ds, Kernel::one_hot(), 4, {1e-4, 0.0, false});
  const auto merged = fit(ds, Kernel::one_hot(), 4, {1e-4, 0.0, true});
  EXPECT_LT(merged->size(), plain->size());
  EXPECT_EQ(merged->sample_count, plain->sample_count);
  const auto pi = uniform_policy(4);
  const auto qa = estimate_q(plain, pi, 0.99);
  const auto qb = estimate_q(merged, pi, 0.99);
  for (int x = 0; x < 16; ++x) {
    for (int a = 0; a < 4; ++a) {
      EXPECT_NEAR(qa(discrete_state(x), a), qb(discrete_state(x), a), 1e-9);
    }
  }
}

TEST(EstimateQ, WellSpecifiedRecovery) {
  const FrozenLake env;
  const auto mdp = exact_dynamics(env);
  const auto m = fit(exhaustive_dataset(env), Kernel::one_hot(), 4, {1e-10, 0.0, true});
  CounterRng rng(3);
  for (int k = 0; k < 5; ++k) {
    const auto pi = oracle::random_policy(rng, 16, 4);
    const auto exact = oracle::exact_q(mdp, pi);
    const auto q = estimate_q(m, tabular_fn(pi), mdp.gamma);
    for (int x = 0; x < 16; ++x) {
      if (env.is_terminal(x)) continue;
      for (int a = 0; a < 4; ++a) {
        EXPECT_NEAR(q.raw(discrete_state(x), a), exact(mdp.pair_index(x, a)), 1e-5);
      }
    }
  }
}

TEST(EstimateQ, RewardShiftMovesValuesByConstant) {
  const Taxi env;
  const auto mdp = exact_dynamics(env);
  auto ds = exhaustive_dataset(env);
  const auto base = fit(ds, Kernel::one_hot(), 6, {1e-13, 0.0, true});
  const auto shifted = fit(ds, Kernel::one_hot(), 6, {1e-13, 10.0, true});
  const auto pi = uniform_policy(6);
  const double gamma = 0.9;
  const auto qa = estimate_q(base, pi, gamma);
  const auto qb = estimate_q(shifted, pi, gamma);
  const auto exact = oracle::exact_q({mdp.num_states, mdp.num_actions, mdp.transition, mdp.reward,
                                      gamma, mdp.start, mdp.terminal},
                                     TabularPolicy::uniform(500, 6));
  for (int x = 0; x < 500; x += 13) {
    if (env.is_terminal(x)) continue;
    for (int a = 0; a < 6; ++a) {
      EXPECT_NEAR(qb(discrete_state(x), a) - qa(discrete_state(x), a), 10.0 / (1 - gamma), 1e-5);
      EXPECT_NEAR(qb.raw(discrete_state(x), a), exact(mdp.pair_index(x, a)), 1e-5);
    }
  }
}

TEST(SpectralRadius, MatchesEigenvalues) {
  const FrozenLake env;
  const auto m = fit(exhaustive_dataset(env), Kernel::one_hot(), 4, {1e-6, 0.0, true});
  CounterRng rng(4);
  for (int k = 0; k < 5; ++k) {
    const auto pi = oracle::random_policy(rng, 16, 4);
    const auto p = policy_at_evolved(*m, tabular_fn(pi));
    const auto mp = policy_transfer_matrix(*m, p);
    const Eigen::MatrixXd op = m->regularized_gram().partialPivLu().solve(mp);
    const double eig = op.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(spectral_radius(*m, mp, {500, 1e-12}), eig, 1e-6);
    EXPECT_NEAR(spectral_radius(*m, mp), eig, 1e-2);
  }
}

TEST(SpectralRadius, ContinuousKernelMatchesEigenvalues) {
  const auto env = make_env("mountaincar");
  const auto ds = collect(*env, uniform_policy(3), 200, 1).data;
  Eigen::VectorXd scales(2);
  scales << 1.8, 0.14;
  const auto m = fit(ds, Kernel::laplacian(0.2, scales), 3, {1e-4});
  const auto p = policy_at_evolved(*m, uniform_policy(3));
  const auto mp = policy_transfer_matrix(*m, p);
  const Eigen::MatrixXd op = m->regularized_gram().partialPivLu().solve(mp);
  const double eig = op.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(spectral_radius(*m, mp, {2000, 1e-13}), eig, 1e-4 * eig);
}

TEST(EstimateQ, ContractionGuardThrows) {
  TransitionDataset ds;
  ds.transitions.push_back({discrete_state(0), 0, discrete_state(0), 1.0, false, false});
  const auto m = fit(ds, Kernel::one_hot(), 1, {1e-12});
  try {
    estimate_q(m, uniform_policy(1), 0.9999999);
    FAIL() << "expected ContractionViolation";
  } catch (const ContractionViolation& e) {
    EXPECT_NEAR(e.radius(), 1.0, 1e-9);
    EXPECT_EQ(e.gamma(), 0.9999999);
  }
  EXPECT_THROW(estimate_q(m, uniform_policy(1), 1.0), ArgumentError);
}

TEST(WorldModel, WithLambdaRefactorizes) {
  CounterRng rng(5);
  const auto mdp = oracle::random_mdp(rng, 4, 2, 0.9);
  const auto ds = random_dataset(rng, mdp, 50);
  const auto a = fit(ds, Kernel::one_hot(), 2, {1e-2});
  const auto b = fit(ds, Kernel::one_hot(), 2, {1e-5})->with_lambda(1e-2);
  EXPECT_LT((a->b - b->b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a->chol_lower - b->chol_lower).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WorldModel, SaveLoadRoundTrip) {
  const auto env = make_env("mountaincar");
  const auto ds = collect(*env, uniform_policy(3), 150, 2).data;
  const auto m = fit(ds, Kernel::laplacian(0.3), 3, {1e-4, 1.0, false});
  std::stringstream ss;
  save_model(ss, *m);
  const auto back = load_model(ss);
  EXPECT_EQ(back->size(), m->size());
  EXPECT_EQ(back->b, m->b);
  EXPECT_EQ(back->H, m->H);
  const auto pi = uniform_policy(3);
  const auto qa = estimate_q(m, pi, 0.99);
  const auto qb = estimate_q(back, pi, 0.99);
  EXPECT_EQ(qa.c, qb.c);
  std::stringstream junk("not a model");
  EXPECT_THROW(load_model(junk), ArgumentError);
}

}  // namespace
}  // namespace powr
