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

#include <Eigen/Eigenvalues>

#include "powr/kernel.hpp"
#include "powr/rng.hpp"

namespace powr {
namespace {

State vec(std::initializer_list<double> v) {
  State x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

std::vector<State> random_points(CounterRng& rng, int n, int dim) {
  std::vector<State> pts;
  for (int i = 0; i < n; ++i) {
    State x(dim);
    for (int d = 0; d < dim; ++d) x(d) = rng.uniform(-1.0, 1.0);
    pts.push_back(x);
  }
  return pts;
}

TEST(Kernel, LaplacianValues) {
  const auto k = Kernel::laplacian(1.0);
  EXPECT_DOUBLE_EQ(k(vec({0.3, -0.2}), vec({0.3, -0.2})), 1.0);
  EXPECT_NEAR(k(vec({0.0}), vec({1.0})), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(k(vec({0.0, 0.0}), vec({3.0, 4.0})), std::exp(-5.0), 1e-15);
}

TEST(Kernel, GaussianAndLengthScales) {
  const auto g = Kernel::gaussian(2.0);
  EXPECT_NEAR(g(vec({0.0}), vec({2.0})), std::exp(-0.5), 1e-15);
  Eigen::VectorXd scales(2);
  scales << 2.0, 0.5;
  const auto k = Kernel::laplacian(1.0, scales);
  EXPECT_NEAR(k(vec({0.0, 0.0}), vec({2.0, 0.5})), std::exp(-std::sqrt(2.0)), 1e-15);
}

TEST(Kernel, BandwidthScaling) {
  const State x = vec({0.1, 0.7}), y = vec({-0.4, 0.2});
  const double c = 3.0;
  EXPECT_NEAR(Kernel::laplacian(c)(c * x, c * y), Kernel::laplacian(1.0)(x, y), 1e-14);
  EXPECT_NEAR(Kernel::gaussian(c)(c * x, c * y), Kernel::gaussian(1.0)(x, y), 1e-14);
}

TEST(Kernel, OneHotGramIsIdentityOnDistinctStates) {
  std::vector<State> pts;
  for (int i = 0; i < 6; ++i) pts.push_back(discrete_state(i));
  const auto g = gram(Kernel::one_hot(), pts, pts);
  EXPECT_EQ(g, Eigen::MatrixXd::Identity(6, 6));
}

TEST(Kernel, GramIsSymmetricPositiveSemidefinite) {
  CounterRng rng(3);
  for (const auto& k : {Kernel::laplacian(0.5), Kernel::gaussian(0.7)}) {
    const auto pts = random_points(rng, 40, 2);
    const auto g = gram(k, pts, pts);
    EXPECT_EQ((g - g.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(Kernel, CrossGramMatchesPairwise) {
  CounterRng rng(5);
  const auto a = random_points(rng, 5, 3), b = random_points(rng, 7, 3);
  const auto k = Kernel::laplacian(0.8);
  const auto g = gram(k, a, b);
  ASSERT_EQ(g.rows(), 5);
  ASSERT_EQ(g.cols(), 7);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 7; ++j) EXPECT_EQ(g(i, j), k(a[i], b[j]));
    EXPECT_EQ((kernel_row(k, a[i], b) - g.row(i)).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Kernel, DimensionMismatchThrows) {
  EXPECT_THROW(Kernel::laplacian(1.0)(vec({0.0}), vec({0.0, 1.0})), ArgumentError);
  EXPECT_THROW(Kernel::laplacian(0.0), ArgumentError);
  EXPECT_THROW(kernel_family_from_string("polynomial"), ArgumentError);
}

TEST(StateActionKernel, DistinctActionsGiveBlockDiagonal) {
  CounterRng rng(7);
  const auto pts = random_points(rng, 6, 2);
  const std::vector<int> acts{0, 1, 2, 0, 1, 2};
  const StateActionKernel sak{Kernel::gaussian(1.0), 3};
  const auto g = gram_state_action(sak, pts, acts, pts, acts);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (acts[i] != acts[j]) {
        EXPECT_EQ(g(i, j), 0.0);
      } else {
        EXPECT_EQ(g(i, j), sak.base(pts[i], pts[j]));
      }
    }
  }
}

TEST(StateActionKernel, HadamardIdentityAndSingleAction) {
  CounterRng rng(8);
  const auto pts = random_points(rng, 8, 2);
  std::vector<int> acts;
  for (int i = 0; i < 8; ++i) acts.push_back(static_cast<int>(rng.below(3)));
  const StateActionKernel sak{Kernel::laplacian(0.6), 3};
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(8, 3);
  for (int i = 0; i < 8; ++i) e(i, acts[i]) = 1.0;
  const auto g = gram_state_action(sak, pts, acts, pts, acts);
  const Eigen::MatrixXd expected = gram(sak.base, pts, pts).cwiseProduct(e * e.transpose());
  EXPECT_LT((g - expected).cwiseAbs().maxCoeff(), 1e-15);

  const std::vector<int> zeros(8, 0);
  const StateActionKernel single{Kernel::laplacian(0.6), 1};
  EXPECT_EQ(gram_state_action(single, pts, zeros, pts, zeros), gram(single.base, pts, pts));
}

TEST(StateActionKernel, PermutationInvariance) {
  CounterRng rng(9);
  const auto pts = random_points(rng, 5, 1);
  const std::vector<int> acts{0, 1, 0, 1, 1};
  const StateActionKernel sak{Kernel::laplacian(1.0), 2};
  const auto g = gram_state_action(sak, pts, acts, pts, acts);
  const std::vector<int> perm{3, 0, 4, 1, 2};
  std::vector<State> pp;
  std::vector<int> pa;
  for (int p : perm) {
    pp.push_back(pts[p]);
    pa.push_back(acts[p]);
  }
  const auto gp = gram_state_action(sak, pp, pa, pp, pa);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_EQ(gp(i, j), g(perm[i], perm[j]));
  }
}

}  // namespace
}  // namespace powr
