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

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "powr/env/types.hpp"
#include "powr/errors.hpp"

namespace powr {

enum class KernelFamily { laplacian, gaussian, one_hot };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::laplacian: return "laplacian";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::one_hot: return "one_hot";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "laplacian") return KernelFamily::laplacian;
  if (s == "gaussian") return KernelFamily::gaussian;
  if (s == "one_hot" || s == "one-hot" || s == "onehot" || s == "tabular") {
    return KernelFamily::one_hot;
  }
  throw ArgumentError("unknown kernel family '" + s + "'");
}

/// Positive-definite kernel on states.
///
///   laplacian  k(x, y) = exp(-|D(x - y)| / sigma)
///   gaussian   k(x, y) = exp(-|D(x - y)|^2 / (2 sigma^2))
///   one_hot    k(x, y) = [x == y]
///
/// where D = diag(1 / length_scales) when length scales are given (used to
/// map a state box onto the unit cube) and the identity otherwise.
struct Kernel {
  KernelFamily family = KernelFamily::one_hot;
  double sigma = 1.0;
  Eigen::VectorXd length_scales;

  static Kernel laplacian(double sigma, Eigen::VectorXd scales = {}) {
    Kernel k{KernelFamily::laplacian, sigma, std::move(scales)};
    k.validate();
    return k;
  }
  static Kernel gaussian(double sigma, Eigen::VectorXd scales = {}) {
    Kernel k{KernelFamily::gaussian, sigma, std::move(scales)};
    k.validate();
    return k;
  }
  static Kernel one_hot() { return {KernelFamily::one_hot, 1.0, {}}; }

  void validate() const {
    if (family != KernelFamily::one_hot && !(sigma > 0.0 && std::isfinite(sigma))) {
      throw ArgumentError("kernel bandwidth sigma must be positive");
    }
    if (length_scales.size() > 0 && (length_scales.array() <= 0.0).any()) {
      throw ArgumentError("kernel length scales must be positive");
    }
  }

  double operator()(const State& x, const State& y) const {
    if (x.size() != y.size()) {
      throw ArgumentError("kernel: dimension mismatch (" + std::to_string(x.size()) +
                          " vs " + std::to_string(y.size()) + ")");
    }
    if (family == KernelFamily::one_hot) return x == y ? 1.0 : 0.0;
    double sq = 0.0;
    if (length_scales.size() > 0) {
      if (length_scales.size() != x.size()) {
        throw ArgumentError("kernel: length scales do not match state dimension");
      }
      sq = ((x - y).array() / length_scales.array()).square().sum();
    } else {
      sq = (x - y).squaredNorm();
    }
    if (family == KernelFamily::gaussian) return std::exp(-sq / (2.0 * sigma * sigma));
    return std::exp(-std::sqrt(sq) / sigma);
  }
};

/// Gram matrix G(i, j) = k(a_i, b_j).
inline Eigen::MatrixXd gram(const Kernel& k, std::span<const State> a,
                            std::span<const State> b) {
  const auto n = static_cast<Eigen::Index>(a.size());
  const auto m = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd g(n, m);
  const bool symmetric = a.data() == b.data() && n == m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ai = a[static_cast<std::size_t>(i)];
    for (Eigen::Index j = symmetric ? i : 0; j < m; ++j) {
      g(i, j) = k(ai, b[static_cast<std::size_t>(j)]);
      if (symmetric) g(j, i) = g(i, j);
    }
  }
  return g;
}

/// Row (k(x, b_j))_j.
inline Eigen::RowVectorXd kernel_row(const Kernel& k, const State& x,
                                     std::span<const State> b) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j) r(static_cast<Eigen::Index>(j)) = k(x, b[j]);
  return r;
}

/// Separable kernel on state-action pairs,
/// k((x, a), (y, b)) = k(x, y) [a == b], i.e. the feature map phi(x) (x) e_a.
struct StateActionKernel {
  Kernel base;
  int action_count = 1;

  double operator()(const State& x, int a, const State& y, int b) const {
    if (a < 0 || a >= action_count || b < 0 || b >= action_count) {
      throw ArgumentError("state-action kernel: action out of range");
    }
    return a == b ? base(x, y) : 0.0;
  }
};

inline Eigen::MatrixXd gram_state_action(const StateActionKernel& k,
                                         std::span<const State> xa,
                                         std::span<const int> aa,
                                         std::span<const State> xb,
                                         std::span<const int> ab) {
  if (xa.size() != aa.size() || xb.size() != ab.size()) {
    throw ArgumentError("gram_state_action: states and actions differ in length");
  }
  const auto n = static_cast<Eigen::Index>(xa.size());
  const auto m = static_cast<Eigen::Index>(xb.size());
  Eigen::MatrixXd g(n, m);
  const bool symmetric = xa.data() == xb.data() && aa.data() == ab.data() && n == m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    for (Eigen::Index j = symmetric ? i : 0; j < m; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      g(i, j) = k(xa[si], aa[si], xb[sj], ab[sj]);
      if (symmetric) g(j, i) = g(i, j);
    }
  }
  return g;
}

}  // namespace powr
