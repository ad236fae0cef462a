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

// Conditional-mean-embedding world model on a separable state-action
// feature space psi(x, a) = phi(x) (x) e_a.
//
// With anchors z_i = (x_i, a_i), evolved states x'_i and rewards y_i:
//
//   K_lambda = [k(x_i, x_j)[a_i == a_j]] + n lambda W^{-1}
//   H        = [k(x'_i, x_j)]            (row i zeroed when x'_i is terminal)
//   b        = K_lambda^{-1} y
//
// The transfer operator estimate is T_n = S_n^* K_lambda^{-1} Z_n and the
// reward estimate r_n = S_n^* b. For a policy pi, M_pi = H ⊙ (P E^T) with
// P(i, a) = pi(a | x'_i), and the action-value estimate is
// q = S_n^* c with (K_lambda - gamma M_pi) c = y, which is the same system
// as (Id - gamma K_lambda^{-1} M_pi) c = b without forming the inverse.
//
// W holds multiplicities when identical transitions are merged; merging m
// copies into one anchor of weight m gives exactly the same estimator as
// keeping the m copies, and n counts copies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "powr/env/rollout.hpp"
#include "powr/env/types.hpp"
#include "powr/errors.hpp"
#include "powr/kernel.hpp"
#include "powr/rng.hpp"

namespace powr {

struct FitOptions {
  double lambda = 1e-6;
  // Constant c added to every reward. Terminal transitions additionally
  // receive gamma c / (1 - gamma) at estimation time, which is the value of
  // the absorbing state in the shifted problem.
  double reward_shift = 0.0;
  // Merge identical (x, a, x', r, terminal) tuples into weighted anchors.
  bool dedup = false;
};

/// Fitted world model. Immutable once built; share it as WorldModelPtr.
struct WorldModel {
  Kernel kernel;
  int action_count = 0;

  std::vector<State> anchors;   // x_i
  std::vector<int> actions;     // a_i
  Eigen::VectorXd weights;      // multiplicities (all ones without dedup)
  std::vector<State> evolved;   // x'_i
  std::vector<std::uint8_t> terminal;
  Eigen::VectorXd rewards;      // y_i = r_i + reward_shift

  double lambda = 0.0;
  double sample_count = 0.0;    // n = sum of weights
  double reward_shift = 0.0;

  Eigen::MatrixXd gram;         // unregularized state-action Gram matrix
  Eigen::MatrixXd chol_lower;   // L with L L^T = K_lambda
  Eigen::VectorXd b;            // K_lambda^{-1} y
  Eigen::VectorXd b_terminal;   // K_lambda^{-1} 1[terminal]
  Eigen::MatrixXd H;            // H(i, j) = k(x'_i, x_j), terminal rows zero

  Eigen::Index size() const { return static_cast<Eigen::Index>(anchors.size()); }

  Eigen::VectorXd ridge_diagonal() const {
    return (sample_count * lambda) * weights.cwiseInverse();
  }

  Eigen::MatrixXd regularized_gram() const {
    Eigen::MatrixXd k = gram;
    k.diagonal() += ridge_diagonal();
    return k;
  }

  /// K_lambda^{-1} rhs through the stored Cholesky factor.
  template <typename Rhs>
  Eigen::MatrixXd solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    Eigen::MatrixXd z = chol_lower.triangularView<Eigen::Lower>().solve(rhs);
    chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    return z;
  }

  /// (k(x, x_j))_j over anchor states.
  Eigen::RowVectorXd kernel_row(const State& x) const {
    return powr::kernel_row(kernel, x, anchors);
  }

  /// Reward estimate r_n(x, a) in shifted units.
  double reward_estimate(const State& x, int a) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < size(); ++j) {
      if (actions[static_cast<std::size_t>(j)] == a) {
        s += b(j) * kernel(x, anchors[static_cast<std::size_t>(j)]);
      }
    }
    return s;
  }

  /// Copy with a different ridge; Gram and H are reused, only the
  /// factorization and b are recomputed.
  std::shared_ptr<const WorldModel> with_lambda(double new_lambda) const;
};

using WorldModelPtr = std::shared_ptr<const WorldModel>;

namespace detail {

inline void factorize(WorldModel& m) {
  if (!(m.lambda > 0.0)) throw ArgumentError("fit: lambda must be positive");
  const Eigen::MatrixXd k = m.regularized_gram();
  if (!k.allFinite()) {
    throw NumericalError("fit: non-finite entries in the regularized Gram matrix");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("fit: Cholesky factorization of K_lambda failed (n = " +
                         std::to_string(m.size()) + ", lambda = " +
                         std::to_string(m.lambda) + ")");
  }
  m.chol_lower = llt.matrixL();
  Eigen::VectorXd term(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    term(i) = m.terminal[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  m.b = m.solve(m.rewards);
  m.b_terminal = m.solve(term);
  if (!m.b.allFinite() || !m.b_terminal.allFinite()) {
    throw NumericalError("fit: non-finite reward coefficients");
  }
}

}  // namespace detail

inline WorldModelPtr WorldModel::with_lambda(double new_lambda) const {
  auto m = std::make_shared<WorldModel>(*this);
  m->lambda = new_lambda;
  detail::factorize(*m);
  return m;
}

/// Fit the world model on a dataset.
inline WorldModelPtr fit(const TransitionDataset& data, const Kernel& kernel,
                         int action_count, const FitOptions& opts = {}) {
  if (data.empty()) throw ArgumentError("fit: empty dataset");
  if (!(opts.lambda > 0.0)) throw ArgumentError("fit: lambda must be positive");
  kernel.validate();
  auto m = std::make_shared<WorldModel>();
  m->kernel = kernel;
  m->action_count = action_count;
  m->lambda = opts.lambda;
  m->reward_shift = opts.reward_shift;

  std::vector<double> weights;
  std::vector<double> rewards;
  std::map<std::vector<double>, std::size_t> seen;
  for (const auto& t : data.transitions) {
    if (t.a < 0 || t.a >= action_count) throw ArgumentError("fit: action out of range");
    if (!std::isfinite(t.r)) throw NumericalError("fit: non-finite reward in dataset");
    if (opts.dedup) {
      std::vector<double> key(t.x.data(), t.x.data() + t.x.size());
      key.push_back(t.a);
      key.insert(key.end(), t.x_next.data(), t.x_next.data() + t.x_next.size());
      key.push_back(t.r);
      key.push_back(t.terminal() ? 1.0 : 0.0);
      const auto [it, inserted] = seen.emplace(std::move(key), weights.size());
      if (!inserted) {
        weights[it->second] += 1.0;
        continue;
      }
    }
    m->anchors.push_back(t.x);
    m->actions.push_back(t.a);
    m->evolved.push_back(t.x_next);
    m->terminal.push_back(t.terminal() ? 1 : 0);
    weights.push_back(1.0);
    rewards.push_back(t.r + opts.reward_shift);
  }
  const auto n = static_cast<Eigen::Index>(weights.size());
  m->weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), n);
  m->rewards = Eigen::Map<const Eigen::VectorXd>(rewards.data(), n);
  m->sample_count = m->weights.sum();

  const StateActionKernel sak{kernel, action_count};
  m->gram = gram_state_action(sak, m->anchors, m->actions, m->anchors, m->actions);
  m->H = gram(kernel, m->evolved, m->anchors);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m->terminal[static_cast<std::size_t>(i)]) m->H.row(i).setZero();
  }
  detail::factorize(*m);
  return m;
}

/// P(i, a) = pi(a | x'_i).
inline Eigen::MatrixXd policy_at_evolved(const WorldModel& m, const PolicyFn& pi) {
  Eigen::MatrixXd p(m.size(), m.action_count);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Eigen::VectorXd row = pi(m.evolved[static_cast<std::size_t>(i)]);
    check_probabilities(row, m.action_count);
    p.row(i) = row.transpose();
  }
  return p;
}

/// M = H ⊙ (P E^T), i.e. M(i, j) = H(i, j) pi(a_j | x'_i).
inline Eigen::MatrixXd policy_transfer_matrix(const WorldModel& m,
                                              const Eigen::MatrixXd& p) {
  if (p.rows() != m.size() || p.cols() != m.action_count) {
    throw ArgumentError("policy matrix has the wrong shape");
  }
  Eigen::MatrixXd out(m.size(), m.size());
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    out.col(j) = m.H.col(j).cwiseProduct(p.col(m.actions[static_cast<std::size_t>(j)]));
  }
  return out;
}

struct PowerIterationOptions {
  int max_iterations = 50;
  double tolerance = 1e-6;
};

/// Spectral radius of K_lambda^{-1} M by power iteration.
inline double spectral_radius(const WorldModel& m, const Eigen::MatrixXd& policy_transfer,
                              const PowerIterationOptions& opts = {}) {
  const auto n = m.size();
  Eigen::VectorXd v(n);
  CounterRng rng(0x706f776572ULL);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 0.5 + rng.uniform();
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd w = m.solve(policy_transfer * v);
    const double norm = w.norm();
    if (norm == 0.0 || !std::isfinite(norm)) return norm == 0.0 ? 0.0 : norm;
    const double previous = estimate;
    estimate = norm;
    v = w / norm;
    if (it > 0 && std::abs(estimate - previous) <= opts.tolerance * std::max(1.0, estimate)) {
      break;
    }
  }
  return estimate;
}

/// Spectral radius of K_lambda^{-1} M_pi for the policy with evolved-state
/// probabilities p.
inline double operator_norm_estimate(const WorldModel& m, const Eigen::MatrixXd& p,
                                     const PowerIterationOptions& opts = {}) {
  return spectral_radius(m, policy_transfer_matrix(m, p), opts);
}

/// Closed-form action-value estimate q = sum_i c_i psi(x_i, a_i).
struct QEstimate {
  WorldModelPtr model;
  Eigen::VectorXd c;
  double gamma = 0.0;
  double spectral_radius = 0.0;

  /// Constant separating shifted and raw action values, c_shift / (1 - gamma).
  double value_offset() const { return model->reward_shift / (1.0 - gamma); }

  /// sum_i c_i k(x, x_i) [a == a_i], in shifted units.
  double operator()(const State& x, int a) const {
    double s = 0.0;
    const auto& m = *model;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (m.actions[static_cast<std::size_t>(i)] == a && c(i) != 0.0) {
        s += c(i) * m.kernel(x, m.anchors[static_cast<std::size_t>(i)]);
      }
    }
    return s;
  }

  /// Action values in raw reward units.
  double raw(const State& x, int a) const { return (*this)(x, a) - value_offset(); }

  /// Values at every evolved state: H diag(c) E, an n x |A| matrix.
  Eigen::MatrixXd at_evolved() const {
    const auto& m = *model;
    Eigen::MatrixXd ce = Eigen::MatrixXd::Zero(m.size(), m.action_count);
    for (Eigen::Index i = 0; i < m.size(); ++i) ce(i, m.actions[static_cast<std::size_t>(i)]) = c(i);
    return m.H * ce;
  }
};

inline double eval_q(const QEstimate& q, const State& x, int a) { return q(x, a); }

/// Guard threshold: gamma * rho must stay below 1 - kContractionMargin.
inline constexpr double kContractionMargin = 1e-6;

/// Action-value estimate for the policy whose evolved-state probabilities
/// are p. Throws ContractionViolation if gamma * rho(K^{-1} M) >= 1 - 1e-6.
inline QEstimate estimate_q(const WorldModelPtr& model, const Eigen::MatrixXd& p,
                            double gamma, const PowerIterationOptions& power = {}) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("estimate_q: gamma must lie in [0, 1)");
  const auto& m = *model;
  QEstimate q;
  q.model = model;
  q.gamma = gamma;
  // Effective targets include the absorbing-state value on terminal rows.
  const double bonus = m.reward_shift == 0.0 ? 0.0 : gamma * m.reward_shift / (1.0 - gamma);
  Eigen::VectorXd y = m.rewards;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.terminal[static_cast<std::size_t>(i)]) y(i) += bonus;
  }
  if (gamma == 0.0) {
    q.c = m.b + bonus * m.b_terminal;
    return q;
  }
  const Eigen::MatrixXd mp = policy_transfer_matrix(m, p);
  q.spectral_radius = spectral_radius(m, mp, power);
  if (gamma * q.spectral_radius >= 1.0 - kContractionMargin) {
    throw ContractionViolation(q.spectral_radius, gamma);
  }
  Eigen::MatrixXd system = m.regularized_gram();
  system.noalias() -= gamma * mp;
  q.c = system.partialPivLu().solve(y);
  if (!q.c.allFinite()) throw NumericalError("estimate_q: non-finite coefficients");
  return q;
}

inline QEstimate estimate_q(const WorldModelPtr& model, const PolicyFn& pi, double gamma,
                            const PowerIterationOptions& power = {}) {
  return estimate_q(model, policy_at_evolved(*model, pi), gamma, power);
}

// ---------------------------------------------------------------------------
// Binary serialization. Little-endian host layout, magic + version header.

namespace detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
template <typename T>
void put(std::ostream& os, T v) {
  put_bytes(os, &v, sizeof v);
}
inline void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  put_bytes(os, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}
inline void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw ArgumentError("model file truncated");
}
template <typename T>
T get(std::istream& is) {
  T v{};
  get_bytes(is, &v, sizeof v);
  return v;
}
inline Eigen::MatrixXd get_matrix(std::istream& is) {
  const auto r = get<std::int64_t>(is);
  const auto c = get<std::int64_t>(is);
  if (r < 0 || c < 0 || r * c > (std::int64_t{1} << 32)) throw ArgumentError("model file: bad matrix shape");
  Eigen::MatrixXd m(r, c);
  get_bytes(is, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return m;
}
inline Eigen::MatrixXd stack_rows(const std::vector<State>& xs) {
  const auto dim = xs.empty() ? 0 : xs.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), dim);
  for (std::size_t i = 0; i < xs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
  return out;
}
inline std::vector<State> unstack_rows(const Eigen::MatrixXd& m) {
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

}  // namespace detail

inline constexpr char kModelMagic[8] = {'P', 'O', 'W', 'R', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(std::ostream& os, const WorldModel& m) {
  using namespace detail;
  put_bytes(os, kModelMagic, sizeof kModelMagic);
  put<std::uint32_t>(os, kModelVersion);
  put<std::int32_t>(os, static_cast<std::int32_t>(m.kernel.family));
  put<double>(os, m.kernel.sigma);
  put_matrix(os, m.kernel.length_scales);
  put<std::int32_t>(os, m.action_count);
  put<double>(os, m.lambda);
  put<double>(os, m.sample_count);
  put<double>(os, m.reward_shift);
  put_matrix(os, stack_rows(m.anchors));
  Eigen::VectorXd acts(m.size()), term(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    acts(i) = m.actions[static_cast<std::size_t>(i)];
    term(i) = m.terminal[static_cast<std::size_t>(i)];
  }
  put_matrix(os, acts);
  put_matrix(os, m.weights);
  put_matrix(os, stack_rows(m.evolved));
  put_matrix(os, term);
  put_matrix(os, m.rewards);
  put_matrix(os, m.gram);
  put_matrix(os, m.chol_lower);
  put_matrix(os, m.b);
  put_matrix(os, m.b_terminal);
  put_matrix(os, m.H);
  if (!os) throw Error("save_model: write failed");
}

inline WorldModelPtr load_model(std::istream& is) {
  using namespace detail;
  char magic[8];
  get_bytes(is, magic, sizeof magic);
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
    throw ArgumentError("load_model: not a world-model file");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kModelVersion) {
    throw ArgumentError("load_model: unsupported version " + std::to_string(version));
  }
  auto m = std::make_shared<WorldModel>();
  m->kernel.family = static_cast<KernelFamily>(get<std::int32_t>(is));
  m->kernel.sigma = get<double>(is);
  m->kernel.length_scales = get_matrix(is);
  m->action_count = get<std::int32_t>(is);
  m->lambda = get<double>(is);
  m->sample_count = get<double>(is);
  m->reward_shift = get<double>(is);
  m->anchors = unstack_rows(get_matrix(is));
  const Eigen::VectorXd acts = get_matrix(is);
  m->weights = get_matrix(is);
  m->evolved = unstack_rows(get_matrix(is));
  const Eigen::VectorXd term = get_matrix(is);
  m->rewards = get_matrix(is);
  m->gram = get_matrix(is);
  m->chol_lower = get_matrix(is);
  m->b = get_matrix(is);
  m->b_terminal = get_matrix(is);
  m->H = get_matrix(is);
  for (Eigen::Index i = 0; i < acts.size(); ++i) {
    m->actions.push_back(static_cast<int>(acts(i)));
    m->terminal.push_back(term(i) != 0.0 ? 1 : 0);
  }
  const auto n = m->size();
  if (static_cast<Eigen::Index>(m->actions.size()) != n || m->weights.size() != n ||
      static_cast<Eigen::Index>(m->evolved.size()) != n || m->rewards.size() != n ||
      m->gram.rows() != n || m->chol_lower.rows() != n || m->H.rows() != n) {
    throw ArgumentError("load_model: inconsistent sizes");
  }
  return m;
}

}  // namespace powr
