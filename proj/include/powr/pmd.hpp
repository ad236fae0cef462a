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

// Softmax policy mirror descent on top of a fitted world model.
//
// The policy after t steps is pi_t(.|x) = softmax(eta H_x C_t) with
// H_x = (k(x, x_i))_i and C_t the n x |A| matrix of accumulated
// action-value coefficients, so that eta H_x C_t = eta sum_s q_s(x, .).
// Each step evaluates pi at the evolved states, estimates q for it and
// scatter-adds its coefficients into C: C(i, a_i) += c_i.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "powr/errors.hpp"
#include "powr/worldmodel.hpp"

namespace powr {

/// Numerically stable softmax; throws NumericalError on NaN input.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  if (logits.hasNaN()) throw NumericalError("softmax: NaN logit");
  const double top = logits.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("softmax: non-finite logit");
  Eigen::VectorXd w = (logits.array() - top).exp();
  return w / w.sum();
}

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    out.row(i) = softmax(logits.row(i).transpose()).transpose();
  }
  return out;
}

struct PolicyWeights {
  WorldModelPtr model;
  Eigen::MatrixXd C;  // n x |A|
  double eta = 1.0;
  int t = 0;

  static PolicyWeights zeros(WorldModelPtr model, double eta) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ArgumentError("eta must be non-negative");
    PolicyWeights w;
    w.C = Eigen::MatrixXd::Zero(model->size(), model->action_count);
    w.model = std::move(model);
    w.eta = eta;
    return w;
  }

  Eigen::VectorXd logits(const State& x) const {
    return eta * (model->kernel_row(x) * C).transpose();
  }

  /// eta H C: logits at every evolved state.
  Eigen::MatrixXd logits_at_evolved() const { return eta * (model->H * C); }
};

class SoftmaxPolicy {
 public:
  SoftmaxPolicy() = default;
  explicit SoftmaxPolicy(PolicyWeights w) : weights_(std::move(w)) {}

  const PolicyWeights& weights() const { return weights_; }

  Eigen::VectorXd probs(const State& x) const {
    if (weights_.C.hasNaN()) throw NumericalError("policy weights contain NaN");
    return softmax(weights_.logits(x));
  }

  /// pi(.|x'_i) for every evolved state, from eta H C.
  Eigen::MatrixXd probs_at_evolved() const {
    if (weights_.C.hasNaN()) throw NumericalError("policy weights contain NaN");
    return softmax_rows(weights_.logits_at_evolved());
  }

  PolicyFn as_fn() const {
    return [self = *this](const State& x) { return self.probs(x); };
  }

 private:
  PolicyWeights weights_;
};

inline Eigen::VectorXd policy_probs(const SoftmaxPolicy& pi, const State& x) {
  return pi.probs(x);
}

struct PmdDiagnostics {
  int t = 0;                    // index of the policy whose q was estimated
  double c_inf = 0.0;           // |c|_inf
  double spectral_radius = 0.0; // rho(K^{-1} M)
  std::optional<double> epsilon;
  double wall_seconds = 0.0;
  double lambda = 0.0;
  double logit_spread = 0.0;    // max over evolved states of max - min logit
  bool saturated = false;       // logit_spread > kSaturationSpread
};

inline constexpr double kSaturationSpread = 30.0;

struct PmdStep {
  PolicyWeights next;
  QEstimate q;
  Eigen::MatrixXd evaluated;  // P used to build M
  PmdDiagnostics diagnostics;
};

/// One mirror-descent step: evaluate pi = softmax(eta H C) at the evolved
/// states, estimate its q and add the coefficients into C.
inline PmdStep pmd_step(const PolicyWeights& w, double gamma,
                        const PowerIterationOptions& power = {}) {
  if (w.C.rows() != w.model->size() || w.C.cols() != w.model->action_count) {
    throw ArgumentError("pmd_step: weights do not match the world model");
  }
  const auto start = std::chrono::steady_clock::now();
  PmdStep out;
  const Eigen::MatrixXd logits = w.logits_at_evolved();
  out.evaluated = softmax_rows(logits);
  out.q = estimate_q(w.model, out.evaluated, gamma, power);
  out.next = w;
  const auto& m = *w.model;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out.next.C(i, m.actions[static_cast<std::size_t>(i)]) += out.q.c(i);
  }
  out.next.t = w.t + 1;
  auto& d = out.diagnostics;
  d.t = w.t;
  d.c_inf = out.q.c.size() ? out.q.c.lpNorm<Eigen::Infinity>() : 0.0;
  d.spectral_radius = out.q.spectral_radius;
  d.lambda = m.lambda;
  d.logit_spread = logits.size() ? (logits.rowwise().maxCoeff() - logits.rowwise().minCoeff()).maxCoeff() : 0.0;
  d.saturated = d.logit_spread > kSaturationSpread;
  d.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

struct RunPmdOptions {
  std::optional<Eigen::MatrixXd> initial_weights;
  // Called with each q estimate and the policy it evaluates; the return
  // value is logged as epsilon_t.
  std::function<double(const QEstimate&, const SoftmaxPolicy&)> epsilon;
  // Called after every step with the updated weights.
  std::function<void(const PmdStep&)> on_step;
  int max_refits = 3;
  double refit_factor = 10.0;
  PowerIterationOptions power;
};

struct PmdRun {
  SoftmaxPolicy policy;
  std::vector<PmdDiagnostics> diagnostics;
  WorldModelPtr model;  // differs from the input when lambda was raised
};

/// T mirror-descent steps from C_0 (zero unless initial weights are given).
/// On a contraction violation lambda is raised tenfold and the step is
/// retried, at most `max_refits` times per step.
inline PmdRun run_pmd(WorldModelPtr model, double gamma, double eta, int iterations,
                      const RunPmdOptions& opts = {}) {
  if (iterations < 0) throw ArgumentError("run_pmd: negative iteration count");
  auto w = PolicyWeights::zeros(model, eta);
  if (opts.initial_weights) {
    if (opts.initial_weights->rows() != w.C.rows() || opts.initial_weights->cols() != w.C.cols()) {
      throw ArgumentError("run_pmd: initial weights have the wrong shape");
    }
    w.C = *opts.initial_weights;
  }
  PmdRun run;
  for (int t = 0; t < iterations; ++t) {
    int refits = 0;
    for (;;) {
      try {
        auto step = pmd_step(w, gamma, opts.power);
        if (opts.epsilon) step.diagnostics.epsilon = opts.epsilon(step.q, SoftmaxPolicy(w));
        if (opts.on_step) opts.on_step(step);
        run.diagnostics.push_back(step.diagnostics);
        w = std::move(step.next);
        break;
      } catch (const ContractionViolation&) {
        if (refits++ >= opts.max_refits) throw;
        model = model->with_lambda(model->lambda * opts.refit_factor);
        w.model = model;
      }
    }
  }
  run.model = w.model;
  run.policy = SoftmaxPolicy(std::move(w));
  return run;
}

// ---------------------------------------------------------------------------
// Policy files: world model followed by eta, t and C.

inline constexpr char kPolicyMagic[8] = {'P', 'O', 'W', 'R', 'P', 'O', 'L', '\0'};

inline void save_policy(std::ostream& os, const SoftmaxPolicy& pi) {
  const auto& w = pi.weights();
  detail::put_bytes(os, kPolicyMagic, sizeof kPolicyMagic);
  save_model(os, *w.model);
  detail::put<double>(os, w.eta);
  detail::put<std::int32_t>(os, w.t);
  detail::put_matrix(os, w.C);
  if (!os) throw Error("save_policy: write failed");
}

inline SoftmaxPolicy load_policy(std::istream& is) {
  char magic[8];
  detail::get_bytes(is, magic, sizeof magic);
  if (std::memcmp(magic, kPolicyMagic, sizeof magic) != 0) {
    throw ArgumentError("load_policy: not a policy file");
  }
  PolicyWeights w;
  w.model = load_model(is);
  w.eta = detail::get<double>(is);
  w.t = detail::get<std::int32_t>(is);
  w.C = detail::get_matrix(is);
  if (w.C.rows() != w.model->size() || w.C.cols() != w.model->action_count) {
    throw ArgumentError("load_policy: weights do not match the model");
  }
  return SoftmaxPolicy(std::move(w));
}

}  // namespace powr
