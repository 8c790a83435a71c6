/* Copyright 2026 The bszo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bszo/posterior.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace bszo {

PosteriorState init_posterior(Eigen::Index k, double sigma_p2, double sigma_e2_init,
                              double alpha) {
  if (k <= 0) throw std::invalid_argument("init_posterior: k must be positive");
  if (!(sigma_p2 > 0.0) || !(sigma_e2_init > 0.0)) {
    throw std::invalid_argument("init_posterior: variances must be positive");
  }
  if (!(alpha >= 0.0) || alpha >= 1.0) {
    throw std::invalid_argument("init_posterior: alpha must lie in [0, 1)");
  }
  PosteriorState state;
  state.mu = Eigen::VectorXd::Zero(k);
  state.sigma = sigma_p2 * Eigen::MatrixXd::Identity(k, k);
  state.sigma_e2 = sigma_e2_init;
  state.sigma_p2 = sigma_p2;
  state.alpha = alpha;
  return state;
}

void kalman_update(PosteriorState& state, const Observation& obs) {
  if (obs.d.size() != state.k()) {
    throw std::invalid_argument("kalman_update: direction dimension mismatch");
  }
  const Eigen::VectorXd sd = state.sigma * obs.d;
  const double denom = obs.d.dot(sd) + state.sigma_e2;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw std::runtime_error("kalman_update: degenerate innovation variance");
  }
  const Eigen::VectorXd gain = sd / denom;
  state.mu += gain * (obs.y - obs.d.dot(state.mu));
  state.sigma -= gain * sd.transpose();
  // Rank-1 downdates drift off symmetry over thousands of steps.
  state.sigma = 0.5 * (state.sigma + state.sigma.transpose()).eval();
}

void residual_update(PosteriorState& state, const Observation& obs) {
  const double dnorm = obs.d.norm();
  if (!(dnorm > 0.0)) throw std::invalid_argument("residual_update: zero direction");
  const double r = (obs.y - obs.d.dot(state.mu)) / dnorm;
  state.sigma_e2 = (1.0 - state.alpha) * state.sigma_e2 + state.alpha * r * r;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> batch_posterior(const Eigen::MatrixXd& D,
                                                            const Eigen::VectorXd& y,
                                                            double sigma_p2,
                                                            const Eigen::VectorXd& r_diag) {
  if (!(sigma_p2 > 0.0)) throw std::invalid_argument("batch_posterior: sigma_p2 must be positive");
  if (D.rows() != y.size() || D.rows() != r_diag.size()) {
    throw std::invalid_argument("batch_posterior: row count mismatch");
  }
  const Eigen::Index k = D.cols();
  if ((r_diag.array() <= 0.0).any()) {
    throw std::invalid_argument("batch_posterior: noise variances must be positive");
  }
  Eigen::MatrixXd precision = (1.0 / sigma_p2) * Eigen::MatrixXd::Identity(k, k);
  precision.noalias() += D.transpose() * r_diag.cwiseInverse().asDiagonal() * D;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("batch_posterior: normal matrix not positive definite");
  }
  Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(k, k));
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  const Eigen::VectorXd rhs = D.transpose() * (y.array() / r_diag.array()).matrix();
  return {sigma * rhs, sigma};
}

Eigen::Index max_uncertainty_axis(const PosteriorState& state) {
  Eigen::Index best = 0;
  double best_val = state.sigma(0, 0);
  for (Eigen::Index i = 1; i < state.k(); ++i) {
    if (state.sigma(i, i) > best_val) {
      best_val = state.sigma(i, i);
      best = i;
    }
  }
  return best;
}

PrincipalEigenvector principal_eigenvector(const Eigen::MatrixXd& sigma) {
  constexpr double kTol = 1e-8;
  constexpr int kMaxIter = 200;
  const Eigen::Index k = sigma.rows();

  Eigen::VectorXd v = Eigen::VectorXd::Unit(k, 0);
  Eigen::VectorXd w = sigma * v;
  if (w.norm() == 0.0) {
    // e1 lies in the null space; retry from the all-ones direction.
    v = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
    w = sigma * v;
    if (w.norm() == 0.0) return {Eigen::VectorXd::Unit(k, 0), true};
  }

  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd next = w / w.norm();
    if (next.dot(v) < 0.0) next = -next;
    const double shift = (next - v).norm();
    v = next;
    w = sigma * v;
    if (w.norm() == 0.0) return {Eigen::VectorXd::Unit(k, 0), true};
    if (shift <= kTol) break;
  }

  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
  return {v, false};
}

double shrinkage_factor(double sigma_p2, double sigma_e2) {
  if (!(sigma_p2 > 0.0) || !(sigma_e2 > 0.0)) {
    throw std::invalid_argument("shrinkage_factor: inputs must be positive");
  }
  return sigma_p2 / (sigma_p2 + sigma_e2);
}

double effective_shrinkage(const PosteriorState& state) {
  return 1.0 - state.sigma.trace() / (static_cast<double>(state.k()) * state.sigma_p2);
}

}  // namespace bszo
