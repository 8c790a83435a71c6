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

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>

namespace bszo {

/// Gaussian belief over the normalized subspace gradient.
///
/// `mu` / `sigma` are the posterior mean and covariance in the k-dimensional
/// subspace; `sigma_e2` is the current observation-noise variance, updated by
/// an exponential moving average of squared prediction residuals; `sigma_p2`
/// and `alpha` are the prior variance and the EMA smoothing factor.
///
/// Invariants maintained by the update operations:
///  - sigma stays symmetric PSD (re-symmetrized after every rank-1 update),
///  - no eigenvalue of sigma exceeds sigma_p2,
///  - sigma_e2 > 0.
struct PosteriorState {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double sigma_e2 = 1.0;
  double sigma_p2 = 1.0;
  double alpha = 0.3;

  Eigen::Index k() const { return mu.size(); }
};

/// One noisy linear measurement of the subspace gradient: direction d and
/// measured one-sided difference y. Requires ||d|| > 0 and finite y.
struct Observation {
  Eigen::VectorXd d;
  double y = 0.0;
};

/// mu = 0, sigma = sigma_p2 * I_k. alpha may be 0, which disables residual
/// adaptation (used by the fixed-noise analyses). Throws std::invalid_argument
/// for k == 0, nonpositive variances, or alpha outside [0, 1).
PosteriorState init_posterior(Eigen::Index k, double sigma_p2, double sigma_e2_init, double alpha);

/// Rank-1 conditioning on one observation:
///   K = sigma d / (d' sigma d + sigma_e2)
///   mu += K (y - d' mu),  sigma -= K d' sigma   (then re-symmetrized).
/// Throws std::runtime_error when d' sigma d + sigma_e2 is not positive.
void kalman_update(PosteriorState& state, const Observation& obs);

/// EMA adaptation of the noise variance from the normalized residual
///   r = (y - d' mu) / ||d||,  sigma_e2 <- (1 - alpha) sigma_e2 + alpha r^2.
/// mu and sigma are untouched. Throws std::invalid_argument when ||d|| == 0.
void residual_update(PosteriorState& state, const Observation& obs);

/// Closed-form batch posterior for design matrix D (m x k, one observation
/// per row), observations y (length m), prior variance sigma_p2 and diagonal
/// observation-noise covariance r_diag (length m, entries > 0):
///   sigma = (sigma_p2^-1 I + D' R^-1 D)^-1,  mu = sigma D' R^-1 y.
/// m = 0 returns the prior. Serves as the oracle for sequential conditioning.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> batch_posterior(const Eigen::MatrixXd& D,
                                                            const Eigen::VectorXd& y,
                                                            double sigma_p2,
                                                            const Eigen::VectorXd& r_diag);

/// Index (0-based) of the largest diagonal entry of sigma; ties resolve to
/// the lowest index so runs stay reproducible.
Eigen::Index max_uncertainty_axis(const PosteriorState& state);

struct PrincipalEigenvector {
  Eigen::VectorXd v;       // unit norm; largest-magnitude entry positive
  bool degenerate = false; // true when sigma is (numerically) zero
};

/// Dominant eigenvector of a symmetric PSD matrix by power iteration
/// (relative tolerance 1e-8, at most 200 iterations, deterministic start e1,
/// falling back to the normalized all-ones vector if e1 is annihilated).
/// A zero matrix yields e1 with the degenerate flag set.
PrincipalEigenvector principal_eigenvector(const Eigen::MatrixXd& sigma);

/// gamma = sigma_p2 / (sigma_p2 + sigma_e2), in (0, 1).
/// Throws std::invalid_argument unless both inputs are positive.
double shrinkage_factor(double sigma_p2, double sigma_e2);

/// Effective shrinkage 1 - tr(sigma) / (k sigma_p2); equals gamma after k
/// coordinate-axis updates at fixed noise.
double effective_shrinkage(const PosteriorState& state);

}  // namespace bszo
