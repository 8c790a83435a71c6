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

#include <cstdint>
#include <span>
#include <vector>

#include "bszo/objective.hpp"
#include "bszo/perturb.hpp"
#include "bszo/posterior.hpp"

namespace bszo {

enum class Variant { bszo, bszo_b, mezo };

struct OptimizerConfig {
  Variant variant = Variant::bszo;
  double eta = 1e-3;
  double epsilon = 1e-4;
  int k = 2;
  int m = 3;  // sampling steps per iteration; m >= k for the subspace variants
  double sigma_p2 = 1.0;
  double sigma_e2_init = 1.0;
  double alpha = 0.3;
  std::int64_t max_steps = 1000;
  int early_stop_patience = 8;
};

/// Per-step trace. forward_passes counts loss evaluations made by the step:
/// k+1 for the cached variant, m+1 for the basic variant, 2 for the
/// central-difference baseline.
struct StepReport {
  std::int64_t step = 0;
  double loss_f0 = 0.0;
  std::vector<Observation> observations;
  Eigen::VectorXd mu_final;
  double sigma_e2_final = 0.0;
  int forward_passes = 0;
  double update_norm = 0.0;
  double gamma_eff = 1.0;
};

void validate(const OptimizerConfig& cfg);

/// Per-step perturbation seeds, derived from (step_seed, direction index) so
/// any step is replayable in isolation. step_seed itself comes from
/// step_seed_for(run_seed, step).
std::vector<PerturbationSeed> direction_seeds(std::uint64_t step_seed, int k);
std::uint64_t step_seed_for(std::uint64_t run_seed, std::int64_t step);

/// One-sided difference (L(theta + epsilon * B d) - f0) / epsilon, evaluated
/// on the same minibatch that produced f0. theta is perturbed in place and
/// restored before returning (also on error). A direction with all entries
/// under the skip threshold returns 0 without touching theta or the oracle.
/// Throws EvaluationError when the perturbed loss is non-finite.
double one_sided_difference(const Objective& obj, ParameterVector& theta,
                            std::span<const PerturbationSeed> seeds, const Eigen::VectorXd& d,
                            double epsilon, double f0, MinibatchId batch,
                            std::uint64_t jitter_seed);

/// theta -= eta * sum_i mu[i] * z_i via streamed regeneration; returns the
/// 2-norm of the applied update. Throws std::invalid_argument on non-finite mu.
double apply_update(ParameterVector& theta, std::span<const PerturbationSeed> seeds,
                    const Eigen::VectorXd& mu, double eta);

/// Cached BSZO step: k coordinate-axis probes fill the directional-derivative
/// cache; the remaining m-k rounds adapt the noise from the previous probe's
/// residual, pick the axis of largest posterior variance, and recondition on
/// the cached value without a new forward pass. sigma_e2_current is the noise
/// variance carried over from the previous step (it is the only state that
/// survives across steps). On error theta is restored to its entry value.
StepReport bszo_step(const Objective& obj, ParameterVector& theta, const OptimizerConfig& cfg,
                     std::uint64_t step_seed, MinibatchId batch, double sigma_e2_current);

/// Basic (uncached) variant: every round runs a real forward pass, rounds
/// past k probe the principal eigenvector of the posterior covariance, and
/// the residual adaptation runs on every observation before conditioning.
StepReport bszo_b_step(const Objective& obj, ParameterVector& theta, const OptimizerConfig& cfg,
                       std::uint64_t step_seed, MinibatchId batch, double sigma_e2_current);

/// SPSA-style baseline: central difference along a single seeded direction,
/// two forward passes per step. loss_f0 reports the average of the two
/// evaluations since the base point itself is never evaluated.
StepReport mezo_step(const Objective& obj, ParameterVector& theta, const OptimizerConfig& cfg,
                     std::uint64_t step_seed, MinibatchId batch, double sigma_e2_current);

/// Dispatch on cfg.variant.
StepReport optimizer_step(const Objective& obj, ParameterVector& theta,
                          const OptimizerConfig& cfg, std::uint64_t step_seed, MinibatchId batch,
                          double sigma_e2_current);

}  // namespace bszo
