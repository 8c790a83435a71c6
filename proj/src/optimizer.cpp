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

#include "bszo/optimizer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bszo/rng.hpp"

namespace bszo {

namespace {

Eigen::VectorXd unit_direction(int k, Eigen::Index axis) {
  return Eigen::VectorXd::Unit(k, axis);
}

std::uint64_t probe_jitter_seed(std::uint64_t step_seed, int eval_index) {
  return rng::derive(step_seed, rng::Stream::jitter, static_cast<std::uint64_t>(eval_index));
}

double evaluate_base(const Objective& obj, const ParameterVector& theta, MinibatchId batch,
                     std::uint64_t step_seed) {
  const double f0 = obj.evaluate(theta, batch, probe_jitter_seed(step_seed, 0));
  if (!std::isfinite(f0)) {
    throw EvaluationError("base loss evaluation returned a non-finite value");
  }
  return f0;
}

}  // namespace

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("config: eta must be positive");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
  if (cfg.max_steps < 1) throw std::invalid_argument("config: max_steps must be positive");
  if (cfg.early_stop_patience < 0) {
    throw std::invalid_argument("config: early_stop_patience must be nonnegative");
  }
  if (cfg.variant == Variant::mezo) return;  // k, m and the Bayesian fields are ignored
  if (cfg.k < 1) throw std::invalid_argument("config: k must be positive");
  if (cfg.m < cfg.k) throw std::invalid_argument("config: m must be at least k");
  if (!(cfg.sigma_p2 > 0.0) || !(cfg.sigma_e2_init > 0.0)) {
    throw std::invalid_argument("config: variances must be positive");
  }
  if (!(cfg.alpha >= 0.0) || cfg.alpha >= 1.0) {
    throw std::invalid_argument("config: alpha must lie in [0, 1)");
  }
}

std::vector<PerturbationSeed> direction_seeds(std::uint64_t step_seed, int k) {
  std::vector<PerturbationSeed> seeds(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    seeds[static_cast<std::size_t>(i)].seed =
        rng::derive(step_seed, rng::Stream::perturbation, static_cast<std::uint64_t>(i));
  }
  return seeds;
}

std::uint64_t step_seed_for(std::uint64_t run_seed, std::int64_t step) {
  return rng::derive(run_seed, rng::Stream::step, static_cast<std::uint64_t>(step));
}

double one_sided_difference(const Objective& obj, ParameterVector& theta,
                            std::span<const PerturbationSeed> seeds, const Eigen::VectorXd& d,
                            double epsilon, double f0, MinibatchId batch,
                            std::uint64_t jitter_seed) {
  if (static_cast<std::size_t>(d.size()) != seeds.size()) {
    throw std::invalid_argument("one_sided_difference: direction/seed size mismatch");
  }
  if (d.cwiseAbs().maxCoeff() <= kCoeffSkipThreshold) return 0.0;

  const std::span<const double> coeffs(d.data(), static_cast<std::size_t>(d.size()));
  apply_scaled_perturbations(theta, seeds, coeffs, epsilon);
  double loss = 0.0;
  try {
    loss = obj.evaluate(theta, batch, jitter_seed);
  } catch (...) {
    apply_scaled_perturbations(theta, seeds, coeffs, -epsilon);
    throw;
  }
  apply_scaled_perturbations(theta, seeds, coeffs, -epsilon);
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "perturbed loss non-finite (epsilon=" << epsilon << ", d=[";
    for (Eigen::Index i = 0; i < d.size(); ++i) msg << (i ? "," : "") << d(i);
    msg << "])";
    throw EvaluationError(msg.str());
  }
  return (loss - f0) / epsilon;
}

double apply_update(ParameterVector& theta, std::span<const PerturbationSeed> seeds,
                    const Eigen::VectorXd& mu, double eta) {
  if (static_cast<std::size_t>(mu.size()) != seeds.size()) {
    throw std::invalid_argument("apply_update: mu/seed size mismatch");
  }
  if (!mu.allFinite()) throw std::invalid_argument("apply_update: non-finite posterior mean");
  const std::span<const double> coeffs(mu.data(), static_cast<std::size_t>(mu.size()));
  return apply_scaled_perturbations_norm(theta, seeds, coeffs, -eta);
}

StepReport bszo_step(const Objective& obj, ParameterVector& theta, const OptimizerConfig& cfg,
                     std::uint64_t step_seed, MinibatchId batch, double sigma_e2_current) {
  validate(cfg);
  const int k = cfg.k;
  const std::vector<PerturbationSeed> seeds = direction_seeds(step_seed, k);
  PosteriorState post = init_posterior(k, cfg.sigma_p2, sigma_e2_current, cfg.alpha);

  StepReport report;
  report.loss_f0 = evaluate_base(obj, theta, batch, step_seed);
  report.forward_passes = 1;
  report.observations.reserve(static_cast<std::size_t>(cfg.m));

  std::vector<double> cache(static_cast<std::size_t>(k), 0.0);
  Observation last;
  for (int tau = 1; tau <= cfg.m; ++tau) {
    Observation obs;
    if (tau <= k) {
      obs.d = unit_direction(k, tau - 1);
      obs.y = one_sided_difference(obj, theta, seeds, obs.d, cfg.epsilon, report.loss_f0, batch,
                                   probe_jitter_seed(step_seed, tau));
      ++report.forward_passes;
      cache[static_cast<std::size_t>(tau - 1)] = obs.y;
    } else {
      // Adapt the noise from the previous probe's residual, then recondition
      // on the cached value along the axis of largest remaining uncertainty.
      residual_update(post, last);
      const Eigen::Index axis = max_uncertainty_axis(post);
      obs.d = unit_direction(k, axis);
      obs.y = cache[static_cast<std::size_t>(axis)];
    }
    kalman_update(post, obs);
    last = obs;
    report.observations.push_back(std::move(obs));
  }

  report.update_norm = apply_update(theta, seeds, post.mu, cfg.eta);
  report.mu_final = std::move(post.mu);
  report.sigma_e2_final = post.sigma_e2;
  report.gamma_eff = 1.0 - post.sigma.trace() / (static_cast<double>(k) * cfg.sigma_p2);
  return report;
}

StepReport bszo_b_step(const Objective& obj, ParameterVector& theta, const OptimizerConfig& cfg,
                       std::uint64_t step_seed, MinibatchId batch, double sigma_e2_current) {
  validate(cfg);
  const int k = cfg.k;
  const std::vector<PerturbationSeed> seeds = direction_seeds(step_seed, k);
  PosteriorState post = init_posterior(k, cfg.sigma_p2, sigma_e2_current, cfg.alpha);

  StepReport report;
  report.loss_f0 = evaluate_base(obj, theta, batch, step_seed);
  report.forward_passes = 1;
  report.observations.reserve(static_cast<std::size_t>(cfg.m));

  for (int tau = 1; tau <= cfg.m; ++tau) {
    Observation obs;
    obs.d = tau <= k ? unit_direction(k, tau - 1) : principal_eigenvector(post.sigma).v;
    obs.y = one_sided_difference(obj, theta, seeds, obs.d, cfg.epsilon, report.loss_f0, batch,
                                 probe_jitter_seed(step_seed, tau));
    ++report.forward_passes;
    residual_update(post, obs);
    kalman_update(post, obs);
    report.observations.push_back(std::move(obs));
  }

  report.update_norm = apply_update(theta, seeds, post.mu, cfg.eta);
  report.mu_final = std::move(post.mu);
  report.sigma_e2_final = post.sigma_e2;
  report.gamma_eff = 1.0 - post.sigma.trace() / (static_cast<double>(k) * cfg.sigma_p2);
  return report;
}

StepReport mezo_step(const Objective& obj, ParameterVector& theta, const OptimizerConfig& cfg,
                     std::uint64_t step_seed, MinibatchId batch, double sigma_e2_current) {
  validate(cfg);
  const std::vector<PerturbationSeed> seeds = direction_seeds(step_seed, 1);
  const std::array<double, 1> one{1.0};

  apply_scaled_perturbations(theta, seeds, one, cfg.epsilon);
  double loss_plus = 0.0;
  try {
    loss_plus = obj.evaluate(theta, batch, probe_jitter_seed(step_seed, 0));
  } catch (...) {
    apply_scaled_perturbations(theta, seeds, one, -cfg.epsilon);
    throw;
  }
  if (!std::isfinite(loss_plus)) {
    apply_scaled_perturbations(theta, seeds, one, -cfg.epsilon);
    throw EvaluationError("mezo_step: loss at theta + epsilon z non-finite");
  }

  apply_scaled_perturbations(theta, seeds, one, -2.0 * cfg.epsilon);
  double loss_minus = 0.0;
  try {
    loss_minus = obj.evaluate(theta, batch, probe_jitter_seed(step_seed, 1));
  } catch (...) {
    apply_scaled_perturbations(theta, seeds, one, cfg.epsilon);
    throw;
  }
  apply_scaled_perturbations(theta, seeds, one, cfg.epsilon);
  if (!std::isfinite(loss_minus)) {
    throw EvaluationError("mezo_step: loss at theta - epsilon z non-finite");
  }

  const double grad_proj = (loss_plus - loss_minus) / (2.0 * cfg.epsilon);
  Eigen::VectorXd mu(1);
  mu(0) = grad_proj;

  StepReport report;
  report.loss_f0 = 0.5 * (loss_plus + loss_minus);
  report.forward_passes = 2;
  report.update_norm = apply_update(theta, seeds, mu, cfg.eta);
  report.mu_final = std::move(mu);
  report.sigma_e2_final = sigma_e2_current;
  report.gamma_eff = 1.0;  // no posterior shrinkage in the baseline
  return report;
}

StepReport optimizer_step(const Objective& obj, ParameterVector& theta,
                          const OptimizerConfig& cfg, std::uint64_t step_seed, MinibatchId batch,
                          double sigma_e2_current) {
  switch (cfg.variant) {
    case Variant::bszo:
      return bszo_step(obj, theta, cfg, step_seed, batch, sigma_e2_current);
    case Variant::bszo_b:
      return bszo_b_step(obj, theta, cfg, step_seed, batch, sigma_e2_current);
    case Variant::mezo:
      return mezo_step(obj, theta, cfg, step_seed, batch, sigma_e2_current);
  }
  throw std::logic_error("optimizer_step: unknown variant");
}

}  // namespace bszo
