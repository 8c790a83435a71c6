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

#include <atomic>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bszo {

enum class Precision { fp64, fp32, bf16, fp16 };

struct QuantizeResult {
  double value = 0.0;
  bool overflow = false;
};

/// Round-to-nearest-even into the target format's value set (normals and
/// subnormals), returned widened to fp64. Values past the largest finite
/// magnitude saturate to +/-Inf with the overflow flag set. fp64 is identity.
QuantizeResult quantize(double value, Precision precision);

/// Identifies a minibatch; the index seeds the batch's gradient-noise draw,
/// so the same id always realizes the same noise.
struct MinibatchId {
  std::int64_t index = 0;
};

enum class ObjectiveKind { quadratic, rosenbrock, logistic };

/// Synthetic binary-classification data; features row-major (samples x n).
struct LogisticData {
  std::size_t n = 0;
  std::vector<double> features;
  std::vector<int> labels;  // +1 / -1

  std::size_t samples() const { return n == 0 ? 0 : features.size() / n; }
};

LogisticData make_synthetic_logistic(std::size_t n, std::size_t samples, std::uint64_t seed);
void dump_logistic_csv(const LogisticData& data, const std::string& path);
LogisticData load_logistic_csv(const std::string& path);

/// Stochastic loss oracle L(theta; xi).
///
/// The minibatch realization is an additive linear term zeta' theta with
/// zeta ~ N(0, diag(noise_cov)) drawn from the batch id, so the stochastic
/// gradient is exactly grad L(theta) + zeta and the configured trace of the
/// noise covariance is exact. On top of the clean loss, evaluate() adds the
/// batch term, adds N(0, jitter_std^2) keyed by the jitter seed, then rounds
/// the value to the configured precision.
///
/// evaluate() is pure given (theta, batch, jitter_seed); instances are
/// immutable after construction apart from the evaluation counter and the
/// sticky overflow flag, both of which are thread-safe instrumentation.
class Objective {
 public:
  /// 0.5 theta' diag(a) theta - b' theta.
  static Objective quadratic(std::vector<double> a_diag, std::vector<double> b);
  /// Quadratic with A = a * I, b = 0.
  static Objective isotropic_quadratic(std::size_t n, double a = 1.0);
  static Objective rosenbrock(std::size_t n);
  static Objective logistic(LogisticData data);

  ObjectiveKind kind() const { return kind_; }
  std::size_t dimension() const { return n_; }

  /// Uniform diagonal noise covariance with the given trace.
  void set_noise_trace(double trace, std::uint64_t noise_seed);
  void set_noise_covariance(std::vector<double> cov_diag, std::uint64_t noise_seed);
  void set_precision(Precision precision) { precision_ = precision; }
  void set_jitter(double jitter_std);

  double evaluate(std::span<const double> theta, MinibatchId batch,
                  std::uint64_t jitter_seed) const;

  /// Clean full-precision loss: no batch noise, no jitter, no quantization.
  /// Not counted as an optimizer forward pass.
  double clean_loss(std::span<const double> theta) const;

  /// Exact gradient of the clean loss in fp64.
  std::vector<double> true_gradient(std::span<const double> theta) const;

  /// The batch's realized gradient-noise vector zeta (diagnostic surface).
  std::vector<double> gradient_noise_at(MinibatchId batch) const;

  double noise_trace() const;
  /// Minimum of the clean loss (quadratic and rosenbrock only).
  double optimal_value() const;
  /// Largest curvature of the quadratic (smoothness constant L).
  double smoothness() const;

  std::int64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }
  void reset_evaluations() { evaluations_.store(0, std::memory_order_relaxed); }
  bool overflowed() const { return overflowed_.load(std::memory_order_relaxed); }

  Objective(const Objective& other);
  Objective& operator=(const Objective& other);
  Objective(Objective&&) noexcept = default;
  Objective& operator=(Objective&&) noexcept = default;

 private:
  Objective() = default;

  double clean_loss_unchecked(std::span<const double> theta) const;
  double noise_term(std::span<const double> theta, MinibatchId batch) const;

  ObjectiveKind kind_ = ObjectiveKind::quadratic;
  std::size_t n_ = 0;
  std::vector<double> a_diag_;
  std::vector<double> b_;
  LogisticData logistic_;
  std::vector<double> noise_cov_;  // empty means noiseless
  std::uint64_t noise_seed_ = 0;
  Precision precision_ = Precision::fp64;
  double jitter_std_ = 0.0;

  mutable std::atomic<std::int64_t> evaluations_{0};
  mutable std::atomic<bool> overflowed_{false};
};

/// Raised when a loss evaluation comes back non-finite; carries a description
/// of the perturbed state that produced it.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bszo
