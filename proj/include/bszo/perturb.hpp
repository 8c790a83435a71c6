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

namespace bszo {

/// Identifies one regenerable n-dimensional standard-normal vector.
/// The same (seed, n) pair yields bit-identical vectors within a process and
/// across runs of the same build, independent of thread count.
struct PerturbationSeed {
  std::uint64_t seed = 0;
};

using ParameterVector = std::vector<double>;

// Coefficients with |c| at or below this threshold are skipped outright:
// no generator draw, no add. Directions may be negative, so the guard is on
// the absolute value.
inline constexpr double kCoeffSkipThreshold = 1e-10;

/// Materializes the n-dimensional standard-normal vector for `seed`.
/// Throws std::invalid_argument when n == 0.
std::vector<double> gaussian_vector(PerturbationSeed seed, std::size_t n);

/// theta += scale * sum_i coeffs[i] * gaussian_vector(seeds[i], n), streamed;
/// no second length-n buffer is allocated. Throws std::invalid_argument on
/// size mismatch or non-finite coeffs/scale.
void apply_scaled_perturbations(ParameterVector& theta, std::span<const PerturbationSeed> seeds,
                                std::span<const double> coeffs, double scale);

/// Same update, returning the 2-norm of the applied increment (used for
/// update-size traces). Skipped coefficients contribute nothing.
double apply_scaled_perturbations_norm(ParameterVector& theta,
                                       std::span<const PerturbationSeed> seeds,
                                       std::span<const double> coeffs, double scale);

/// True when every entry is finite.
bool all_finite(std::span<const double> values);

}  // namespace bszo
