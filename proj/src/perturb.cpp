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

#include "bszo/perturb.hpp"

#include <cmath>
#include <stdexcept>

#include "bszo/kernels.hpp"
#include "bszo/rng.hpp"

namespace bszo {

namespace {

struct ActiveSet {
  std::vector<std::uint64_t> seeds;
  std::vector<double> coeffs;
};

ActiveSet filter_active(std::span<const PerturbationSeed> seeds, std::span<const double> coeffs,
                        double scale) {
  if (seeds.size() != coeffs.size()) {
    throw std::invalid_argument("apply_scaled_perturbations: seeds/coeffs size mismatch");
  }
  if (!std::isfinite(scale)) {
    throw std::invalid_argument("apply_scaled_perturbations: non-finite scale");
  }
  ActiveSet active;
  active.seeds.reserve(seeds.size());
  active.coeffs.reserve(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (!std::isfinite(coeffs[i])) {
      throw std::invalid_argument("apply_scaled_perturbations: non-finite coefficient");
    }
    if (std::abs(coeffs[i]) <= kCoeffSkipThreshold) continue;
    active.seeds.push_back(seeds[i].seed);
    active.coeffs.push_back(coeffs[i]);
  }
  return active;
}

}  // namespace

std::vector<double> gaussian_vector(PerturbationSeed seed, std::size_t n) {
  if (n == 0) throw std::invalid_argument("gaussian_vector: n must be positive");
  std::vector<double> z(n);
  const std::size_t pairs = (n + 1) / 2;
#pragma omp parallel for schedule(static) if (n >= 16384)
  for (std::size_t p = 0; p < pairs; ++p) {
    const rng::NormalPair v = rng::normal_pair_at(seed.seed, p);
    z[2 * p] = v.z0;
    if (2 * p + 1 < n) z[2 * p + 1] = v.z1;
  }
  return z;
}

void apply_scaled_perturbations(ParameterVector& theta, std::span<const PerturbationSeed> seeds,
                                std::span<const double> coeffs, double scale) {
  const ActiveSet active = filter_active(seeds, coeffs, scale);
  if (active.seeds.empty()) return;
  kernels::add_scaled_gaussians(theta, active.seeds, active.coeffs, scale);
}

double apply_scaled_perturbations_norm(ParameterVector& theta,
                                       std::span<const PerturbationSeed> seeds,
                                       std::span<const double> coeffs, double scale) {
  const ActiveSet active = filter_active(seeds, coeffs, scale);
  if (active.seeds.empty()) return 0.0;
  return std::sqrt(kernels::add_scaled_gaussians(theta, active.seeds, active.coeffs, scale));
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace bszo
