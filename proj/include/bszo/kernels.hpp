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

// Length-n kernels. Every kernel exists twice: the OpenMP-parallel default in
// bszo::kernels and a plain-loop twin in bszo::kernels::serial. The two are
// bit-identical for all inputs and thread counts: elementwise work is a pure
// function of the index, and reductions accumulate fixed-size chunks whose
// partial sums are combined in index order. Tests assert exact equality and
// tools/bench_kernels measures the speedup.

namespace bszo::kernels {

// Chunk length for deterministic reductions; also the parallel grain size.
inline constexpr std::size_t kReduceChunk = 1024;

/// theta[j] += scale * sum_i coeffs[i] * normal(seeds[i], j).
/// Returns the squared 2-norm of the added increment.
/// Callers are responsible for filtering out negligible coefficients.
double add_scaled_gaussians(std::span<double> theta, std::span<const std::uint64_t> seeds,
                            std::span<const double> coeffs, double scale);

/// sum_j x[j] * normal(seed, j), deterministic chunked reduction.
double dot_gaussian(std::span<const double> x, std::uint64_t seed);

/// sum_j x[j] * y[j], deterministic chunked reduction.
double dot(std::span<const double> x, std::span<const double> y);

/// sum_j x[j]^2, deterministic chunked reduction.
double squared_norm(std::span<const double> x);

/// sum_j (0.5 * a[j] * x[j]^2 - b[j] * x[j]).
double quadratic_form(std::span<const double> x, std::span<const double> a,
                      std::span<const double> b);

/// sum over the Rosenbrock chain terms 100*(x[j+1]-x[j]^2)^2 + (1-x[j])^2.
double rosenbrock_sum(std::span<const double> x);

namespace serial {

double add_scaled_gaussians(std::span<double> theta, std::span<const std::uint64_t> seeds,
                            std::span<const double> coeffs, double scale);
double dot_gaussian(std::span<const double> x, std::uint64_t seed);
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
double quadratic_form(std::span<const double> x, std::span<const double> a,
                      std::span<const double> b);
double rosenbrock_sum(std::span<const double> x);

}  // namespace serial

}  // namespace bszo::kernels
