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

#include "bszo/kernels.hpp"

#include <vector>

#include "bszo/rng.hpp"

namespace bszo::kernels {

namespace {

constexpr std::size_t kParallelCutoff = 8192;

inline std::size_t chunk_count(std::size_t n) { return (n + kReduceChunk - 1) / kReduceChunk; }

// Increment applied to coordinates (2p, 2p+1) and its contribution to the
// squared norm. Serial and parallel paths share this so they round identically.
inline double apply_pair(std::span<double> theta, std::span<const std::uint64_t> seeds,
                         std::span<const double> coeffs, double scale, std::size_t p) {
  const std::size_t j0 = 2 * p;
  const std::size_t j1 = j0 + 1;
  double d0 = 0.0;
  double d1 = 0.0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const rng::NormalPair z = rng::normal_pair_at(seeds[i], p);
    d0 += coeffs[i] * z.z0;
    d1 += coeffs[i] * z.z1;
  }
  d0 *= scale;
  theta[j0] += d0;
  double nrm2 = d0 * d0;
  if (j1 < theta.size()) {
    d1 *= scale;
    theta[j1] += d1;
    nrm2 += d1 * d1;
  }
  return nrm2;
}

inline double dot_gaussian_pair(std::span<const double> x, std::uint64_t seed, std::size_t p) {
  const std::size_t j0 = 2 * p;
  const std::size_t j1 = j0 + 1;
  const rng::NormalPair z = rng::normal_pair_at(seed, p);
  double s = x[j0] * z.z0;
  if (j1 < x.size()) s += x[j1] * z.z1;
  return s;
}

// Deterministic reduction: per-chunk partials accumulated left to right
// inside each chunk, then combined in chunk order.
template <class ChunkSum>
double chunked_reduce_serial(std::size_t n, ChunkSum&& chunk_sum) {
  double total = 0.0;
  for (std::size_t c = 0; c < chunk_count(n); ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    total += chunk_sum(lo, hi);
  }
  return total;
}

template <class ChunkSum>
double chunked_reduce(std::size_t n, ChunkSum&& chunk_sum) {
  if (n < kParallelCutoff) return chunked_reduce_serial(n, chunk_sum);
  const std::size_t nc = chunk_count(n);
  std::vector<double> partial(nc);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t lo = c * kReduceChunk;
    const std::size_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
    partial[c] = chunk_sum(lo, hi);
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

inline double quadratic_chunk(std::span<const double> x, std::span<const double> a,
                              std::span<const double> b, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t j = lo; j < hi; ++j) s += 0.5 * a[j] * x[j] * x[j] - b[j] * x[j];
  return s;
}

inline double rosenbrock_chunk(std::span<const double> x, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    const double t = x[j + 1] - x[j] * x[j];
    const double u = 1.0 - x[j];
    s += 100.0 * t * t + u * u;
  }
  return s;
}

}  // namespace

double add_scaled_gaussians(std::span<double> theta, std::span<const std::uint64_t> seeds,
                            std::span<const double> coeffs, double scale) {
  const std::size_t n = theta.size();
  const std::size_t pairs = (n + 1) / 2;
  if (n < kParallelCutoff) return serial::add_scaled_gaussians(theta, seeds, coeffs, scale);
  // One reduce chunk covers kReduceChunk coordinate pairs here; the norm
  // accumulation follows the same fixed-order combine as chunked_reduce.
  return chunked_reduce(pairs, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t p = lo; p < hi; ++p) s += apply_pair(theta, seeds, coeffs, scale, p);
    return s;
  });
}

double dot_gaussian(std::span<const double> x, std::uint64_t seed) {
  const std::size_t pairs = (x.size() + 1) / 2;
  return chunked_reduce(pairs, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t p = lo; p < hi; ++p) s += dot_gaussian_pair(x, seed, p);
    return s;
  });
}

double dot(std::span<const double> x, std::span<const double> y) {
  return chunked_reduce(x.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += x[j] * y[j];
    return s;
  });
}

double squared_norm(std::span<const double> x) {
  return chunked_reduce(x.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += x[j] * x[j];
    return s;
  });
}

double quadratic_form(std::span<const double> x, std::span<const double> a,
                      std::span<const double> b) {
  return chunked_reduce(
      x.size(), [&](std::size_t lo, std::size_t hi) { return quadratic_chunk(x, a, b, lo, hi); });
}

double rosenbrock_sum(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return chunked_reduce(x.size() - 1, [&](std::size_t lo, std::size_t hi) {
    return rosenbrock_chunk(x, lo, hi);
  });
}

namespace serial {

double add_scaled_gaussians(std::span<double> theta, std::span<const std::uint64_t> seeds,
                            std::span<const double> coeffs, double scale) {
  const std::size_t pairs = (theta.size() + 1) / 2;
  return chunked_reduce_serial(pairs, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t p = lo; p < hi; ++p) s += apply_pair(theta, seeds, coeffs, scale, p);
    return s;
  });
}

double dot_gaussian(std::span<const double> x, std::uint64_t seed) {
  const std::size_t pairs = (x.size() + 1) / 2;
  return chunked_reduce_serial(pairs, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t p = lo; p < hi; ++p) s += dot_gaussian_pair(x, seed, p);
    return s;
  });
}

double dot(std::span<const double> x, std::span<const double> y) {
  return chunked_reduce_serial(x.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += x[j] * y[j];
    return s;
  });
}

double squared_norm(std::span<const double> x) {
  return chunked_reduce_serial(x.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += x[j] * x[j];
    return s;
  });
}

double quadratic_form(std::span<const double> x, std::span<const double> a,
                      std::span<const double> b) {
  return chunked_reduce_serial(
      x.size(), [&](std::size_t lo, std::size_t hi) { return quadratic_chunk(x, a, b, lo, hi); });
}

double rosenbrock_sum(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return chunked_reduce_serial(x.size() - 1, [&](std::size_t lo, std::size_t hi) {
    return rosenbrock_chunk(x, lo, hi);
  });
}

}  // namespace serial

}  // namespace bszo::kernels
