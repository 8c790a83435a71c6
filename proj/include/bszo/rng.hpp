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

#include <cmath>
#include <cstdint>

// Counter-based randomness: every draw is a pure function of (seed, index).
// This is what makes perturbation vectors regenerable at perturb, restore and
// update time without storing them, and it makes parallel generation
// bit-identical to serial generation for any thread count.
//
// Construction: the SplitMix64 output function evaluated at an arbitrary
// stream position (Steele, Lea, Flood 2014), followed by a Box-Muller
// transform for normal variates.

namespace bszo::rng {

inline constexpr std::uint64_t kSplitMixGamma = 0x9e3779b97f4a7c15ULL;

/// SplitMix64 finalizer (bijective 64-bit mix).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// index-th output of the SplitMix64 stream started at `seed`.
constexpr std::uint64_t hash_at(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed + (index + 1) * kSplitMixGamma);
}

/// Maps 64 random bits to (0, 1]; never returns 0 so log() stays finite.
constexpr double to_unit_positive(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Maps 64 random bits to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct NormalPair {
  double z0;
  double z1;
};

/// Standard-normal pair covering vector entries (2p, 2p+1) of stream `seed`.
inline NormalPair normal_pair_at(std::uint64_t seed, std::uint64_t pair_index) noexcept {
  const double u1 = to_unit_positive(hash_at(seed, 2 * pair_index));
  const double u2 = to_unit(hash_at(seed, 2 * pair_index + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

/// Entry `index` of the standard-normal vector identified by `seed`.
inline double normal_at(std::uint64_t seed, std::uint64_t index) noexcept {
  const NormalPair p = normal_pair_at(seed, index >> 1);
  return (index & 1) ? p.z1 : p.z0;
}

/// Hash-combine style fold, used to split seeds into independent streams.
constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t w) noexcept {
  return mix64(h ^ (w + kSplitMixGamma + (h << 6) + (h >> 2)));
}

// Stream tags keep the perturbation, minibatch-noise, jitter and data
// generation domains disjoint even when they share a root seed.
enum class Stream : std::uint64_t {
  perturbation = 0x7065727455ULL,
  batch_noise = 0x626e6f697345ULL,
  jitter = 0x6a697474ULL,
  data = 0x64617461ULL,
  step = 0x73746570ULL,
  replicate = 0x7265706cULL,
};

/// Deterministic seed derivation: (root, stream, a, b) -> child seed.
constexpr std::uint64_t derive(std::uint64_t root, Stream stream, std::uint64_t a = 0,
                               std::uint64_t b = 0) noexcept {
  return combine(combine(combine(combine(0x243f6a8885a308d3ULL, root),
                                 static_cast<std::uint64_t>(stream)),
                         a),
                 b);
}

}  // namespace bszo::rng
