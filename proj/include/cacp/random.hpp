/* Copyright 2026 The CACP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CACP_RANDOM_HPP_
#define CACP_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace cacp {

// The std:: distributions are implementation-defined, so plans and policy
// files would differ between standard libraries. These draw directly from
// the engine's bit stream, which the standard does pin down.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 bits of resolution.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double Uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * Uniform01(rng); }

/// Uniform integer in [0, n) by rejection; n must be positive.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

/// Standard normal via Box-Muller (one value per call).
inline double StandardNormal(Rng& rng) {
  double u1 = Uniform01(rng);
  while (u1 <= 0.0) u1 = Uniform01(rng);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Derives an independent stream for sub-task `index` of a seeded run.
inline Rng DeriveRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace cacp

#endif  // CACP_RANDOM_HPP_
