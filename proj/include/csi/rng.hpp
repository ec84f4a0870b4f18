#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 The csi-select Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace csi {

/// splitmix64 step; used to derive independent stream seeds from one master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept
{
  return splitmix64(master ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/**
 * Portable random source. std::mt19937_64 produces the same sequence on every
 * conforming implementation; the standard distributions do not, so uniform and
 * normal variates are derived here by fixed transforms.
 */
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform()
  {
    return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
  }

  double uniform(double lo, double hi)
  {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound)
  {
    std::uint64_t const limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t       x     = engine_();
    while (x >= limit)
    {
      x = engine_();
    }
    return x % bound;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal()
  {
    if (has_spare_)
    {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
    {
      u1 = uniform();
    }
    double const u2    = uniform();
    double const r     = std::sqrt(-2.0 * std::log(u1));
    double const theta = 2.0 * std::numbers::pi * u2;
    spare_             = r * std::sin(theta);
    has_spare_         = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p)
  {
    return uniform() < p;
  }

private:
  std::mt19937_64 engine_;
  double          spare_{0.0};
  bool            has_spare_{false};
};

}  // namespace csi
