/*
 *    Copyright 2026 The wpsim Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WPSIM_RNG_HPP
#define WPSIM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace wpsim {

// SplitMix64. Deterministic across platforms, unlike the std:: distributions,
// so generated traces are byte-stable for a given seed.
class SplitMix64
{
public:
  explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

  uint64_t next()
  {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). bound must be nonzero.
  uint64_t next_below(uint64_t bound)
  {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next()) * bound) >> 64);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

private:
  uint64_t state_;
};

// Kumaraswamy(a, b) sample: a two-parameter distribution on [0,1] with a
// closed-form inverse CDF, used for per-branch taken biases.
inline double kumaraswamy(SplitMix64& rng, double a, double b)
{
  double u = rng.next_double();
  return std::pow(1.0 - std::pow(1.0 - u, 1.0 / b), 1.0 / a);
}

// Derives independent stream seeds from one root seed.
inline uint64_t derive_seed(uint64_t root, uint64_t stream)
{
  SplitMix64 s(root ^ (0xa0761d6478bd642fULL * (stream + 1)));
  return s.next();
}

// FNV-1a, used for trace and config identity hashes.
inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL)
{
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; i++) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace wpsim

#endif
