#ifndef SWARMRECON_RNG_H_
#define SWARMRECON_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace swarmrecon {

// All randomness is drawn from mt19937_64. The distributions below are
// implemented here rather than taken from <random> so that sampled values are
// identical across standard library implementations.
using Rng = std::mt19937_64;

// Derives an independent seed for a named sub-stream ("env", "policy-init",
// "demo-noise", "eval", ...) and an optional index.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream,
                         std::uint64_t index = 0);

inline Rng MakeRng(std::uint64_t seed, std::string_view stream,
                   std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, stream, index));
}

// Uniform double in [0, 1) with 53 random bits.
double Uniform01(Rng& rng);

// Uniform integer in [0, n). Requires n > 0.
std::uint64_t UniformIndex(Rng& rng, std::uint64_t n);

// Standard normal via Box-Muller.
double StandardNormal(Rng& rng);

}  // namespace swarmrecon

#endif  // SWARMRECON_RNG_H_
