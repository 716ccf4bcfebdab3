#pragma once

#include <cstdint>
#include <random>

namespace cfp::numerics {

// Deterministic generator used everywhere randomness appears (initialisation,
// MLM corruption, batching, graph roots). The raw stream is std::mt19937_64,
// whose output sequence is fixed by the C++ standard; the conversions below
// are our own so results do not depend on the standard library's
// distribution implementations.
//
//   uniform()  = (next() >> 11) * 2^-53            in [0, 1)
//   below(n)   = rejection sampling on next()      in [0, n)
//   normal()   = Box-Muller on two uniform() draws, one value per call
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finaliser over (base, stream, index); used to give every
// (purpose, step) pair an independent seed without carrying RNG state.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace cfp::numerics
