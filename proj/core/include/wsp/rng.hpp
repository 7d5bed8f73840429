#pragma once

#include <cstdint>

namespace wsp {

/// splitmix64 step; the documented seed-derivation mix used everywhere a
/// child stream is forked from a master seed (trial seeds, per-subspace
/// search seeds). Stable contract: changing this breaks golden outputs.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Deterministic PRNG (xoshiro256** seeded via splitmix64). Gaussian
/// variates use the Marsaglia polar method so the output stream does not
/// depend on the standard library's distribution internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform01() noexcept;                  // [0, 1), 53-bit resolution
  double uniform(double lo, double hi) noexcept;
  int uniform_int(int lo, int hi) noexcept;     // inclusive bounds
  double normal() noexcept;                     // standard normal
  int sign() noexcept;                          // +1 or -1

private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace wsp
