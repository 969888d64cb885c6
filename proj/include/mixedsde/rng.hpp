#pragma once

#include <cstdint>
#include <random>

namespace mixedsde {

/// SplitMix64 step; used to derive decorrelated seeds from one token.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Deterministically derives a stream seed from (base, salt) so that
/// different salts give statistically independent generators. Used both
/// for per-path seeds (salt = path index) and for separating the
/// Brownian and fractional sub-streams within a path.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

inline constexpr std::uint64_t kBrownianStreamSalt = 0x57u;
inline constexpr std::uint64_t kFractionalStreamSalt = 0xB4u;

/// Standard-normal source: a seeded engine plus N(0,1) distribution.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(derive_seed(seed, 0)) {}

  double operator()() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mixedsde
