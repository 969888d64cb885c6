#include "mixedsde/rng.hpp"

namespace mixedsde {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t state = base ^ (salt * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL);
  splitmix64_next(state);
  return splitmix64_next(state);
}

}  // namespace mixedsde
