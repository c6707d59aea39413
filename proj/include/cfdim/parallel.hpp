#pragma once

#include <cstdint>
#include <random>

namespace cfdim {

// Worker count for OpenMP kernels. CFDIM_THREADS, when set, wins over
// set_threads(); 0 means "OpenMP default".
int threads();
void set_threads(int n);
int threads_from_env();

// Per-sample generator derived from (seed, index); independent of how
// samples are scheduled across threads.
std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index);

// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(static_cast<std::int64_t>(g() >> 11)) * 0x1.0p-53;
}

// Uniform double in (0,1].
inline double uniform01_open_low(std::mt19937_64& g) {
  return static_cast<double>(static_cast<std::int64_t>((g() >> 11) + 1)) * 0x1.0p-53;
}

}  // namespace cfdim
