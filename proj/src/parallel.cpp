#include "cfdim/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace cfdim {

namespace {
std::atomic<int> g_threads{0};
}

int threads_from_env() {
  const char* env = std::getenv("CFDIM_THREADS");
  if (env == nullptr || *env == '\0') return -1;
  try {
    int n = std::stoi(env);
    return n >= 0 ? n : -1;
  } catch (...) {
    return -1;
  }
}

int threads() {
  int env = threads_from_env();
  int n = env >= 0 ? env : g_threads.load();
  return n > 0 ? n : omp_get_max_threads();
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x63666469u};
  return std::mt19937_64(seq);
}

}  // namespace cfdim
