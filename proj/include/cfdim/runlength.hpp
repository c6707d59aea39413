#pragma once

// Maximal run-length function R_n and finite-scale liminf/limsup
// estimators of R_n / n.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cfdim/cf_core.hpp"

namespace cfdim {

// A maximal constant block: digits start .. start+length-1 (1-based) equal `digit`.
struct Run {
  std::uint64_t start = 1;
  std::uint64_t length = 0;
  Digit digit = 0;
};

struct RunProfile {
  std::uint64_t n_max = 0;
  std::vector<std::uint32_t> R;  // R[n-1] = R_n
  std::vector<Run> blocks;

  std::uint32_t at(std::uint64_t n) const { return R.at(n - 1); }
};

RunProfile run_profile(std::span<const Digit> d);
inline RunProfile run_profile(const DigitSeq& d) { return run_profile(d.span()); }

struct RatioEstimate {
  double liminf_est = 0;
  double limsup_est = 0;
  std::uint64_t k_min = 0;  // first index of the window
  std::uint64_t n_max = 0;
};

RatioEstimate ratio_estimates(const RunProfile& rp, double tail_fraction = 0.5);

// How a block is written as a pair (n, m):
//   ExclusiveStart: a_{n+1} = ... = a_m, length m - n  (block-decomposition style)
//   InclusiveStart: a_n = ... = a_m,     length m - n + 1 (run-length section style)
enum class RunConvention { ExclusiveStart, InclusiveStart };
std::pair<std::uint64_t, std::uint64_t> block_endpoints(const Run& r, RunConvention c);

// Streaming R_n: feed digits (or runs of one digit) and read the running
// maximum. Used where the digit string is too long to keep.
class RunTracker {
 public:
  void put(Digit a) { put_run(a, 1); }
  void put_run(Digit a, std::uint64_t count);
  std::uint64_t position() const { return pos_; }
  std::uint64_t longest() const { return best_; }

 private:
  std::uint64_t pos_ = 0;
  std::uint64_t best_ = 0;
  std::uint64_t cur_ = 0;
  Digit last_ = 0;
};

}  // namespace cfdim
