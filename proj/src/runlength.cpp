#include "cfdim/runlength.hpp"

#include <algorithm>
#include <cmath>

#include "cfdim/error.hpp"

namespace cfdim {

RunProfile run_profile(std::span<const Digit> d) {
  if (d.empty()) fail(ErrorKind::InputOutOfRange, "run_profile needs at least one digit");
  RunProfile rp;
  rp.n_max = d.size();
  rp.R.resize(d.size());
  std::uint64_t cur = 0, best = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (k > 0 && d[k] == d[k - 1]) {
      ++cur;
    } else {
      if (k > 0) rp.blocks.push_back({k - cur + 1, cur, d[k - 1]});
      cur = 1;
    }
    best = std::max(best, cur);
    rp.R[k] = static_cast<std::uint32_t>(best);
  }
  rp.blocks.push_back({d.size() - cur + 1, cur, d.back()});
  return rp;
}

RatioEstimate ratio_estimates(const RunProfile& rp, double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
    fail(ErrorKind::InputOutOfRange, "tail_fraction must lie in (0,1]");
  auto count = static_cast<std::uint64_t>(std::floor(tail_fraction * static_cast<double>(rp.n_max)));
  if (count == 0) fail(ErrorKind::EmptyWindow, "tail window contains no index");
  RatioEstimate e;
  e.n_max = rp.n_max;
  e.k_min = rp.n_max - count + 1;
  e.liminf_est = 1.0;
  e.limsup_est = 0.0;
  for (std::uint64_t n = e.k_min; n <= rp.n_max; ++n) {
    double v = static_cast<double>(rp.R[n - 1]) / static_cast<double>(n);
    e.liminf_est = std::min(e.liminf_est, v);
    e.limsup_est = std::max(e.limsup_est, v);
  }
  return e;
}

std::pair<std::uint64_t, std::uint64_t> block_endpoints(const Run& r, RunConvention c) {
  std::uint64_t m = r.start + r.length - 1;
  if (c == RunConvention::ExclusiveStart) return {r.start - 1, m};
  return {r.start, m};
}

void RunTracker::put_run(Digit a, std::uint64_t count) {
  if (count == 0) return;
  if (pos_ > 0 && a == last_) {
    cur_ += count;
  } else {
    cur_ = count;
    last_ = a;
  }
  pos_ += count;
  best_ = std::max(best_, cur_);
}

}  // namespace cfdim
