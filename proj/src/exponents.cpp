#include "cfdim/exponents.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"

namespace cfdim {

void BlockScanner::close() {
  BlockPair b{pos_ - run_, pos_};
  if (keep_raw_) raw_.push_back(b);
  if (records_.empty() || b.length() > records_.back().length()) {
    records_.push_back(b);
    if (!keep_raw_) floor_ = b.length();
  }
  run_ = 0;
}

void BlockScanner::put_run(Digit a, std::uint64_t count) {
  if (count == 0) return;
  if (a == i_) {
    run_ += count;
  } else {
    if (run_ > floor_) close();
    run_ = 0;
  }
  pos_ += count;
}

void BlockScanner::finish() {
  if (run_ > floor_) close();
  run_ = 0;
}

void BlockScanner::reset() {
  pos_ = run_ = floor_ = 0;
  raw_.clear();
  records_.clear();
}

BlockDecomposition decompose(std::span<const Digit> d, Digit i) {
  if (d.empty()) fail(ErrorKind::InputOutOfRange, "decompose needs at least one digit");
  BlockScanner sc(i, true);
  sc.put(d.data(), d.size());
  sc.finish();
  if (sc.raw().empty()) fail(ErrorKind::NoBlocks, "digit " + std::to_string(i) + " never occurs");
  BlockDecomposition bd;
  bd.i = i;
  bd.raw_blocks = sc.raw();
  bd.record_blocks = sc.records();
  bd.scanned = d.size();
  return bd;
}

ExponentEstimate exponent_estimates(std::span<const BlockPair> rec, std::uint64_t N) {
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
    if (rec[k + 1].n > N) break;
    if (rec[k].n >= 1) eligible.push_back(k);
  }
  if (eligible.empty())
    fail(ErrorKind::InsufficientBlocks, "need two record blocks within the horizon");
  ExponentEstimate e;
  e.k_total = eligible.size();
  std::size_t tail = (eligible.size() + 1) / 2;
  e.k_used = tail;
  e.nu_hat_est = std::numeric_limits<double>::infinity();
  e.nu_est = 0;
  for (std::size_t idx = eligible.size() - tail; idx < eligible.size(); ++idx) {
    std::size_t k = eligible[idx];
    double len = static_cast<double>(rec[k].length());
    e.nu_hat_est = std::min(e.nu_hat_est, len / static_cast<double>(rec[k + 1].n));
    e.nu_est = std::max(e.nu_est, len / static_cast<double>(rec[k].n));
  }
  return e;
}

namespace {

// Rational lower bound for dist(y, closure of I_1(j)), j != i.
mpq_class gap_to_cylinder(const QuadraticTarget& t, Digit j) {
  mpz_class jz = from_u64(j);
  mpq_class g;
  if (j > t.i) {
    g = t.y_lo - mpq_class(mpz_class(1), jz);
  } else {
    g = mpq_class(mpz_class(1), jz + 1) - t.y_hi;
  }
  g.canonicalize();
  if (sgn(g) <= 0) fail(ErrorKind::NoConvergence, "target enclosure too coarse");
  return g;
}

mpq_class lower_from(const QuadraticTarget& t, std::uint64_t m, Digit j) {
  mpq_class v = run_interval_length(t.i, m) * gap_to_cylinder(t, j) / 2;
  v.canonicalize();
  return v;
}

}  // namespace

DistanceBracket distance_bracket(const DigitSeq& d, std::size_t n, const QuadraticTarget& t) {
  if (n >= d.size()) fail(ErrorKind::Exhausted, "shift past certified digits");
  std::size_t p = n;
  while (p < d.size() && d[p] == t.i) ++p;
  if (p == d.size()) fail(ErrorKind::Exhausted, "common prefix with the target runs past certified digits");
  DistanceBracket b;
  b.m = p - n;
  b.mismatch = d[p];
  b.upper = run_interval_length(t.i, b.m);
  b.lower = lower_from(t, b.m, b.mismatch);
  return b;
}

const char* to_string(HitResult r) {
  switch (r) {
    case HitResult::Hit: return "hit";
    case HitResult::Miss: return "miss";
    case HitResult::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

HitCheck uniform_hit_check(const DigitSeq& d, const QuadraticTarget& t, std::uint64_t N,
                           const mpq_class& nu_hat) {
  if (N < 1) fail(ErrorKind::InputOutOfRange, "horizon must be >= 1");
  if (sgn(nu_hat) < 0) fail(ErrorKind::InputOutOfRange, "nu_hat must be >= 0");
  if (d.size() < N + 1) fail(ErrorKind::Exhausted, "need at least N+1 certified digits");
  HitCheck hc;
  // Run length of i starting at each 0-based index, and the digit ending it.
  // Scan n = 1..N, i.e. 0-based start indices 1..N.
  std::map<Digit, std::uint64_t> best_by_mismatch;
  std::uint64_t best_m = 0;
  {
    std::size_t k = 1;
    while (k <= N) {
      if (d[k] != t.i) {
        best_by_mismatch.try_emplace(d[k], 0);  // m = 0 candidate
        ++k;
        continue;
      }
      std::size_t e = k;
      while (e < d.size() && d[e] == t.i) ++e;
      if (e == d.size()) fail(ErrorKind::Exhausted, "target run reaches the end of certified digits");
      std::uint64_t m = e - k;  // the longest prefix among starts k..min(e-1,N)
      auto& b = best_by_mismatch[d[e]];
      b = std::max(b, m);
      best_m = std::max(best_m, m);
      k = e;  // starts inside the run give shorter prefixes with the same mismatch
    }
  }
  hc.best_m = best_m;
  if (sgn(nu_hat) == 0) {
    // |T^n(x) - y| < 1 = |I_N(y)|^0 always holds.
    hc.result = HitResult::Hit;
    return hc;
  }
  const mpfr_prec_t prec = std::max<mpfr_prec_t>(default_precision(), 128);
  mpq_class IN = run_interval_length(t.i, N);
  BigReal th_down = mul(log_of(IN, MPFR_RNDD, prec), nu_hat, MPFR_RNDD);
  BigReal th_up = mul(log_of(IN, MPFR_RNDU, prec), nu_hat, MPFR_RNDU);
  BigReal up = log_of(run_interval_length(t.i, best_m), MPFR_RNDU, prec);
  BigReal lo_min(prec);
  bool first = true;
  for (const auto& [j, m] : best_by_mismatch) {
    BigReal l = log_of(lower_from(t, m, j), MPFR_RNDD, prec);
    if (first || l < lo_min) lo_min = l;
    first = false;
  }
  hc.log_threshold = th_down.to_double();
  hc.log_upper = up.to_double();
  hc.log_lower = lo_min.to_double();
  if (up < th_down) {
    hc.result = HitResult::Hit;
  } else if (lo_min >= th_up) {
    hc.result = HitResult::Miss;
  } else {
    hc.result = HitResult::Indeterminate;
  }
  return hc;
}

}  // namespace cfdim
