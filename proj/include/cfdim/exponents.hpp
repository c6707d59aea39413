#pragma once

// Block decomposition of the i-runs of x and finite-scale estimates of
// the uniform / asymptotic approximation exponents against y = [i, i, ...].

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <vector>

#include "cfdim/cf_core.hpp"

namespace cfdim {

// a_{n+1} = ... = a_m = i (exclusive start).
struct BlockPair {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t length() const { return m - n; }
  bool operator==(const BlockPair&) const = default;
};

struct BlockDecomposition {
  Digit i = 1;
  std::vector<BlockPair> raw_blocks;
  std::vector<BlockPair> record_blocks;
  std::uint64_t scanned = 0;
};

// Streaming scanner: maximal i-runs and the first-strictly-longer records.
class BlockScanner {
 public:
  explicit BlockScanner(Digit i, bool keep_raw = false) : i_(i), keep_raw_(keep_raw) {}

  void put(Digit a) {
    const bool hit = a == i_;
    // Only runs that beat floor_ need closing: every run when raw blocks
    // are kept, otherwise only new records.
    if ((run_ > floor_) & !hit) close();
    run_ = hit ? run_ + 1 : 0;
    ++pos_;
  }
  void put(const Digit* d, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) put(d[k]);
  }
  void put_run(Digit a, std::uint64_t count);
  // Closes a trailing run; call once after the last digit.
  void finish();
  void reset();

  Digit digit() const { return i_; }
  std::uint64_t position() const { return pos_; }
  const std::vector<BlockPair>& raw() const { return raw_; }
  const std::vector<BlockPair>& records() const { return records_; }

 private:
  void close();

  Digit i_;
  bool keep_raw_;
  std::uint64_t pos_ = 0;
  std::uint64_t run_ = 0;
  std::uint64_t floor_ = 0;
  std::vector<BlockPair> raw_;
  std::vector<BlockPair> records_;
};

BlockDecomposition decompose(std::span<const Digit> d, Digit i);
inline BlockDecomposition decompose(const DigitSeq& d, Digit i) { return decompose(d.span(), i); }

struct ExponentEstimate {
  double nu_hat_est = 0;
  double nu_est = 0;
  std::size_t k_used = 0;    // record pairs in the tail window
  std::size_t k_total = 0;   // eligible record pairs within the horizon
};

ExponentEstimate exponent_estimates(std::span<const BlockPair> records, std::uint64_t N);
inline ExponentEstimate exponent_estimates(const BlockDecomposition& bd, std::uint64_t N) {
  return exponent_estimates(bd.record_blocks, N);
}

struct DistanceBracket {
  mpq_class lower, upper;
  std::uint64_t m = 0;      // common prefix length with (i, i, ...)
  Digit mismatch = 0;       // first digit differing from i
};

// Bracket for |T^n(x) - y| from the common prefix of shift(d, n) with y.
DistanceBracket distance_bracket(const DigitSeq& d, std::size_t n, const QuadraticTarget& t);

enum class HitResult { Hit, Miss, Indeterminate };
const char* to_string(HitResult r);

struct HitCheck {
  HitResult result = HitResult::Indeterminate;
  std::uint64_t best_m = 0;         // longest common prefix over n in [1, N]
  double log_threshold = 0;         // nu_hat * log |I_N(y)|
  double log_upper = 0, log_lower = 0;
};

// Is there n in [1, N] with |T^n(x) - y| < |I_N(y)|^nu_hat ? Hit when the
// upper bracket settles it, Miss when every lower bracket exceeds the
// threshold, Indeterminate otherwise.
HitCheck uniform_hit_check(const DigitSeq& d, const QuadraticTarget& t, std::uint64_t N,
                           const mpq_class& nu_hat);

}  // namespace cfdim
