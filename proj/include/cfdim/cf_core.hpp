#pragma once

// Exact continued-fraction kernels: expansion, continuants, cylinders,
// Gauss shift and the period-one quadratic targets y = [i, i, ...].

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cfdim/bigreal.hpp"

namespace cfdim {

using Digit = std::uint64_t;
using Digits = std::vector<Digit>;

struct RationalInput {
  mpz_class p, q;  // x = p/q
};

// x = (u + v*sqrt(d)) / w, d > 0 not a perfect square, v != 0.
struct SurdInput {
  mpz_class u, v, d, w;
};

// x is known only to lie within 2^-bits of the decimal value. bits == 0
// selects the default budget 4n + 64 for a request of n digits.
struct DecimalInput {
  std::string text;
  unsigned long bits = 0;
};

using RealInput = std::variant<RationalInput, SurdInput, DecimalInput>;

enum class SourceKind { Rational, Surd, Decimal, Interval, Explicit };
const char* to_string(SourceKind k);

struct DigitSeq {
  Digits digits;
  bool exhausted = false;
  SourceKind source = SourceKind::Explicit;

  std::size_t size() const { return digits.size(); }
  Digit operator[](std::size_t k) const { return digits[k]; }
  std::span<const Digit> span() const { return digits; }
};

DigitSeq make_digits(Digits d);

// Parsers for the textual input forms: "p/q", "sqrt:d,u,v,w", "0.xyz".
RationalInput parse_rational_input(std::string_view text);
SurdInput parse_surd_input(std::string_view text);
// sqrt(d) - floor(sqrt(d)), the fractional part; the CLI's --surd d form.
SurdInput surd_fractional_sqrt(const mpz_class& d);

DigitSeq expand(const RealInput& x, std::size_t n);
// Digits shared by every point of the closed interval [lo, hi] within (0,1).
DigitSeq expand_interval(const mpq_class& lo, const mpq_class& hi, std::size_t n);

// Value of a surd input to `prec` bits (rounded to nearest).
BigReal evaluate(const SurdInput& x, mpfr_prec_t prec);

class ContinuantTable {
 public:
  // p(k), q(k) for k = -1 .. order().
  const mpz_class& p(long k) const { return p_[static_cast<std::size_t>(k + 1)]; }
  const mpz_class& q(long k) const { return q_[static_cast<std::size_t>(k + 1)]; }
  long order() const { return static_cast<long>(q_.size()) - 2; }

 private:
  friend ContinuantTable continuants(std::span<const Digit> d);
  std::vector<mpz_class> p_, q_;
};

ContinuantTable continuants(std::span<const Digit> d);
inline ContinuantTable continuants(const DigitSeq& d) { return continuants(d.span()); }

// q_n(a_1..a_n) alone, without the table.
mpz_class continuant(std::span<const Digit> d);

struct BasicInterval {
  std::size_t order = 0;
  Digits digits;
  mpq_class left, right;  // [left, right), left < right
  mpq_class length;
};

BasicInterval basic_interval(std::span<const Digit> d);
inline BasicInterval basic_interval(const DigitSeq& d) { return basic_interval(d.span()); }

// q_n(i, ..., i) via the closed form in Z[sqrt(i^2+4)].
mpz_class run_continuant(Digit i, std::uint64_t n);
// Same value by the three-term recursion.
mpz_class run_continuant_recursive(Digit i, std::uint64_t n);
// |I_m(y)| = 1 / (Q_m (Q_m + Q_{m-1})) for y = [i, i, ...].
mpq_class run_interval_length(Digit i, std::uint64_t m);

DigitSeq gauss_shift(const DigitSeq& d, std::size_t n);

struct QuadraticTarget {
  Digit i = 1;
  SurdInput y;               // (sqrt(i^2+4) - i) / 2
  BigReal tau, zeta, g;      // tau(i), zeta(i), log tau(i)
  mpq_class y_lo, y_hi;      // consecutive convergents enclosing y
  double tau_d = 0, g_d = 0;
};

QuadraticTarget target(Digit i, mpfr_prec_t prec = default_precision());

}  // namespace cfdim
