#pragma once

// Exact rational helpers: parsing, simplest-rational snapping, formatting.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cfdim {

// Parses "p/q", an integer, or a decimal literal ("0.25", "-1.5e-3")
// into the exact rational it denotes. Throws Error(Parse).
mpq_class parse_exact(std::string_view text);

// Like parse_exact, but decimal literals are replaced by the simplest
// rational within 1e-15 of their value. Fractions are kept as written.
mpq_class parse_param(std::string_view text);

// Parameter that may be +infinity ("inf", "infinity", "oo").
struct ExtRational {
  bool infinite = false;
  mpq_class value;  // meaningful only when !infinite
};
ExtRational parse_ext_param(std::string_view text);

// Exact value of a finite double.
mpq_class exact_from_double(double x);

// Simplest rational (smallest denominator) in the closed interval [lo, hi].
mpq_class simplest_in(const mpq_class& lo, const mpq_class& hi);

// Simplest rational within tol of x.
mpq_class rationalize(const mpq_class& x, const mpq_class& tol);
mpq_class rationalize(double x);

mpz_class floor_q(const mpq_class& q);

// Nearest double (mpq_class::get_d truncates, so 1/10 would print as 0.09999999999999999).
double nearest_double(const mpq_class& q);

// "p/q" (or "p" when q == 1).
std::string to_string(const mpq_class& q);
std::string to_string(const mpz_class& z);
std::string to_string(const ExtRational& v);

// Checked narrowing to uint64; nullopt on overflow or negativity.
std::optional<std::uint64_t> to_u64(const mpz_class& z);
mpz_class from_u64(std::uint64_t v);

}  // namespace cfdim
