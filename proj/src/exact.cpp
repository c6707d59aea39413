#include "cfdim/exact.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "cfdim/error.hpp"

#include <mpfr.h>

namespace cfdim {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

mpz_class parse_integer(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) fail(ErrorKind::Parse, "not an integer: '" + std::string(s) + "'");
  mpz_class z(std::string(s), 10);
  return neg ? mpz_class(-z) : z;
}

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

mpq_class parse_decimal(std::string_view s) {
  std::string_view mant = s;
  long exp10 = 0;
  if (auto epos = s.find_first_of("eE"); epos != std::string_view::npos) {
    mant = s.substr(0, epos);
    std::string_view es = s.substr(epos + 1);
    mpz_class e = parse_integer(es);
    if (!e.fits_slong_p() || abs(e) > 100000) fail(ErrorKind::Parse, "exponent out of range");
    exp10 = e.get_si();
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '+' || mant[0] == '-')) {
    neg = mant[0] == '-';
    mant.remove_prefix(1);
  }
  std::string_view ip = mant, fp;
  if (auto dot = mant.find('.'); dot != std::string_view::npos) {
    ip = mant.substr(0, dot);
    fp = mant.substr(dot + 1);
  }
  if (ip.empty() && fp.empty()) fail(ErrorKind::Parse, "empty number");
  if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)))
    fail(ErrorKind::Parse, "malformed decimal: '" + std::string(s) + "'");
  std::string digits = std::string(ip) + std::string(fp);
  mpz_class num(digits.empty() ? std::string("0") : digits, 10);
  long scale = static_cast<long>(fp.size()) - exp10;
  mpq_class q;
  if (scale >= 0) {
    q = mpq_class(num, pow10(static_cast<unsigned long>(scale)));
  } else {
    q = mpq_class(num * pow10(static_cast<unsigned long>(-scale)));
  }
  q.canonicalize();
  return neg ? mpq_class(-q) : q;
}

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

mpq_class parse_exact(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) fail(ErrorKind::Parse, "empty number");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    mpz_class p = parse_integer(std::string_view(s).substr(0, slash));
    mpz_class q = parse_integer(std::string_view(s).substr(slash + 1));
    if (q == 0) fail(ErrorKind::Parse, "zero denominator");
    mpq_class r(p, q);
    r.canonicalize();
    return r;
  }
  return parse_decimal(s);
}

mpq_class parse_param(std::string_view text) {
  std::string s = trim(text);
  mpq_class v = parse_exact(s);
  if (s.find('/') != std::string::npos) return v;
  return rationalize(v, mpq_class(mpz_class(1), pow10(15)));
}

ExtRational parse_ext_param(std::string_view text) {
  std::string s = trim(text);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "inf" || s == "+inf" || s == "infinity" || s == "oo") return {true, mpq_class(0)};
  return {false, parse_param(s)};
}

mpq_class exact_from_double(double x) {
  if (!std::isfinite(x)) fail(ErrorKind::OutOfRange, "non-finite value");
  mpq_class q(x);  // exact: GMP converts the binary value
  return q;
}

mpq_class simplest_in(const mpq_class& lo_in, const mpq_class& hi_in) {
  mpq_class lo = lo_in, hi = hi_in;
  if (lo > hi) std::swap(lo, hi);
  if (lo <= 0 && hi >= 0) return mpq_class(0);
  if (hi < 0) return -simplest_in(-hi, -lo);
  // Both positive: walk the continued fractions of lo and hi together.
  mpz_class fl = floor_q(lo);
  if (mpq_class(fl) == lo) return lo;
  if (mpq_class(fl + 1) <= hi) return mpq_class(fl + 1);
  // fl < lo <= hi < fl + 1: recurse on reciprocals of the fractional parts.
  mpq_class r = simplest_in(1 / (hi - fl), 1 / (lo - fl));
  mpq_class out = fl + 1 / r;
  out.canonicalize();
  return out;
}

mpq_class rationalize(const mpq_class& x, const mpq_class& tol) {
  return simplest_in(x - tol, x + tol);
}

mpq_class rationalize(double x) {
  return rationalize(exact_from_double(x), mpq_class(mpz_class(1), pow10(15)));
}

mpz_class floor_q(const mpq_class& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

std::string to_string(const mpq_class& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_string(const mpz_class& z) { return z.get_str(); }

std::string to_string(const ExtRational& v) { return v.infinite ? "inf" : to_string(v.value); }

std::optional<std::uint64_t> to_u64(const mpz_class& z) {
  if (sgn(z) < 0) return std::nullopt;
  if (mpz_sizeinbase(z.get_mpz_t(), 2) > 64) return std::nullopt;
  std::uint64_t out = 0;
  size_t count = 0;
  mpz_export(&out, &count, -1, sizeof(out), 0, 0, z.get_mpz_t());
  return out;
}

mpz_class from_u64(std::uint64_t v) {
  mpz_class z;
  mpz_import(z.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return z;
}

double nearest_double(const mpq_class& q) {
  mpfr_t v;
  mpfr_init2(v, 53);
  mpfr_set_q(v, q.get_mpq_t(), MPFR_RNDN);
  const double d = mpfr_get_d(v, MPFR_RNDN);
  mpfr_clear(v);
  return d;
}

}  // namespace cfdim
