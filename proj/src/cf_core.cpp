#include "cfdim/cf_core.hpp"

#include <algorithm>
#include <limits>

#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"

namespace cfdim {

const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::Rational: return "rational";
    case SourceKind::Surd: return "surd";
    case SourceKind::Decimal: return "decimal";
    case SourceKind::Interval: return "interval";
    case SourceKind::Explicit: return "explicit";
  }
  return "unknown";
}

DigitSeq make_digits(Digits d) {
  for (Digit a : d)
    if (a == 0) fail(ErrorKind::InputOutOfRange, "partial quotients must be >= 1");
  DigitSeq out;
  out.digits = std::move(d);
  return out;
}

namespace {

Digit checked_digit(const mpz_class& a) {
  auto v = to_u64(a);
  if (!v) fail(ErrorKind::Overflow, "partial quotient exceeds 64 bits");
  return *v;
}

mpz_class parse_z(std::string_view s) {
  mpq_class q = parse_exact(s);
  if (q.get_den() != 1) fail(ErrorKind::Parse, "expected an integer: '" + std::string(s) + "'");
  return q.get_num();
}

// floor((P + sqrt(D)) / Q) for irrational sqrt(D), s = isqrt(D).
mpz_class floor_surd(const mpz_class& P, const mpz_class& Q, const mpz_class& s) {
  mpz_class num = P + s;
  if (sgn(Q) < 0) num += 1;
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), Q.get_mpz_t());
  return r;
}

DigitSeq expand_rational(const RationalInput& x, std::size_t n) {
  if (x.q < 1 || x.p <= 0 || x.p >= x.q)
    fail(ErrorKind::InputOutOfRange, "rational input must satisfy 0 < p < q");
  DigitSeq out;
  out.source = SourceKind::Rational;
  mpz_class num = x.p, den = x.q;  // current value num/den in (0,1)
  while (out.digits.size() < n) {
    mpz_class a, r;
    mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t(), num.get_mpz_t());
    out.digits.push_back(checked_digit(a));
    den = num;
    num = r;
    if (num == 0) {
      out.exhausted = true;
      break;
    }
  }
  return out;
}

DigitSeq expand_surd(const SurdInput& x, std::size_t n) {
  if (x.d <= 0 || mpz_perfect_square_p(x.d.get_mpz_t()))
    fail(ErrorKind::InputOutOfRange, "surd radicand must be a positive non-square");
  if (x.v == 0 || x.w == 0) fail(ErrorKind::InputOutOfRange, "surd needs v != 0 and w != 0");
  // Normalise to (P + sqrt(D)) / Q with Q | D - P^2.
  mpz_class D = x.v * x.v * x.d;
  mpz_class P = sgn(x.v) > 0 ? x.u : mpz_class(-x.u);
  mpz_class Q = sgn(x.v) > 0 ? x.w : mpz_class(-x.w);
  {
    mpz_class rem = D - P * P;
    if (!mpz_divisible_p(rem.get_mpz_t(), Q.get_mpz_t())) {
      mpz_class aq = abs(Q);
      P *= aq;
      Q *= aq;
      D *= aq * aq;
    }
  }
  mpz_class s;
  mpz_sqrt(s.get_mpz_t(), D.get_mpz_t());
  // x is irrational, so floor(x) == 0 already means 0 < x < 1.
  if (floor_surd(P, Q, s) != 0) fail(ErrorKind::InputOutOfRange, "surd input must lie in (0,1)");
  DigitSeq out;
  out.source = SourceKind::Surd;
  // y = 1/x = (-P + sqrt(D)) / ((D - P^2)/Q)
  mpz_class nP = -P;
  mpz_class nQ = (D - P * P) / Q;
  P = nP;
  Q = nQ;
  while (out.digits.size() < n) {
    mpz_class a = floor_surd(P, Q, s);
    out.digits.push_back(checked_digit(a));
    mpz_class Pm = P - a * Q;  // y - a = (Pm + sqrt(D)) / Q
    mpz_class Qn = (D - Pm * Pm) / Q;
    P = -Pm;
    Q = Qn;
  }
  return out;
}

// Interval expansion on integers: x in [ln/ld, hn/hd].
DigitSeq expand_interval_impl(mpq_class lo, mpq_class hi, std::size_t n, SourceKind src) {
  DigitSeq out;
  out.source = src;
  if (lo > hi) std::swap(lo, hi);
  mpz_class ln = lo.get_num(), ld = lo.get_den();
  mpz_class hn = hi.get_num(), hd = hi.get_den();
  while (out.digits.size() < n) {
    if (sgn(ln) <= 0 || hn >= hd) {
      out.exhausted = true;
      break;
    }
    // 1/hi = hd/hn, 1/lo = ld/ln; need a < 1/hi <= 1/lo < a + 1.
    mpz_class a, r;
    mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), hd.get_mpz_t(), hn.get_mpz_t());
    if (r == 0) {
      out.exhausted = true;
      break;
    }
    mpz_class a2;
    mpz_fdiv_q(a2.get_mpz_t(), ld.get_mpz_t(), ln.get_mpz_t());
    mpz_class r2 = ld - a2 * ln;
    if (a2 != a || r2 == 0) {
      out.exhausted = true;
      break;
    }
    out.digits.push_back(checked_digit(a));
    // new lo = 1/hi - a = r/hn; new hi = 1/lo - a = r2/ln
    mpz_class nln = r, nld = hn, nhn = r2, nhd = ln;
    ln = nln;
    ld = nld;
    hn = nhn;
    hd = nhd;
  }
  return out;
}

}  // namespace

RationalInput parse_rational_input(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) fail(ErrorKind::Parse, "rational input must be 'p/q'");
  return {parse_z(text.substr(0, slash)), parse_z(text.substr(slash + 1))};
}

SurdInput parse_surd_input(std::string_view text) {
  std::string_view s = text;
  if (s.rfind("sqrt:", 0) == 0) s.remove_prefix(5);
  std::vector<mpz_class> parts;
  while (true) {
    auto comma = s.find(',');
    parts.push_back(parse_z(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (parts.size() != 4) fail(ErrorKind::Parse, "surd input must be 'sqrt:d,u,v,w'");
  return {parts[1], parts[2], parts[0], parts[3]};
}

SurdInput surd_fractional_sqrt(const mpz_class& d) {
  if (d <= 0) fail(ErrorKind::InputOutOfRange, "radicand must be positive");
  mpz_class s;
  mpz_sqrt(s.get_mpz_t(), d.get_mpz_t());
  return {mpz_class(-s), mpz_class(1), d, mpz_class(1)};
}

DigitSeq expand(const RealInput& x, std::size_t n) {
  if (n < 1) fail(ErrorKind::InputOutOfRange, "n must be >= 1");
  if (auto r = std::get_if<RationalInput>(&x)) return expand_rational(*r, n);
  if (auto s = std::get_if<SurdInput>(&x)) return expand_surd(*s, n);
  const auto& dec = std::get<DecimalInput>(x);
  unsigned long bits = dec.bits == 0 ? 4 * n + 64 : dec.bits;
  if (bits < 64) fail(ErrorKind::InputOutOfRange, "decimal inputs need a budget of at least 64 bits");
  mpq_class v = parse_exact(dec.text);
  if (v <= 0 || v >= 1) fail(ErrorKind::InputOutOfRange, "decimal input must lie in (0,1)");
  mpz_class two_b;
  mpz_ui_pow_ui(two_b.get_mpz_t(), 2, bits);
  mpq_class eps(mpz_class(1), two_b);
  return expand_interval_impl(v - eps, v + eps, n, SourceKind::Decimal);
}

DigitSeq expand_interval(const mpq_class& lo, const mpq_class& hi, std::size_t n) {
  return expand_interval_impl(lo, hi, n, SourceKind::Interval);
}

BigReal evaluate(const SurdInput& x, mpfr_prec_t prec) {
  BigReal d(x.d, MPFR_RNDN, prec);
  BigReal r = sqrt(d);
  BigReal v(x.v, MPFR_RNDN, prec), u(x.u, MPFR_RNDN, prec), w(x.w, MPFR_RNDN, prec);
  return div(add(u, mul(v, r)), w);
}

ContinuantTable continuants(std::span<const Digit> d) {
  if (d.empty()) fail(ErrorKind::InputOutOfRange, "continuants need at least one digit");
  ContinuantTable t;
  t.p_.reserve(d.size() + 2);
  t.q_.reserve(d.size() + 2);
  t.p_.emplace_back(1);
  t.q_.emplace_back(0);
  t.p_.emplace_back(0);
  t.q_.emplace_back(1);
  for (Digit a : d) {
    mpz_class az = from_u64(a);
    std::size_t k = t.q_.size();
    t.p_.push_back(az * t.p_[k - 1] + t.p_[k - 2]);
    t.q_.push_back(az * t.q_[k - 1] + t.q_[k - 2]);
  }
  return t;
}

mpz_class continuant(std::span<const Digit> d) {
  mpz_class q0 = 0, q1 = 1;
  for (Digit a : d) {
    mpz_class q2 = from_u64(a) * q1 + q0;
    q0 = std::move(q1);
    q1 = std::move(q2);
  }
  return q1;
}

BasicInterval basic_interval(std::span<const Digit> d) {
  ContinuantTable t = continuants(d);
  long n = t.order();
  BasicInterval out;
  out.order = static_cast<std::size_t>(n);
  out.digits.assign(d.begin(), d.end());
  mpq_class a(t.p(n), t.q(n));
  mpq_class b(t.p(n) + t.p(n - 1), t.q(n) + t.q(n - 1));
  a.canonicalize();
  b.canonicalize();
  out.left = a < b ? a : b;
  out.right = a < b ? b : a;
  out.length = mpq_class(mpz_class(1), t.q(n) * (t.q(n) + t.q(n - 1)));
  return out;
}

mpz_class run_continuant(Digit i, std::uint64_t n) {
  if (i < 1) fail(ErrorKind::InputOutOfRange, "digit must be >= 1");
  // (i + sqrt(D))^(n+1) = A + B sqrt(D), q_n = B / 2^n.
  mpz_class D = from_u64(i) * from_u64(i) + 4;
  mpz_class A = 1, B = 0;                // accumulator
  mpz_class bA = from_u64(i), bB = 1;    // base
  std::uint64_t e = n + 1;
  while (e > 0) {
    if (e & 1) {
      mpz_class nA = A * bA + D * B * bB;
      mpz_class nB = A * bB + B * bA;
      A = std::move(nA);
      B = std::move(nB);
    }
    e >>= 1;
    if (e > 0) {
      mpz_class nA = bA * bA + D * bB * bB;
      mpz_class nB = 2 * bA * bB;
      bA = std::move(nA);
      bB = std::move(nB);
    }
  }
  mpz_class q;
  mpz_tdiv_q_2exp(q.get_mpz_t(), B.get_mpz_t(), n);
  return q;
}

mpz_class run_continuant_recursive(Digit i, std::uint64_t n) {
  mpz_class q0 = 0, q1 = 1, iz = from_u64(i);
  for (std::uint64_t k = 0; k < n; ++k) {
    mpz_class q2 = iz * q1 + q0;
    q0 = std::move(q1);
    q1 = std::move(q2);
  }
  return q1;
}

mpq_class run_interval_length(Digit i, std::uint64_t m) {
  mpz_class qm = run_continuant(i, m);
  mpz_class qm1 = m == 0 ? mpz_class(0) : run_continuant(i, m - 1);
  return mpq_class(mpz_class(1), qm * (qm + qm1));
}

DigitSeq gauss_shift(const DigitSeq& d, std::size_t n) {
  if (n >= d.size()) fail(ErrorKind::Exhausted, "shift needs more certified digits than available");
  DigitSeq out;
  out.digits.assign(d.digits.begin() + static_cast<std::ptrdiff_t>(n), d.digits.end());
  out.exhausted = d.exhausted;
  out.source = d.source;
  return out;
}

QuadraticTarget target(Digit i, mpfr_prec_t prec) {
  if (i < 1) fail(ErrorKind::InputOutOfRange, "target digit must be >= 1");
  QuadraticTarget t;
  t.i = i;
  mpz_class iz = from_u64(i);
  mpz_class D = iz * iz + 4;
  t.y = SurdInput{mpz_class(-iz), mpz_class(1), D, mpz_class(2)};
  BigReal root = sqrt(BigReal(D, MPFR_RNDN, prec));
  BigReal ib(iz, MPFR_RNDN, prec);
  BigReal two(2.0, prec);
  t.tau = div(add(ib, root), two);
  t.zeta = div(sub(ib, root), two);
  t.g = log(t.tau);
  t.tau_d = t.tau.to_double();
  t.g_d = t.g.to_double();
  // Convergents p_k/q_k of y: p_k = Q_{k-1}, q_k = Q_k. Two consecutive
  // ones enclose y; depth chosen well past double precision.
  const std::uint64_t depth = 80;
  mpz_class qa = run_continuant_recursive(i, depth - 1), qb = run_continuant_recursive(i, depth);
  mpz_class qc = iz * qb + qa;
  mpq_class c1(qa, qb), c2(qb, qc);
  c1.canonicalize();
  c2.canonicalize();
  t.y_lo = c1 < c2 ? c1 : c2;
  t.y_hi = c1 < c2 ? c2 : c1;
  return t;
}

}  // namespace cfdim
