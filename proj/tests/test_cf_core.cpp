#include <doctest.h>

#include <random>

#include "cfdim/cf_core.hpp"
#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"

using namespace cfdim;

namespace {

// [a_1, ..., a_n] evaluated from the back.
mpq_class eval_back(std::span<const Digit> d, const mpq_class& tail = 0) {
  mpq_class x = tail;
  for (std::size_t k = d.size(); k-- > 0;) {
    x = 1 / (mpq_class(from_u64(d[k])) + x);
    x.canonicalize();
  }
  return x;
}

// Gauss-map iteration in high precision floating point.
Digits gauss_digits(BigReal x, std::size_t n) {
  Digits d;
  for (std::size_t k = 0; k < n; ++k) {
    BigReal y = div(BigReal(1.0, x.precision()), x);
    mpz_class a;
    mpfr_get_z(a.get_mpz_t(), y.get(), MPFR_RNDD);
    d.push_back(a.get_ui());
    x = sub(y, BigReal(a, MPFR_RNDN, x.precision()));
  }
  return d;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Parse;
}

}  // namespace

TEST_CASE("rational expansion terminates with the hand value") {
  DigitSeq d = expand(parse_rational_input("5/8"), 10);
  CHECK(d.exhausted);
  CHECK(d.digits == Digits{1, 1, 1, 2});
  CHECK(eval_back(d.span()) == mpq_class(5, 8));
}

TEST_CASE("rational expansion round-trips on random fractions") {
  std::mt19937_64 g(7);
  for (int t = 0; t < 300; ++t) {
    mpz_class q = static_cast<unsigned long>(2 + g() % 100000);
    mpz_class p = static_cast<unsigned long>(1 + g() % (q.get_ui() - 1));
    DigitSeq d = expand(RationalInput{p, q}, 1000);
    REQUIRE(d.exhausted);
    mpq_class x(p, q);
    x.canonicalize();
    CHECK(eval_back(d.span()) == x);
  }
}

TEST_CASE("rational expansion truncates to n digits") {
  DigitSeq d = expand(parse_rational_input("355/1000"), 2);
  CHECK(d.size() == 2);
  CHECK_FALSE(d.exhausted);
}

TEST_CASE("quadratic surds expand periodically") {
  CHECK(expand(surd_fractional_sqrt(2), 10).digits == Digits(10, 2));
  DigitSeq s3 = expand(surd_fractional_sqrt(3), 8);
  CHECK(s3.digits == Digits{1, 2, 1, 2, 1, 2, 1, 2});
  DigitSeq phi = expand(parse_surd_input("sqrt:5,-1,1,2"), 12);
  CHECK(phi.digits == Digits(12, 1));
  CHECK_FALSE(phi.exhausted);
}

TEST_CASE("surd digits agree with high-precision Gauss-map iteration") {
  for (const char* s : {"sqrt:7,-1,2,5", "sqrt:13,-3,1,2", "sqrt:19,0,1,5", "sqrt:103,-10,1,1"}) {
    SurdInput x = parse_surd_input(s);
    DigitSeq d = expand(x, 60);
    CHECK(d.digits == gauss_digits(evaluate(x, 3000), 60));
  }
}

TEST_CASE("decimal inputs give only certified digits") {
  DigitSeq d = expand(DecimalInput{"0.14159265358979", 200}, 100);
  DigitSeq r = expand(parse_rational_input("14159265358979/100000000000000"), 100);
  REQUIRE(d.size() <= r.size());
  CHECK(d.size() > 5);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] == r[k]);
  CHECK(d.exhausted);
}

TEST_CASE("input errors carry their kind") {
  CHECK(kind_of([] { parse_rational_input("5/x"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_rational_input("58"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_surd_input("sqrt:2,1"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { expand(parse_rational_input("9/8"), 5); }) == ErrorKind::InputOutOfRange);
  CHECK(kind_of([] { expand(parse_rational_input("1/2"), 0); }) == ErrorKind::InputOutOfRange);
  CHECK(kind_of([] { expand(surd_fractional_sqrt(16), 5); }) == ErrorKind::InputOutOfRange);
  CHECK(kind_of([] { make_digits({1, 0, 2}); }) == ErrorKind::InputOutOfRange);
}

TEST_CASE("continuants match back-evaluation of every prefix") {
  std::mt19937_64 g(11);
  for (int t = 0; t < 200; ++t) {
    Digits d(1 + g() % 40);
    for (auto& a : d) a = 1 + g() % 30;
    ContinuantTable ct = continuants(d);
    CHECK(ct.q(-1) == 0);
    CHECK(ct.q(0) == 1);
    for (std::size_t n = 1; n <= d.size(); ++n) {
      mpq_class c = eval_back(std::span<const Digit>(d).first(n));
      CHECK(c.get_num() == ct.p(static_cast<long>(n)));
      CHECK(c.get_den() == ct.q(static_cast<long>(n)));
    }
    CHECK(continuant(d) == ct.q(ct.order()));
  }
}

TEST_CASE("cylinder endpoints are the two extreme tails") {
  std::mt19937_64 g(5);
  for (int t = 0; t < 200; ++t) {
    Digits d(1 + g() % 12);
    for (auto& a : d) a = 1 + g() % 9;
    BasicInterval bi = basic_interval(d);
    // Tail 0 gives p_n/q_n, tail 1 gives (p_n + p_{n-1})/(q_n + q_{n-1}).
    mpq_class e0 = eval_back(d, 0), e1 = eval_back(d, 1);
    CHECK(std::min(e0, e1) == bi.left);
    CHECK(std::max(e0, e1) == bi.right);
    CHECK(bi.length == bi.right - bi.left);
    // Any extension lands inside.
    Digits ext = d;
    ext.push_back(1 + g() % 50);
    ext.push_back(1 + g() % 50);
    mpq_class y = eval_back(ext);
    CHECK(bi.left <= y);
    CHECK(y <= bi.right);
  }
}

TEST_CASE("run continuant closed form equals the recursion") {
  for (Digit i = 1; i <= 7; ++i)
    for (std::uint64_t n = 0; n <= 60; ++n) CHECK(run_continuant(i, n) == run_continuant_recursive(i, n));
  CHECK(run_continuant(1, 10) == 89);  // Fibonacci F_11
  CHECK(run_continuant(2, 4) == 29);   // Pell
  CHECK(run_interval_length(1, 3) == mpq_class(1, 3 * 5));
}

TEST_CASE("gauss shift drops leading digits") {
  DigitSeq d = make_digits({3, 1, 4, 1, 5});
  CHECK(gauss_shift(d, 2).digits == Digits{4, 1, 5});
  CHECK(kind_of([&] { gauss_shift(d, 5); }) == ErrorKind::Exhausted);
}

TEST_CASE("quadratic target is the fixed point with digits i,i,i,...") {
  for (Digit i : {1, 2, 3, 10}) {
    QuadraticTarget t = target(i, 512);
    BigReal y = evaluate(t.y, 512);
    // y^2 + i y - 1 = 0
    BigReal r = sub(add(mul(y, y), mul(y, static_cast<double>(i))), BigReal(1.0, 512));
    CHECK(std::abs(r.to_double()) < 1e-100);
    BigReal yw = evaluate(t.y, 4096);
    CHECK(BigReal(t.y_lo, MPFR_RNDN, 4096) < yw);
    CHECK(yw < BigReal(t.y_hi, MPFR_RNDN, 4096));
    CHECK(expand(t.y, 20).digits == Digits(20, i));
    CHECK(t.tau_d == doctest::Approx((i + std::sqrt(i * i + 4.0)) / 2).epsilon(1e-15));
    CHECK(t.g_d == doctest::Approx(std::log(t.tau_d)).epsilon(1e-15));
  }
}

TEST_CASE("exact parameter parsing") {
  CHECK(parse_exact("0.5") == mpq_class(1, 2));
  CHECK(parse_exact("3/9") == mpq_class(1, 3));
  CHECK(parse_param("0.333") == mpq_class(333, 1000));
  CHECK(parse_ext_param("inf").infinite);
  CHECK(to_string(parse_ext_param("2/4")) == "1/2");
  CHECK(rationalize(1.0 / 3.0) == mpq_class(1, 3));
  CHECK(kind_of([] { parse_exact("1/0"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_exact(""); }) == ErrorKind::Parse);
}
