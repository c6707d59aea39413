#include "cfdim/bigreal.hpp"

#include <atomic>
#include <cstdlib>
#include <memory>

#include "cfdim/error.hpp"

namespace cfdim {

namespace {
std::atomic<mpfr_prec_t> g_precision{256};

mpfr_prec_t max_prec(const BigReal& a, const BigReal& b) {
  return a.precision() > b.precision() ? a.precision() : b.precision();
}
}  // namespace

mpfr_prec_t default_precision() { return g_precision.load(); }

void set_default_precision(mpfr_prec_t bits) {
  if (bits < 64 || bits > (1 << 20)) fail(ErrorKind::OutOfRange, "precision must be in [64, 2^20] bits");
  g_precision.store(bits);
}

BigReal::BigReal(mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_zero(v_, 1);
}

BigReal::BigReal(double v, mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_d(v_, v, MPFR_RNDN);
}

BigReal::BigReal(const mpz_class& z, mpfr_rnd_t rnd, mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_z(v_, z.get_mpz_t(), rnd);
}

BigReal::BigReal(const mpq_class& q, mpfr_rnd_t rnd, mpfr_prec_t prec) {
  mpfr_init2(v_, prec);
  mpfr_set_q(v_, q.get_mpq_t(), rnd);
}

BigReal::BigReal(const BigReal& other) {
  mpfr_init2(v_, other.precision());
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& other) noexcept {
  mpfr_init2(v_, other.precision());
  mpfr_swap(v_, other.v_);
}

BigReal& BigReal::operator=(const BigReal& other) {
  if (this != &other) {
    mpfr_set_prec(v_, other.precision());
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

BigReal& BigReal::operator=(BigReal&& other) noexcept {
  mpfr_swap(v_, other.v_);
  return *this;
}

BigReal::~BigReal() { mpfr_clear(v_); }

std::string BigReal::str(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", digits, v_);
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

BigReal add(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd) {
  BigReal r(max_prec(a, b));
  mpfr_add(r.get(), a.get(), b.get(), rnd);
  return r;
}

BigReal sub(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd) {
  BigReal r(max_prec(a, b));
  mpfr_sub(r.get(), a.get(), b.get(), rnd);
  return r;
}

BigReal mul(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd) {
  BigReal r(max_prec(a, b));
  mpfr_mul(r.get(), a.get(), b.get(), rnd);
  return r;
}

BigReal mul(const BigReal& a, const mpq_class& q, mpfr_rnd_t rnd) {
  BigReal r(a.precision());
  mpfr_mul_q(r.get(), a.get(), q.get_mpq_t(), rnd);
  return r;
}

BigReal mul(const BigReal& a, double d, mpfr_rnd_t rnd) {
  BigReal r(a.precision());
  mpfr_mul_d(r.get(), a.get(), d, rnd);
  return r;
}

BigReal div(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd) {
  BigReal r(max_prec(a, b));
  mpfr_div(r.get(), a.get(), b.get(), rnd);
  return r;
}

BigReal log(const BigReal& a, mpfr_rnd_t rnd) {
  BigReal r(a.precision());
  mpfr_log(r.get(), a.get(), rnd);
  return r;
}

BigReal sqrt(const BigReal& a, mpfr_rnd_t rnd) {
  BigReal r(a.precision());
  mpfr_sqrt(r.get(), a.get(), rnd);
  return r;
}

BigReal pow(const BigReal& a, const BigReal& e, mpfr_rnd_t rnd) {
  BigReal r(max_prec(a, e));
  mpfr_pow(r.get(), a.get(), e.get(), rnd);
  return r;
}

BigReal log_of(const mpz_class& z, mpfr_rnd_t rnd, mpfr_prec_t prec) {
  if (sgn(z) <= 0) fail(ErrorKind::InputOutOfRange, "log of non-positive integer");
  // Enclose z first so the log is directed even when z is wider than prec.
  BigReal x(z, rnd, prec + 32);
  BigReal r(prec);
  mpfr_log(r.get(), x.get(), rnd);
  return r;
}

BigReal log_of(const mpq_class& q, mpfr_rnd_t rnd, mpfr_prec_t prec) {
  if (sgn(q) <= 0) fail(ErrorKind::InputOutOfRange, "log of non-positive rational");
  BigReal x(q, rnd, prec + 32);
  BigReal r(prec);
  mpfr_log(r.get(), x.get(), rnd);
  return r;
}

}  // namespace cfdim
