#pragma once

// Minimal RAII handle around an MPFR value. Operations take an explicit
// rounding mode wherever a directed bound is needed.

#include <gmpxx.h>
#include <mpfr.h>

#include <string>

namespace cfdim {

mpfr_prec_t default_precision();
void set_default_precision(mpfr_prec_t bits);

class BigReal {
 public:
  explicit BigReal(mpfr_prec_t prec = default_precision());
  BigReal(double v, mpfr_prec_t prec = default_precision());
  BigReal(const mpz_class& z, mpfr_rnd_t rnd, mpfr_prec_t prec = default_precision());
  BigReal(const mpq_class& q, mpfr_rnd_t rnd, mpfr_prec_t prec = default_precision());
  BigReal(const BigReal& other);
  BigReal(BigReal&& other) noexcept;
  BigReal& operator=(const BigReal& other);
  BigReal& operator=(BigReal&& other) noexcept;
  ~BigReal();

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

  double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(v_, rnd); }
  // Decimal rendering with `digits` significant digits.
  std::string str(int digits = 20) const;

  int cmp(const BigReal& o) const { return mpfr_cmp(v_, o.v_); }
  bool operator<(const BigReal& o) const { return cmp(o) < 0; }
  bool operator<=(const BigReal& o) const { return cmp(o) <= 0; }
  bool operator>(const BigReal& o) const { return cmp(o) > 0; }
  bool operator>=(const BigReal& o) const { return cmp(o) >= 0; }

 private:
  mpfr_t v_;
};

BigReal add(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal sub(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal mul(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal mul(const BigReal& a, const mpq_class& q, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal mul(const BigReal& a, double d, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal div(const BigReal& a, const BigReal& b, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal log(const BigReal& a, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal sqrt(const BigReal& a, mpfr_rnd_t rnd = MPFR_RNDN);
BigReal pow(const BigReal& a, const BigReal& e, mpfr_rnd_t rnd = MPFR_RNDN);

// log of an exact positive integer / rational with directed rounding.
BigReal log_of(const mpz_class& z, mpfr_rnd_t rnd, mpfr_prec_t prec = default_precision());
BigReal log_of(const mpq_class& q, mpfr_rnd_t rnd, mpfr_prec_t prec = default_precision());

}  // namespace cfdim
