#include <doctest.h>

#include <cmath>
#include <random>

#include "cfdim/cf_core.hpp"
#include "cfdim/dim_solver.hpp"
#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"
#include "cfdim/theorems.hpp"
#include "cfdim/transfer.hpp"

using namespace cfdim;

namespace {

// mpq_class(p, q) does not reduce; arithmetic expects canonical operands.
mpq_class frac(long p, long q) {
  mpq_class r(p, q);
  r.canonicalize();
  return r;
}

double log_z(const mpz_class& z) {
  long e = 0;
  double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(m) + static_cast<double>(e) * std::log(2.0);
}

// Brute-force log of sum over A_B^free of (exp(scale) q(w i^tail))^{-2 rho},
// with exact integer continuants.
double brute_log_sum(std::uint64_t B, std::uint64_t free, std::uint64_t tail, Digit i, double scale,
                     double rho) {
  std::vector<Digit> w(free, 1);
  std::vector<double> logs;
  while (true) {
    Digits d(w.begin(), w.end());
    d.insert(d.end(), tail, i);
    logs.push_back(-2.0 * rho * (scale + log_z(continuant(d))));
    std::size_t k = 0;
    while (k < free && w[k] == B) w[k++] = 1;
    if (k == free) break;
    ++w[k];
  }
  double mx = *std::max_element(logs.begin(), logs.end());
  long double acc = 0;
  for (double l : logs) acc += std::exp(static_cast<long double>(l - mx));
  return mx + static_cast<double>(std::log(acc));
}

// Plain bisection on the brute-force sum.
double brute_root(std::uint64_t B, std::uint64_t free, std::uint64_t tail, Digit i, double scale) {
  double lo = 0, hi = 2;
  while (brute_log_sum(B, free, tail, i, scale, hi) > 0) hi *= 2;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (brute_log_sum(B, free, tail, i, scale, mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double tau_log(Digit i) { return std::log((i + std::sqrt(double(i * i + 4))) / 2); }

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

TEST_CASE("sum_power hand values") {
  SumKernelSpec one{3, 2, 1, 0};
  CHECK(sum_power(1, one, 0.0) == doctest::Approx(0.0));
  SumKernelSpec two{2, 0, 1, 0};
  // q_2 over (1,1),(1,2),(2,1),(2,2) is 2,3,3,5.
  CHECK(sum_power(2, two, 1.0) == doctest::Approx(std::log(1.0 / 4 + 1.0 / 9 + 1.0 / 9 + 1.0 / 25)).epsilon(1e-14));
  CHECK(sum_power(2, two, 0.0) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("sum_power matches brute-force enumeration") {
  std::mt19937_64 g(3);
  for (int t = 0; t < 150; ++t) {
    const std::uint64_t B = 1 + g() % 4;
    SumKernelSpec s;
    s.free_length = 1 + g() % 6;
    s.tail_i = g() % 60;
    s.i = 1 + g() % 3;
    s.scale_log = (g() % 2) ? 0.0 : 0.1 * static_cast<double>(g() % 30);
    const double rho = 0.05 * static_cast<double>(g() % 40);
    const double want = brute_log_sum(B, s.free_length, s.tail_i, s.i, s.scale_log, rho);
    CHECK(sum_power(B, s, rho) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
    CHECK(sum_power_serial(B, s, rho).value == doctest::Approx(want).epsilon(1e-12).scale(1.0));
    CHECK(sum_power_transfer(B, s, rho) == doctest::Approx(want).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("parallel and serial kernels agree and the derivative is consistent") {
  SumKernelSpec s{11, 7, 2, 0.3};
  for (double rho : {0.2, 0.5, 0.9}) {
    LogSum par = sum_power_deriv(3, s, rho);
    LogSum ser = sum_power_serial(3, s, rho);
    CHECK(par.value == doctest::Approx(ser.value).epsilon(1e-13));
    CHECK(par.deriv == doctest::Approx(ser.deriv).epsilon(1e-12));
    const double h = 1e-6;
    const double fd = (sum_power(3, s, rho + h) - sum_power(3, s, rho - h)) / (2 * h);
    CHECK(par.deriv == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("sum_power decreases in rho towards minus infinity") {
  SumKernelSpec s{6, 3, 1, 0};
  double prev = sum_power(3, s, 0.0);
  for (double rho = 0.25; rho <= 8.0; rho += 0.25) {
    const double v = sum_power(3, s, rho);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < -20);
}

TEST_CASE("node budget is enforced") {
  SolverOptions opts;
  opts.node_budget = 1000;
  SumKernelSpec s{12, 0, 1, 0};
  CHECK(kind_of([&] { sum_power(2, s, 0.5, opts); }) == ErrorKind::BudgetExceeded);
  CHECK(kind_of([&] { predim_hat({2, 0, 1, 12, Method::Enumerate}, opts); }) == ErrorKind::BudgetExceeded);
  CHECK(dfs_nodes(2, 3) == 14);
  CHECK(dfs_nodes(10, 40) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("run tail closed form matches exact continuants") {
  for (Digit i : {1, 2, 5}) {
    for (std::uint64_t t : {0, 1, 2, 10, 40, 41, 60, 200, 1000}) {
      RunTail rt = run_tail(i, t);
      mpz_class Qt = run_continuant(i, t);
      CHECK(rt.log_q == doctest::Approx(log_z(Qt)).epsilon(1e-13).scale(1.0));
      if (t > 0) {
        mpq_class x(run_continuant(i, t - 1), Qt);
        CHECK(rt.x == doctest::Approx(x.get_d()).epsilon(1e-14));
      } else {
        CHECK(rt.x == 0.0);
      }
    }
  }
}

TEST_CASE("per-n numbers agree with bisection on the brute-force sum") {
  for (std::uint64_t B : {2, 3})
    for (Digit i : {1, 2})
      for (int a4 : {0, 1, 2}) {
        const mpq_class alpha = frac(a4, 4);
        const std::uint64_t n = B == 2 ? 9 : 6;
        const double scale = alpha.get_d() / (1 - alpha.get_d()) * n * tau_log(i);
        DimEstimate h = predim_hat({B, alpha, i, n, Method::Enumerate});
        CHECK(h.value == doctest::Approx(brute_root(B, n, 0, i, scale)).epsilon(1e-10));
        CHECK(h.lo <= h.value);
        CHECK(h.value <= h.hi);
        CHECK(h.hi - h.lo <= 1e-12);
        CHECK(std::abs(h.residual) <= 1e-9);
        const std::uint64_t t = static_cast<std::uint64_t>(std::floor(alpha.get_d() * n));
        DimEstimate s = predim_s({B, alpha, i, n, Method::Enumerate});
        CHECK(s.value == doctest::Approx(brute_root(B, n - t, t, i, 0.0)).epsilon(1e-10));
      }
}

TEST_CASE("per-n hand properties") {
  CHECK(predim_hat({1, mpq_class(1, 3), 1, 10, Method::Enumerate}).value == 0.0);
  CHECK(predim_s({1, mpq_class(1, 3), 1, 10, Method::Enumerate}).value == 0.0);
  CHECK(predim_tilde(1, 1, 10, 3).value == 0.0);
  const DimEstimate h0 = predim_hat({3, 0, 2, 8, Method::Enumerate});
  const DimEstimate s0 = predim_s({3, 0, 2, 8, Method::Enumerate});
  CHECK(h0.value == s0.value);
  CHECK(predim_tilde(3, 2, 8, 0, {}, Method::Enumerate).value == h0.value);
  const DimEstimate hh = predim_hat({3, mpq_class(1, 2), 1, 12, Method::Enumerate});
  const DimEstimate ss = predim_s({3, mpq_class(1, 2), 1, 12, Method::Enumerate});
  CHECK(std::abs(hh.value - ss.value) <= 0.05);
  CHECK(predim_tilde(3, 1, 12, 6, {}, Method::Enumerate).value == ss.value);
  CHECK(predim_tilde(3, 1, 12, 6, {}, Method::Spectral).value == doctest::Approx(ss.value).epsilon(1e-9));
  // Convergence from above at B = 2, alpha = 0.
  const DimEstimate b2 = predim_hat({2, 0, 1, 12, Method::Enumerate});
  CHECK(b2.value == doctest::Approx(brute_root(2, 12, 0, 1, 0.0)).epsilon(1e-10));
  CHECK(b2.value > 0.531);
  CHECK(predim_hat({2, 1, 1, 5, Method::Enumerate}).degenerate);
  CHECK(kind_of([] { predim_hat({0, 0, 1, 5, Method::Enumerate}); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { predim_hat({2, mpq_class(3, 2), 1, 5, Method::Enumerate}); }) == ErrorKind::OutOfRange);
}

TEST_CASE("Chebyshev interpolation reproduces smooth functions") {
  ChebyshevGrid grid(32);
  std::vector<double> f(grid.size());
  for (int k = 0; k < grid.size(); ++k) f[k] = 1.0 / (1.0 + grid.nodes()[k]);
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.999, 1.0}) CHECK(grid.interpolate(f, x) == doctest::Approx(1 / (1 + x)).epsilon(1e-14));
}

TEST_CASE("spectral pressure: golden-section case, monotone, and root") {
  const double logphi = std::log((1 + std::sqrt(5.0)) / 2);
  for (double s : {0.3, 0.5, 0.8, 1.2}) CHECK(spectral_pressure(1, s) == doctest::Approx(-2 * s * logphi).epsilon(1e-12));
  double prev = spectral_pressure(3, 0.0);
  CHECK(prev == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  for (double s = 0.1; s <= 1.5; s += 0.1) {
    const double p = spectral_pressure(3, s);
    CHECK(p < prev);
    prev = p;
  }
  DimEstimate e = spectral_dim(2, 0, 1);
  CHECK(std::abs(e.value - 0.5313) <= 0.0005);
  CHECK(std::abs(spectral_pressure(2, e.value)) < 1e-9);
}

TEST_CASE("transfer identity: L^R 1 at x_t equals the enumerated segment sum") {
  // sum_{w in A_B^R} q(w i^t)^{-2s} = Q_t^{-2s} (L_s^R 1)(x_t)
  ChebyshevGrid grid(32);
  for (std::uint64_t B : {2, 3}) {
    const double s = 0.6;
    TransferOperator op(B, s, grid);
    std::vector<double> f(grid.size(), 1.0), g(grid.size());
    for (std::uint64_t R = 1; R <= 6; ++R) {
      op.apply(f, g);
      f.swap(g);
      for (std::uint64_t t : {0, 3, 9}) {
        RunTail rt = run_tail(2, t);
        const double lhs = brute_log_sum(B, R, t, 2, 0.0, s);
        const double rhs = -2 * s * rt.log_q + std::log(grid.interpolate(f, rt.x));
        CHECK(rhs == doctest::Approx(lhs).epsilon(1e-11).scale(1.0));
      }
    }
  }
}

TEST_CASE("dimension limits, spectral roots and their agreement") {
  DimEstimate l1 = dim_limit(1, 0, 1, default_n_schedule());
  CHECK(l1.value == 0.0);
  DimEstimate l2 = dim_limit(2, 0, 1, default_n_schedule());
  CHECK(l2.value >= 0.525);
  CHECK(l2.value <= 0.537);
  CHECK(l2.lo <= l2.value);
  CHECK(l2.value <= l2.hi);
  CHECK(l2.trace.size() == 4);
  CHECK(std::isfinite(l2.aitken));
  const DimEstimate sp = spectral_dim(2, 0, 1);
  CHECK(std::abs(l2.value - sp.value) <= std::max(l2.hi - l2.lo, 1e-4));

  DimEstimate l3 = dim_limit(3, mpq_class(1, 2), 1, default_n_schedule());
  for (std::size_t k = 1; k < l3.trace.size(); ++k) CHECK(std::abs(l3.trace[k].value - l3.trace[k - 1].value) < 0.02);

  CHECK(kind_of([] { dim_limit(2, 0, 1, {10, 8}); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { spectral_dim(2, 1, 1); }) == ErrorKind::OutOfRange);
}

TEST_CASE("finite-alphabet values are non-increasing in alpha and increasing in B") {
  for (Digit i : {1, 2}) {
    double prev = 1.0;
    for (int k = 0; k <= 9; ++k) {
      const double v = spectral_dim(3, frac(k, 10), i).value;
      CHECK(v <= prev + 1e-12);
      CHECK(v > 0.0);
      prev = v;
    }
  }
  CHECK(spectral_dim(2, mpq_class(1, 5), 1).value >= spectral_dim(2, mpq_class(2, 5), 1).value);
  double prev = 0;
  for (std::uint64_t B = 1; B <= 8; ++B) {
    const double v = spectral_dim(B, mpq_class(1, 4), 1).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("B-extrapolated values: conventions and the approach to one half") {
  CHECK(dim_full(0, 1).value == 1.0);
  CHECK(dim_full(1, 1).value == 0.5);
  const DimEstimate q = dim_full(mpq_class(1, 4), 1);
  CHECK(q.value > 0.5);
  CHECK(q.value <= 1.0);
  CHECK(q.lo <= q.value);
  CHECK(q.value <= q.hi);
  CHECK(q.trace.size() == default_B_schedule().size());
  // Values move down toward 1/2 as alpha grows.
  const double a = dim_full(mpq_class(1, 2), 1).value;
  const double b = dim_full(mpq_class(9, 10), 1).value;
  const double c = dim_full(mpq_class(99, 100), 1).value;
  CHECK(q.value >= a);
  CHECK(a >= b);
  CHECK(b >= c - 0.01);
  CHECK(std::abs(c - 0.5) < std::abs(a - 0.5));
}

TEST_CASE("extrapolation helpers") {
  // Aitken is exact on x_n = L + C r^n.
  auto geo = [](int n) { return 0.7 + 0.3 * std::pow(0.5, n); };
  CHECK(aitken(geo(1), geo(2), geo(3)) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(aitken(1.0, 1.0, 1.0) == 1.0);
  // Neville is exact on quadratics in h.
  std::vector<double> h = {1.0 / 8, 1.0 / 10, 1.0 / 12};
  std::vector<double> v;
  for (double x : h) v.push_back(0.53 + 0.2 * x - 0.7 * x * x);
  CHECK(neville_at_zero(h, v) == doctest::Approx(0.53).epsilon(1e-13));
}

TEST_CASE("theorem anchors and otherwise branches") {
  auto ext = [](const char* s) { return parse_ext_param(s); };
  TheoremParams p;
  p.nu_hat = ext("0");
  CHECK(theorem_dims(TheoremKind::E_hat, p).estimate.value == 1.0);
  CHECK(theorem_dims(TheoremKind::U_set, p).estimate.value == 1.0);
  p.nu_hat = ext("1");
  CHECK(theorem_dims(TheoremKind::E_hat, p).estimate.value == 0.5);
  p.nu_hat = ext("3/2");
  CHECK(theorem_dims(TheoremKind::E_hat, p).estimate.value == 0.0);
  CHECK(theorem_dims(TheoremKind::E_hat, p).branch == "nu_hat > 1");
  p.nu_hat = ext("inf");
  CHECK(theorem_dims(TheoremKind::U_set, p).estimate.value == 0.0);

  TheoremParams f;
  f.alpha = 0;
  CHECK(theorem_dims(TheoremKind::F, f).estimate.value == 1.0);
  f.alpha = mpq_class(1, 2);
  CHECK(theorem_dims(TheoremKind::F, f).estimate.value == 0.5);
  f.alpha = mpq_class(3, 4);
  CHECK(theorem_dims(TheoremKind::F, f).estimate.value == 0.0);

  TheoremParams j;
  j.nu_hat = ext("1/2");
  j.nu = ext("1/2");
  CHECK(theorem_dims(TheoremKind::E_joint, j).estimate.value == 0.0);  // nu_hat > nu/(1+nu)
  j.nu = ext("0");
  j.nu_hat = ext("0");
  CHECK(theorem_dims(TheoremKind::E_joint, j).estimate.value == 1.0);

  TheoremParams fg;
  fg.alpha = mpq_class(1, 2);
  fg.beta = mpq_class(1, 2);
  CHECK(theorem_dims(TheoremKind::FG, fg).estimate.value == 0.0);
  fg.beta = 0;
  fg.alpha = 0;
  CHECK(theorem_dims(TheoremKind::FG, fg).estimate.value == 1.0);

  TheoremParams lv;
  lv.nu = ext("0");
  CHECK(theorem_dims(TheoremKind::nu_level, lv).estimate.value == 1.0);
  lv.nu = ext("inf");
  CHECK(theorem_dims(TheoremKind::nu_level, lv).estimate.value == 0.5);

  CHECK(kind_of([] { parse_theorem_kind("nope"); }) == ErrorKind::Parse);
}

TEST_CASE("theorem arguments and finite-B evaluation") {
  CHECK(uniform_argument(1) == 1);
  CHECK(uniform_argument(mpq_class(1, 3)) == mpq_class(3, 4));
  CHECK(joint_argument(mpq_class(1, 3), 1) == mpq_class(3, 4));
  CHECK(level_argument(1) == mpq_class(1, 2));
  CHECK(fg_argument(mpq_class(1, 3), mpq_class(1, 2)) == 1);  // boundary alpha = beta/(1+beta)
  CHECK(fg_argument(mpq_class(1, 4), mpq_class(1, 2)) == mpq_class(3, 4));
  CHECK(f_argument(mpq_class(1, 4)) == mpq_class(3, 4));
  CHECK(kind_of([] { joint_argument(1, 1); }) == ErrorKind::OutOfRange);

  TheoremParams lv;
  lv.nu = parse_ext_param("1");
  TheoremResult r = theorem_dims(TheoremKind::nu_level, lv, 4);
  CHECK(r.argument.has_value());
  CHECK(*r.argument == mpq_class(1, 2));
  CHECK(r.estimate.value == spectral_dim(4, mpq_class(1, 2), 1).value);
  double prev = 0;
  for (std::uint64_t B = 2; B <= 6; ++B) {
    const double v = theorem_dims(TheoremKind::nu_level, lv, B).estimate.value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("dimension formula identities on a grid") {
  // At nu = 2 nu_hat / (1 - nu_hat) the joint argument equals the uniform one,
  // and at beta = 2 alpha the FG argument equals 4 alpha (1 - alpha).
  for (int k = 1; k < 1000; ++k) {
    const mpq_class w = frac(k, 1000);
    const mpq_class v = 2 * w / (1 - w);
    CHECK(joint_argument(w, mpq_class(v)) == uniform_argument(w));
    const mpq_class a = frac(k, 2000);
    CHECK(fg_argument(a, mpq_class(2 * a)) == f_argument(a));
  }
}
