#include "cfdim/dim_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"
#include "cfdim/parallel.hpp"
#include "cfdim/transfer.hpp"

namespace cfdim {

namespace {

constexpr double kRescaleAt = 1e200;
constexpr double kRescaleBy = 1e-200;
const double kLogRescale = std::log(1e200);

double log_tau(Digit i) {
  double di = static_cast<double>(i);
  return std::log((di + std::sqrt(di * di + 4.0)) / 2.0);
}

struct Neumaier {
  double sum = 0, comp = 0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct LeafParams {
  double tail_log_q;  // log Q_t + scale_log
  double tail_x;
  double rho;
  double shift;  // log q of the all-ones leaf, including the tail and scale
};

struct Accumulator {
  Neumaier terms, moments;  // sum t and sum (L - shift) t
};

// Walks the subtree below a node with continuants (qp, qc) * exp(lsc).
class Walker {
 public:
  Walker(std::uint64_t B, const LeafParams& lp) : B_(static_cast<double>(B)), lp_(lp) {}

  void walk(std::uint64_t depth_left, double qp, double qc, double lsc, Accumulator& acc) const {
    if (depth_left == 0) {
      leaf(qp, qc, lsc, acc);
      return;
    }
    if (qc > kRescaleAt) {
      qp *= kRescaleBy;
      qc *= kRescaleBy;
      lsc += kLogRescale;
    }
    if (depth_left == 1) {
      for (double a = 1; a <= B_; a += 1) leaf(qc, a * qc + qp, lsc, acc);
      return;
    }
    for (double a = 1; a <= B_; a += 1) walk(depth_left - 1, qc, a * qc + qp, lsc, acc);
  }

 private:
  void leaf(double qp, double qc, double lsc, Accumulator& acc) const {
    double L = std::log(qc + qp * lp_.tail_x) + lsc + lp_.tail_log_q - lp_.shift;
    double t = std::exp(-2.0 * lp_.rho * L);
    acc.terms.add(t);
    acc.moments.add(L * t);
  }

  double B_;
  LeafParams lp_;
};

void check_budget(std::uint64_t B, const SumKernelSpec& spec, std::uint64_t budget) {
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (spec.free_length < 1) fail(ErrorKind::OutOfRange, "free_length must be >= 1");
  if (spec.i < 1) fail(ErrorKind::OutOfRange, "target digit must be >= 1");
  std::uint64_t nodes = dfs_nodes(B, spec.free_length);
  if (nodes > budget)
    fail(ErrorKind::BudgetExceeded, "enumeration needs " + std::to_string(nodes) +
                                        " nodes, budget " + std::to_string(budget));
}

LeafParams leaf_params(const SumKernelSpec& spec, double rho) {
  RunTail tail = run_tail(spec.i, spec.tail_i);
  LeafParams lp{tail.log_q + spec.scale_log, tail.x, rho, 0.0};
  // all-ones word of length free: q = F_{free+1}, q_prev = F_free
  double qp = 1, qc = 1, lsc = 0;
  for (std::uint64_t k = 1; k < spec.free_length; ++k) {
    double nq = qc + qp;
    qp = qc;
    qc = nq;
    if (qc > kRescaleAt) {
      qp *= kRescaleBy;
      qc *= kRescaleBy;
      lsc += kLogRescale;
    }
  }
  lp.shift = std::log(qc + qp * tail.x) + lsc + lp.tail_log_q;
  return lp;
}

LogSum finish(const Accumulator& acc, const LeafParams& lp) {
  double s = acc.terms.value();
  double m = acc.moments.value();
  return {-2.0 * lp.rho * lp.shift + std::log(s), -2.0 * (lp.shift + m / s)};
}

// B = 1 has a single word; no tree to walk.
LogSum single_word(const SumKernelSpec& spec, double rho) {
  LeafParams lp = leaf_params(spec, rho);
  return {-2.0 * rho * lp.shift, -2.0 * lp.shift};
}

std::uint64_t ipow_sat(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  for (std::uint64_t k = 0; k < e; ++k) {
    if (r > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
    r *= b;
  }
  return r;
}

}  // namespace

std::uint64_t dfs_nodes(std::uint64_t B, std::uint64_t free_length) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (B == 1) return free_length;
  std::uint64_t total = 0, level = 1;
  for (std::uint64_t k = 1; k <= free_length; ++k) {
    if (level > kMax / B) return kMax;
    level *= B;
    if (total > kMax - level) return kMax;
    total += level;
  }
  return total;
}

RunTail run_tail(Digit i, std::uint64_t t) {
  if (t == 0) return {0.0, 0.0};
  double di = static_cast<double>(i);
  if (t <= 40) {
    // direct recurrence; exact in double while Q_t < 2^53 and accurate after
    double qp = 1, qc = di;
    for (std::uint64_t k = 1; k < t; ++k) {
      double nq = di * qc + qp;
      qp = qc;
      qc = nq;
    }
    return {std::log(qc), qp / qc};
  }
  double D = di * di + 4.0;
  double tau = (di + std::sqrt(D)) / 2.0;
  double ratio = -1.0 / (tau * tau);  // zeta / tau
  double rt = std::pow(ratio, static_cast<double>(t));
  double rt1 = rt * ratio;
  double log_q = static_cast<double>(t + 1) * std::log(tau) - 0.5 * std::log(D) + std::log1p(-rt1);
  double x = (1.0 / tau) * (1.0 - rt) / (1.0 - rt1);
  return {log_q, x};
}

LogSum sum_power_serial(std::uint64_t B, const SumKernelSpec& spec, double rho,
                        std::uint64_t node_budget) {
  if (rho < 0) fail(ErrorKind::OutOfRange, "rho must be >= 0");
  check_budget(B, spec, node_budget);
  if (B == 1) return single_word(spec, rho);
  LeafParams lp = leaf_params(spec, rho);
  Accumulator acc;
  Walker(B, lp).walk(spec.free_length, 0.0, 1.0, 0.0, acc);
  return finish(acc, lp);
}

LogSum sum_power_deriv(std::uint64_t B, const SumKernelSpec& spec, double rho,
                       const SolverOptions& opts) {
  if (!opts.parallel) return sum_power_serial(B, spec, rho, opts.node_budget);
  if (rho < 0) fail(ErrorKind::OutOfRange, "rho must be >= 0");
  check_budget(B, spec, opts.node_budget);
  if (B == 1) return single_word(spec, rho);

  // Fixed prefix partition, independent of the thread count, so the
  // reduction order (and the result) never depends on scheduling.
  std::uint64_t depth = 1;
  while (depth < spec.free_length && ipow_sat(B, depth) < 256) ++depth;
  const std::uint64_t parts = ipow_sat(B, depth);
  LeafParams lp = leaf_params(spec, rho);
  Walker walker(B, lp);
  std::vector<Accumulator> partial(parts);

  const int nt = threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt) if (nt != 1)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(parts); ++idx) {
    // digits of idx in base B, most significant first
    std::vector<std::uint64_t> digits(depth);
    std::uint64_t rest = static_cast<std::uint64_t>(idx);
    for (std::uint64_t k = depth; k-- > 0;) {
      digits[k] = rest % B + 1;
      rest /= B;
    }
    double qp = 0, qc = 1, lsc = 0;
    for (std::uint64_t a : digits) {
      double nq = static_cast<double>(a) * qc + qp;
      qp = qc;
      qc = nq;
      if (qc > kRescaleAt) {
        qp *= kRescaleBy;
        qc *= kRescaleBy;
        lsc += kLogRescale;
      }
    }
    walker.walk(spec.free_length - depth, qp, qc, lsc, partial[static_cast<std::size_t>(idx)]);
  }
  Accumulator total;
  for (const auto& p : partial) {
    total.terms.add(p.terms.sum);
    total.terms.add(p.terms.comp);
    total.moments.add(p.moments.sum);
    total.moments.add(p.moments.comp);
  }
  return finish(total, lp);
}

double sum_power(std::uint64_t B, const SumKernelSpec& spec, double rho, const SolverOptions& opts) {
  return sum_power_deriv(B, spec, rho, opts).value;
}

double sum_power_transfer(std::uint64_t B, const SumKernelSpec& spec, double rho,
                          const SolverOptions& opts) {
  if (rho < 0) fail(ErrorKind::OutOfRange, "rho must be >= 0");
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (spec.free_length < 1) fail(ErrorKind::OutOfRange, "free_length must be >= 1");
  RunTail tail = run_tail(spec.i, spec.tail_i);
  ChebyshevGrid grid(opts.cheb_nodes);
  TransferOperator op(B, rho, grid);
  Orbit orbit(op, std::vector<double>(grid.size(), 1.0), spec.free_length);
  return -2.0 * rho * (tail.log_q + spec.scale_log) + orbit.log_value(spec.free_length, tail.x);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Enumerate: return "enumerate";
    case Method::Spectral: return "spectral";
    case Method::Auto: return "auto";
  }
  return "?";
}

namespace {

struct Root {
  double value = 0, lo = 0, hi = 0, residual = 0;
};

constexpr double kPerNTol = 1e-12;
constexpr double kSpectralTol = 1e-10;

// Root of a convex, strictly decreasing f with f(0) > 0. Newton steps from
// the left endpoint stay left of the root; a probe just past the Newton
// point closes the bracket.
Root newton_root(const std::function<LogSum(double)>& f, LogSum f0, double tol) {
  double hi = 2.0;
  LogSum fhi = f(hi);
  while (fhi.value > 0) {
    hi *= 2.0;
    if (hi > 1e6) fail(ErrorKind::NoConvergence, "root bracket expansion failed");
    fhi = f(hi);
  }
  double lo = 0.0;
  LogSum flo = f0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double x = lo - flo.value / flo.deriv;
    if (!(x > lo && x < hi) || !std::isfinite(x)) x = 0.5 * (lo + hi);
    if (x - lo < 0.25 * tol) {
      double probe = std::min(x + 0.5 * tol, 0.5 * (x + hi));
      LogSum fp = f(probe);
      if (fp.value <= 0) {
        hi = probe;
      } else {
        lo = probe;
        flo = fp;
      }
      continue;
    }
    LogSum fx = f(x);
    if (fx.value > 0) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
  }
  if (hi - lo > tol) fail(ErrorKind::NoConvergence, "root finder did not converge");
  double v = std::clamp(lo - flo.value / flo.deriv, lo, hi);
  return {v, lo, hi, f(v).value};
}

// Root of a strictly decreasing f on [lo, hi] with f(lo) > 0 >= f(hi);
// Illinois false position with a bisection fallback.
Root illinois_root(const std::function<double(double)>& f, double lo, double flo, double hi,
                   double fhi, double tol) {
  int side = 0;
  double width = hi - lo;
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (it % 3 == 2 && hi - lo > 0.5 * width) x = 0.5 * (lo + hi);
    if (it % 3 == 2) width = hi - lo;
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    double fx = f(x);
    if (fx > 0) {
      lo = x;
      flo = fx;
      if (side == 1) fhi *= 0.5;
      side = 1;
    } else {
      hi = x;
      fhi = fx;
      if (side == -1) flo *= 0.5;
      side = -1;
    }
  }
  if (hi - lo > tol) fail(ErrorKind::NoConvergence, "root finder did not converge");
  double v = 0.5 * (lo + hi);
  return {v, lo, hi, f(v)};
}

DimEstimate degenerate_zero(std::uint64_t n, std::uint64_t B, const std::string& method) {
  DimEstimate e;
  e.n_used = n;
  e.B_used = B;
  e.method = method;
  e.degenerate = true;
  return e;
}

DimEstimate solve_kernel(std::uint64_t B, const SumKernelSpec& spec, std::uint64_t n,
                         Method method, const SolverOptions& opts) {
  DimEstimate e;
  e.n_used = n;
  e.B_used = B;
  if (method == Method::Auto)
    method = dfs_nodes(B, spec.free_length) <= opts.exact_node_limit ? Method::Enumerate
                                                                    : Method::Spectral;
  // At rho = 0 every summand is 1.
  double f0 = static_cast<double>(spec.free_length) * std::log(static_cast<double>(B));
  if (f0 <= 0) {
    e.method = method == Method::Enumerate ? "enumerate" : "transfer";
    return e;
  }
  Root r;
  if (method == Method::Enumerate) {
    e.method = "enumerate";
    check_budget(B, spec, opts.node_budget);
    auto f = [&](double rho) { return sum_power_deriv(B, spec, rho, opts); };
    r = newton_root(f, f(0.0), kPerNTol);
  } else {
    e.method = "transfer";
    auto f = [&](double rho) { return sum_power_transfer(B, spec, rho, opts); };
    double hi = 2.0, fhi = f(hi);
    while (fhi > 0) {
      hi *= 2.0;
      if (hi > 1e6) fail(ErrorKind::NoConvergence, "root bracket expansion failed");
      fhi = f(hi);
    }
    r = illinois_root(f, 0.0, f0, hi, fhi, kPerNTol);
  }
  e.value = r.value;
  e.lo = r.lo;
  e.hi = r.hi;
  e.residual = r.residual;
  return e;
}

void check_query(const DimQuery& q) {
  if (q.B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (q.alpha < 0 || q.alpha > 1) fail(ErrorKind::OutOfRange, "alpha must lie in [0,1]");
  if (q.i < 1) fail(ErrorKind::OutOfRange, "target digit must be >= 1");
  if (q.n < 1) fail(ErrorKind::OutOfRange, "order n must be >= 1");
}

}  // namespace

DimEstimate predim_hat(const DimQuery& q, const SolverOptions& opts) {
  check_query(q);
  if (q.alpha == 1) return degenerate_zero(q.n, q.B, to_string(q.method));
  double a = nearest_double(q.alpha);
  SumKernelSpec spec;
  spec.free_length = q.n;
  spec.i = q.i;
  spec.scale_log = a / (1.0 - a) * static_cast<double>(q.n) * log_tau(q.i);
  return solve_kernel(q.B, spec, q.n, q.method, opts);
}

DimEstimate predim_s(const DimQuery& q, const SolverOptions& opts) {
  check_query(q);
  mpz_class tail = floor_q(mpq_class(q.alpha * mpq_class(from_u64(q.n))));
  std::uint64_t t = *to_u64(tail);
  if (t >= q.n) return degenerate_zero(q.n, q.B, to_string(q.method));
  SumKernelSpec spec;
  spec.free_length = q.n - t;
  spec.tail_i = t;
  spec.i = q.i;
  return solve_kernel(q.B, spec, q.n, q.method, opts);
}

DimEstimate predim_tilde(std::uint64_t B, Digit i, std::uint64_t l, std::uint64_t tail_len,
                         const SolverOptions& opts, Method method) {
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (i < 1) fail(ErrorKind::OutOfRange, "target digit must be >= 1");
  if (tail_len > l) fail(ErrorKind::OutOfRange, "tail longer than the segment");
  if (tail_len == l) return degenerate_zero(l, B, to_string(method));
  SumKernelSpec spec;
  spec.free_length = l - tail_len;
  spec.tail_i = tail_len;
  spec.i = i;
  return solve_kernel(B, spec, l, method, opts);
}

double aitken(double x0, double x1, double x2) {
  double d1 = x1 - x0, d2 = x2 - x1;
  double den = d2 - d1;
  if (den == 0.0 || !std::isfinite(den)) return x2;
  double r = x2 - d2 * d2 / den;
  return std::isfinite(r) ? r : x2;
}

double neville_at_zero(const std::vector<double>& h, const std::vector<double>& v) {
  std::vector<double> p = v;
  const std::size_t m = h.size();
  for (std::size_t k = 1; k < m; ++k)
    for (std::size_t j = 0; j + k < m; ++j)
      p[j] = (h[j + k] * p[j] - h[j] * p[j + 1]) / (h[j + k] - h[j]);
  return p[0];
}

std::vector<std::uint64_t> default_n_schedule() { return {8, 10, 12, 14}; }

namespace {
DimEstimate extrapolated(std::vector<TracePoint> trace, double ext, double aitken_value) {
  DimEstimate e;
  double last = trace.back().value;
  double d = std::abs(last - ext);
  e.value = std::clamp(ext, 0.0, 1.0) + 0.0;
  e.lo = std::max(0.0, std::min(e.value, last - d));
  e.hi = std::min(1.0, std::max(e.value, last + d));
  e.aitken = aitken_value;
  e.trace = std::move(trace);
  return e;
}
}  // namespace

DimEstimate dim_limit(std::uint64_t B, const mpq_class& alpha, Digit i,
                      const std::vector<std::uint64_t>& n_schedule, const SolverOptions& opts,
                      PredimKind kind, Extrapolation ex) {
  if (n_schedule.empty()) fail(ErrorKind::OutOfRange, "empty n schedule");
  for (std::size_t k = 1; k < n_schedule.size(); ++k)
    if (n_schedule[k] <= n_schedule[k - 1]) fail(ErrorKind::OutOfRange, "n schedule must increase");
  std::vector<TracePoint> trace;
  bool degenerate = false;
  for (std::uint64_t n : n_schedule) {
    DimQuery q{B, alpha, i, n, Method::Enumerate};
    DimEstimate e = kind == PredimKind::Hat ? predim_hat(q, opts) : predim_s(q, opts);
    degenerate = degenerate || e.degenerate;
    trace.push_back({static_cast<double>(n), e.value});
  }
  const std::size_t m = trace.size();
  double ait = std::numeric_limits<double>::quiet_NaN();
  if (m >= 3) ait = aitken(trace[m - 3].value, trace[m - 2].value, trace[m - 1].value);
  double rich = trace.back().value;
  if (m >= 2) {
    std::vector<double> h, v;
    for (std::size_t k = m >= 3 ? m - 3 : 0; k < m; ++k) {
      h.push_back(1.0 / trace[k].param);
      v.push_back(trace[k].value);
    }
    rich = neville_at_zero(h, v);
  }
  double ext = ex == Extrapolation::Richardson ? rich : (std::isnan(ait) ? trace.back().value : ait);
  DimEstimate e = extrapolated(std::move(trace), ext, ait);
  e.n_used = n_schedule.back();
  e.B_used = B;
  e.degenerate = degenerate;
  e.method = ex == Extrapolation::Richardson ? "richardson" : "aitken";
  return e;
}

double spectral_pressure(std::uint64_t B, double s, const SolverOptions& opts) {
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (!(s >= 0)) fail(ErrorKind::OutOfRange, "exponent must be >= 0");
  ChebyshevGrid grid(opts.cheb_nodes);
  TransferOperator op(B, s, grid);
  return leading_eigen(op, 1e-13).log_lambda;
}

DimEstimate spectral_dim(std::uint64_t B, const mpq_class& alpha, Digit i, const SolverOptions& opts) {
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (alpha < 0 || alpha >= 1) fail(ErrorKind::OutOfRange, "alpha must lie in [0,1)");
  if (i < 1) fail(ErrorKind::OutOfRange, "target digit must be >= 1");
  DimEstimate e;
  e.B_used = B;
  e.method = "spectral";
  if (B == 1) return e;  // P(0) = 0 and P decreases
  double a = nearest_double(alpha);
  double c = 2.0 * a / (1.0 - a) * log_tau(i);
  auto f = [&](double s) { return spectral_pressure(B, s, opts) - s * c; };
  double f0 = std::log(static_cast<double>(B));
  double f1 = f(1.0);
  if (!(f1 < 0)) fail(ErrorKind::NoConvergence, "pressure does not change sign on [0,1]");
  Root r = illinois_root(f, 0.0, f0, 1.0, f1, kSpectralTol);
  e.value = r.value;
  e.lo = r.lo;
  e.hi = r.hi;
  e.residual = r.residual;
  return e;
}

std::vector<std::uint64_t> default_B_schedule() { return {16, 32, 64, 128, 256, 512, 1024, 2048}; }

DimEstimate dim_full(const mpq_class& alpha, Digit i, const std::vector<std::uint64_t>& B_schedule,
                     const SolverOptions& opts) {
  if (alpha < 0 || alpha > 1) fail(ErrorKind::OutOfRange, "alpha must lie in [0,1]");
  if (B_schedule.empty()) fail(ErrorKind::OutOfRange, "empty B schedule");
  for (std::size_t k = 1; k < B_schedule.size(); ++k)
    if (B_schedule[k] <= B_schedule[k - 1]) fail(ErrorKind::OutOfRange, "B schedule must increase");
  if (alpha == 1) {
    DimEstimate e;
    e.value = e.lo = e.hi = 0.5;
    e.method = "convention";
    return e;
  }
  std::vector<TracePoint> trace;
  for (std::uint64_t B : B_schedule)
    trace.push_back({static_cast<double>(B), spectral_dim(B, alpha, i, opts).value});
  if (alpha == 0) {
    DimEstimate e;
    e.value = e.lo = e.hi = 1.0;
    e.method = "convention";
    e.B_used = B_schedule.back();
    e.trace = std::move(trace);
    return e;
  }
  const std::size_t m = trace.size();
  double ext = m >= 3 ? aitken(trace[m - 3].value, trace[m - 2].value, trace[m - 1].value)
                      : trace.back().value;
  DimEstimate e = extrapolated(std::move(trace), ext, m >= 3 ? ext : std::numeric_limits<double>::quiet_NaN());
  e.B_used = B_schedule.back();
  e.method = "B-extrapolation";
  return e;
}

}  // namespace cfdim
