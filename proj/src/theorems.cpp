#include "cfdim/theorems.hpp"

#include "cfdim/error.hpp"

namespace cfdim {

std::string to_string(TheoremKind k) {
  switch (k) {
    case TheoremKind::U_set: return "U_set";
    case TheoremKind::E_hat: return "E_hat";
    case TheoremKind::E_joint: return "E_joint";
    case TheoremKind::nu_level: return "nu_level";
    case TheoremKind::FG: return "FG";
    case TheoremKind::F: return "F";
  }
  return "?";
}

TheoremKind parse_theorem_kind(const std::string& s) {
  for (auto k : {TheoremKind::U_set, TheoremKind::E_hat, TheoremKind::E_joint, TheoremKind::nu_level,
                 TheoremKind::FG, TheoremKind::F})
    if (to_string(k) == s) return k;
  fail(ErrorKind::Parse, "unknown theorem kind '" + s + "'");
}

mpq_class uniform_argument(const mpq_class& v) {
  mpq_class d = 1 + v;
  return mpq_class(4 * v / (d * d));
}

mpq_class joint_argument(const mpq_class& w, const mpq_class& v) {
  if (v <= w) fail(ErrorKind::OutOfRange, "joint argument needs nu > nu_hat");
  return mpq_class(v * v / ((1 + v) * (v - w)));
}

mpq_class level_argument(const mpq_class& v) { return mpq_class(v / (1 + v)); }

mpq_class fg_argument(const mpq_class& a, const mpq_class& b) {
  if (b <= a) fail(ErrorKind::OutOfRange, "FG argument needs beta > alpha");
  return mpq_class(b * b * (1 - a) / (b - a));
}

mpq_class f_argument(const mpq_class& a) { return mpq_class(4 * a * (1 - a)); }

namespace {

TheoremResult exact_value(double v, const std::string& branch) {
  TheoremResult r;
  r.estimate.value = r.estimate.lo = r.estimate.hi = v;
  r.estimate.method = "exact";
  r.branch = branch;
  return r;
}

TheoremResult solve(const mpq_class& arg, Digit i, std::uint64_t B, const std::string& branch,
                    const SolverOptions& opts) {
  TheoremResult r;
  r.branch = branch;
  r.argument = arg;
  if (B == 0) {
    r.estimate = dim_full(arg, i, default_B_schedule(), opts);
  } else if (arg == 1) {
    r.estimate.B_used = B;
    r.estimate.method = "spectral";
    r.estimate.degenerate = true;
  } else {
    r.estimate = spectral_dim(B, arg, i, opts);
  }
  return r;
}

void need_finite_nonneg(const ExtRational& v, const char* name) {
  if (!v.infinite && v.value < 0) fail(ErrorKind::OutOfRange, std::string(name) + " must be >= 0");
}

}  // namespace

TheoremResult theorem_dims(TheoremKind kind, const TheoremParams& p, std::uint64_t B,
                           const SolverOptions& opts) {
  if (p.i < 1) fail(ErrorKind::OutOfRange, "target digit must be >= 1");
  switch (kind) {
    case TheoremKind::U_set:
    case TheoremKind::E_hat: {
      need_finite_nonneg(p.nu_hat, "nu_hat");
      if (p.nu_hat.infinite || p.nu_hat.value > 1) return exact_value(0.0, "nu_hat > 1");
      if (p.nu_hat.value == 0) {
        TheoremResult r = exact_value(1.0, "0 <= nu_hat <= 1");
        r.argument = mpq_class(0);
        if (B != 0) r = solve(0, p.i, B, r.branch, opts);
        return r;
      }
      return solve(uniform_argument(p.nu_hat.value), p.i, B, "0 <= nu_hat <= 1", opts);
    }
    case TheoremKind::E_joint: {
      need_finite_nonneg(p.nu_hat, "nu_hat");
      need_finite_nonneg(p.nu, "nu");
      if (p.nu_hat.infinite) {
        if (!p.nu.infinite) fail(ErrorKind::OutOfRange, "nu_hat must not exceed nu");
        return exact_value(0.0, "otherwise");
      }
      if (!p.nu.infinite && p.nu_hat.value > p.nu.value)
        fail(ErrorKind::OutOfRange, "nu_hat must not exceed nu");
      if (!p.nu.infinite && p.nu.value == 0) {
        TheoremResult r = exact_value(1.0, "nu = 0");
        if (B != 0) r = solve(0, p.i, B, r.branch, opts);
        return r;
      }
      const mpq_class& w = p.nu_hat.value;
      if (p.nu.infinite) {
        // nu/(1+nu) -> 1 and the argument is 1 by convention
        if (w <= 1) return solve(1, p.i, B, "nu = infinity", opts);
        return exact_value(0.0, "otherwise");
      }
      const mpq_class& v = p.nu.value;
      if (w <= v / (1 + v)) return solve(joint_argument(w, v), p.i, B, "0 <= nu_hat <= nu/(1+nu) < nu", opts);
      return exact_value(0.0, "otherwise");
    }
    case TheoremKind::nu_level: {
      need_finite_nonneg(p.nu, "nu");
      if (p.nu.infinite) return solve(1, p.i, B, "nu = infinity", opts);
      if (p.nu.value == 0) {
        TheoremResult r = exact_value(1.0, "nu >= 0");
        r.argument = mpq_class(0);
        if (B != 0) r = solve(0, p.i, B, r.branch, opts);
        return r;
      }
      return solve(level_argument(p.nu.value), p.i, B, "nu >= 0", opts);
    }
    case TheoremKind::FG: {
      const mpq_class& a = p.alpha;
      const mpq_class& b = p.beta;
      if (a < 0 || a > 1 || b < 0 || b > 1) fail(ErrorKind::OutOfRange, "alpha, beta must lie in [0,1]");
      if (b == 0) {
        TheoremResult r = exact_value(1.0, "beta = 0");
        if (B != 0) r = solve(0, 1, B, r.branch, opts);
        return r;
      }
      if (a <= b / (1 + b) && b / (1 + b) < b) return solve(fg_argument(a, b), 1, B, "0 <= alpha <= beta/(1+beta) < beta <= 1", opts);
      return exact_value(0.0, "otherwise");
    }
    case TheoremKind::F: {
      const mpq_class& a = p.alpha;
      if (a < 0 || a > 1) fail(ErrorKind::OutOfRange, "alpha must lie in [0,1]");
      if (a <= mpq_class(1, 2)) {
        if (a == 0 && B == 0) {
          TheoremResult r = exact_value(1.0, "0 <= alpha <= 1/2");
          r.argument = mpq_class(0);
          return r;
        }
        return solve(f_argument(a), 1, B, "0 <= alpha <= 1/2", opts);
      }
      return exact_value(0.0, "otherwise");
    }
  }
  fail(ErrorKind::OutOfRange, "unknown theorem kind");
}

}  // namespace cfdim
