#pragma once

// Pre-dimensional numbers, their limits in n and B, and the spectral
// (transfer-operator) solver.

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cfdim/cf_core.hpp"

namespace cfdim {

inline constexpr std::uint64_t kDefaultNodeBudget = 200000000ULL;

struct SolverOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
  int cheb_nodes = 32;
  bool parallel = true;
  // predim_tilde switches from enumeration to the transfer operator above
  // this many DFS nodes.
  std::uint64_t exact_node_limit = 2000000;
};

// Sum over A_B^{free_length} of (exp(scale_log) * q(w i^{tail_i}))^{-2 rho}.
struct SumKernelSpec {
  std::uint64_t free_length = 1;
  std::uint64_t tail_i = 0;
  Digit i = 1;
  double scale_log = 0;
};

struct LogSum {
  double value = 0;  // log of the sum
  double deriv = 0;  // d/d rho of the log-sum
};

// Number of DFS nodes sum_{k=1..free} B^k, saturated at uint64 max.
std::uint64_t dfs_nodes(std::uint64_t B, std::uint64_t free_length);

LogSum sum_power_deriv(std::uint64_t B, const SumKernelSpec& spec, double rho,
                       const SolverOptions& opts = {});
double sum_power(std::uint64_t B, const SumKernelSpec& spec, double rho,
                 const SolverOptions& opts = {});
// Single-threaded reference with one running accumulator.
LogSum sum_power_serial(std::uint64_t B, const SumKernelSpec& spec, double rho,
                        std::uint64_t node_budget = kDefaultNodeBudget);
// Same quantity through L_rho^{free} 1 evaluated at x_t.
double sum_power_transfer(std::uint64_t B, const SumKernelSpec& spec, double rho,
                          const SolverOptions& opts = {});

// Q_t = q_t(i,...,i) and x_t = Q_{t-1}/Q_t in double precision.
struct RunTail {
  double log_q = 0;
  double x = 0;
};
RunTail run_tail(Digit i, std::uint64_t t);

enum class Method { Enumerate, Spectral, Auto };
std::string to_string(Method m);

struct DimQuery {
  std::uint64_t B = 2;
  mpq_class alpha = 0;
  Digit i = 1;
  std::uint64_t n = 12;
  Method method = Method::Enumerate;
};

struct TracePoint {
  double param = 0;  // n or B
  double value = 0;
};

struct DimEstimate {
  double value = 0;
  double lo = 0, hi = 0;
  std::uint64_t n_used = 0, B_used = 0;
  std::string method;
  bool degenerate = false;
  double residual = 0;  // log-sum (or pressure balance) at the returned root
  double aitken = std::numeric_limits<double>::quiet_NaN();
  std::vector<TracePoint> trace;
};

DimEstimate predim_hat(const DimQuery& q, const SolverOptions& opts = {});
DimEstimate predim_s(const DimQuery& q, const SolverOptions& opts = {});
DimEstimate predim_tilde(std::uint64_t B, Digit i, std::uint64_t l, std::uint64_t tail_len,
                         const SolverOptions& opts = {}, Method method = Method::Auto);

enum class PredimKind { Hat, S };
enum class Extrapolation { Richardson, Aitken };

std::vector<std::uint64_t> default_n_schedule();
DimEstimate dim_limit(std::uint64_t B, const mpq_class& alpha, Digit i,
                      const std::vector<std::uint64_t>& n_schedule,
                      const SolverOptions& opts = {}, PredimKind kind = PredimKind::Hat,
                      Extrapolation ex = Extrapolation::Richardson);

double spectral_pressure(std::uint64_t B, double s, const SolverOptions& opts = {});
DimEstimate spectral_dim(std::uint64_t B, const mpq_class& alpha, Digit i,
                         const SolverOptions& opts = {});

std::vector<std::uint64_t> default_B_schedule();
DimEstimate dim_full(const mpq_class& alpha, Digit i,
                     const std::vector<std::uint64_t>& B_schedule = default_B_schedule(),
                     const SolverOptions& opts = {});

// x2 - (x2-x1)^2 / ((x2-x1)-(x1-x0)); returns x2 when the denominator vanishes.
double aitken(double x0, double x1, double x2);
// Value at h = 0 of the interpolating polynomial through (h_k, v_k).
double neville_at_zero(const std::vector<double>& h, const std::vector<double>& v);

}  // namespace cfdim
