#pragma once

// Piecewise dimension formulas for the exponent and run-length sets.

#include <gmpxx.h>

#include <optional>
#include <string>

#include "cfdim/dim_solver.hpp"
#include "cfdim/exact.hpp"

namespace cfdim {

enum class TheoremKind { U_set, E_hat, E_joint, nu_level, FG, F };
std::string to_string(TheoremKind k);
TheoremKind parse_theorem_kind(const std::string& s);

struct TheoremParams {
  ExtRational nu_hat;  // U_set, E_hat, E_joint
  ExtRational nu;      // E_joint, nu_level
  mpq_class alpha = 0;  // FG, F
  mpq_class beta = 0;   // FG
  Digit i = 1;          // target digit for the exponent sets; FG and F use 1
};

struct TheoremResult {
  DimEstimate estimate;
  std::string branch;
  std::optional<mpq_class> argument;  // alpha-argument passed to the solver
};

// Exact alpha-arguments of the piecewise formulas.
mpq_class uniform_argument(const mpq_class& nu_hat);                       // 4v/(1+v)^2
mpq_class joint_argument(const mpq_class& nu_hat, const mpq_class& nu);    // v^2/((1+v)(v-w))
mpq_class level_argument(const mpq_class& nu);                             // v/(1+v)
mpq_class fg_argument(const mpq_class& alpha, const mpq_class& beta);     // b^2(1-a)/(b-a)
mpq_class f_argument(const mpq_class& alpha);                              // 4a(1-a)

// B = 0 evaluates the B -> infinity value through dim_full; a finite B uses
// spectral_dim on A_B (argument 1 then gives 0, the finite-B limit).
TheoremResult theorem_dims(TheoremKind kind, const TheoremParams& p, std::uint64_t B = 0,
                           const SolverOptions& opts = {});

}  // namespace cfdim
