#pragma once

// Chebyshev collocation of the Gauss-map transfer operator restricted to
// the alphabet {1..B}:  (L_s f)(x) = sum_{a<=B} (a+x)^{-2s} f(1/(a+x)).

#include <cstdint>
#include <vector>

namespace cfdim {

class ChebyshevGrid {
 public:
  explicit ChebyshevGrid(int n = 32);

  int size() const { return n_; }
  const std::vector<double>& nodes() const { return x_; }

  double interpolate(const double* f, double x) const;
  double interpolate(const std::vector<double>& f, double x) const { return interpolate(f.data(), x); }
  // Row r with r . f == interpolate(f, x).
  void basis_row(double x, double* row) const;

 private:
  int n_;
  std::vector<double> x_, w_;
};

class TransferOperator {
 public:
  TransferOperator(std::uint64_t B, double s, const ChebyshevGrid& grid);

  std::uint64_t alphabet() const { return B_; }
  double exponent() const { return s_; }
  const ChebyshevGrid& grid() const { return *grid_; }

  // Nodal values of L f from nodal values of f.
  void apply(const std::vector<double>& f, std::vector<double>& out) const;
  // (L f)(x) at an arbitrary point, f given by nodal values. O(B N).
  double apply_at(const std::vector<double>& f, double x) const;

 private:
  std::uint64_t B_;
  double s_;
  const ChebyshevGrid* grid_;
  std::vector<double> m_;  // row-major N x N
};

struct LeadingEigen {
  double log_lambda = 0;
  std::vector<double> h;  // nodal values, max-normalised
  int iterations = 0;
};

LeadingEigen leading_eigen(const TransferOperator& op, double rel_tol = 1e-13, int max_iter = 20000);

// L^R applied to a start vector, kept as exp(c_R) * phi_R with phi_R
// max-normalised. Once phi stops changing the orbit is extended with the
// observed growth rate instead of further iteration.
class Orbit {
 public:
  Orbit(const TransferOperator& op, std::vector<double> start, std::uint64_t R_max,
        double tol = 1e-14, std::uint64_t max_store = 100000);

  std::uint64_t stored() const { return phi_.size(); }
  bool stationary() const { return stationary_; }
  double log_lambda() const { return log_lambda_; }

  double log_scale(std::uint64_t R) const;
  const std::vector<double>& shape(std::uint64_t R) const;
  double log_value(std::uint64_t R, double x) const;

 private:
  const ChebyshevGrid* grid_;
  std::vector<double> c_;
  std::vector<std::vector<double>> phi_;
  bool stationary_ = false;
  double log_lambda_ = 0;
};

}  // namespace cfdim
