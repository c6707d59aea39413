#include "cfdim/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfdim/error.hpp"

namespace cfdim {

ChebyshevGrid::ChebyshevGrid(int n) : n_(n), x_(n), w_(n) {
  if (n < 2) fail(ErrorKind::OutOfRange, "collocation needs at least 2 nodes");
  for (int k = 0; k < n; ++k) {
    double th = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * n);
    x_[k] = 0.5 * (1.0 - std::cos(th));
    w_[k] = ((k % 2) ? -1.0 : 1.0) * std::sin(th);
  }
}

double ChebyshevGrid::interpolate(const double* f, double x) const {
  double num = 0, den = 0;
  for (int k = 0; k < n_; ++k) {
    double d = x - x_[k];
    if (d == 0.0) return f[k];
    double t = w_[k] / d;
    num += t * f[k];
    den += t;
  }
  return num / den;
}

void ChebyshevGrid::basis_row(double x, double* row) const {
  double den = 0;
  for (int k = 0; k < n_; ++k) {
    double d = x - x_[k];
    if (d == 0.0) {
      std::fill(row, row + n_, 0.0);
      row[k] = 1.0;
      return;
    }
    row[k] = w_[k] / d;
    den += row[k];
  }
  for (int k = 0; k < n_; ++k) row[k] /= den;
}

TransferOperator::TransferOperator(std::uint64_t B, double s, const ChebyshevGrid& grid)
    : B_(B), s_(s), grid_(&grid) {
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  const int n = grid.size();
  m_.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> row(n);
  for (int j = 0; j < n; ++j) {
    double xj = grid.nodes()[j];
    double* mj = &m_[static_cast<std::size_t>(j) * n];
    for (std::uint64_t a = 1; a <= B; ++a) {
      double z = static_cast<double>(a) + xj;
      double w = std::exp(-2.0 * s * std::log(z));
      grid.basis_row(1.0 / z, row.data());
      for (int k = 0; k < n; ++k) mj[k] += w * row[k];
    }
  }
}

void TransferOperator::apply(const std::vector<double>& f, std::vector<double>& out) const {
  const int n = grid_->size();
  out.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double* mj = &m_[static_cast<std::size_t>(j) * n];
    double acc = 0;
    for (int k = 0; k < n; ++k) acc += mj[k] * f[k];
    out[j] = acc;
  }
}

double TransferOperator::apply_at(const std::vector<double>& f, double x) const {
  double acc = 0;
  for (std::uint64_t a = 1; a <= B_; ++a) {
    double z = static_cast<double>(a) + x;
    acc += std::exp(-2.0 * s_ * std::log(z)) * grid_->interpolate(f, 1.0 / z);
  }
  return acc;
}

namespace {
double normalise(std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (!(m > 0) || !std::isfinite(m)) fail(ErrorKind::NoConvergence, "transfer iterate vanished");
  for (double& x : v) x /= m;
  return m;
}
}  // namespace

LeadingEigen leading_eigen(const TransferOperator& op, double rel_tol, int max_iter) {
  const int n = op.grid().size();
  std::vector<double> v(n, 1.0), w;
  LeadingEigen out;
  double prev = 0;
  int stable = 0;
  for (int it = 1; it <= max_iter; ++it) {
    op.apply(v, w);
    double lam = normalise(w);
    double change = 0;
    for (int k = 0; k < n; ++k) change = std::max(change, std::abs(w[k] - v[k]));
    v.swap(w);
    if (it > 1 && std::abs(lam - prev) <= rel_tol * lam && change <= 1e3 * rel_tol) {
      if (++stable >= 2) {
        out.log_lambda = std::log(lam);
        out.h = v;
        out.iterations = it;
        return out;
      }
    } else {
      stable = 0;
    }
    prev = lam;
  }
  fail(ErrorKind::NoConvergence, "power iteration did not converge");
}

Orbit::Orbit(const TransferOperator& op, std::vector<double> start, std::uint64_t R_max, double tol,
             std::uint64_t max_store)
    : grid_(&op.grid()) {
  R_max = std::min(R_max, max_store);
  double c0 = std::log(normalise(start));
  c_.push_back(c0);
  phi_.push_back(std::move(start));
  std::vector<double> w;
  int calm = 0;
  for (std::uint64_t R = 1; R <= R_max; ++R) {
    op.apply(phi_.back(), w);
    double c = c_.back() + std::log(normalise(w));
    double change = 0;
    for (std::size_t k = 0; k < w.size(); ++k) change = std::max(change, std::abs(w[k] - phi_.back()[k]));
    double step = c - c_.back();
    bool same_rate = c_.size() >= 2 && std::abs(step - (c_.back() - c_[c_.size() - 2])) <= tol;
    c_.push_back(c);
    phi_.push_back(w);
    if (change <= tol && same_rate) {
      if (++calm >= 3) {
        stationary_ = true;
        log_lambda_ = step;
        break;
      }
    } else {
      calm = 0;
    }
  }
}

double Orbit::log_scale(std::uint64_t R) const {
  if (R < c_.size()) return c_[R];
  if (!stationary_) fail(ErrorKind::OutOfRange, "orbit index beyond stored range");
  return c_.back() + static_cast<double>(R - (c_.size() - 1)) * log_lambda_;
}

const std::vector<double>& Orbit::shape(std::uint64_t R) const {
  if (R < phi_.size()) return phi_[R];
  if (!stationary_) fail(ErrorKind::OutOfRange, "orbit index beyond stored range");
  return phi_.back();
}

double Orbit::log_value(std::uint64_t R, double x) const {
  return log_scale(R) + std::log(grid_->interpolate(shape(R), x));
}

}  // namespace cfdim
