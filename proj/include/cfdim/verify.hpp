#pragma once

// Monte Carlo checks of the almost-everywhere laws, exact lemma suites and
// solver cross-validation, collected into reports.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfdim/cf_core.hpp"
#include "cfdim/dim_solver.hpp"

namespace cfdim {

using Json = nlohmann::ordered_json;

struct Check {
  std::string name;
  double statistic = 0;
  double lo = 0, hi = 0;
  bool pass = false;
  std::string note;
};

struct SeriesRow {
  std::string series;
  double x = 0;
  double value = 0;
  double lo = 0, hi = 0;
};

struct Report {
  std::string suite;
  std::vector<Check> checks;
  std::vector<SeriesRow> series;

  // Records a check; pass iff lo <= statistic <= hi.
  Check& add(std::string name, double statistic, double lo, double hi, std::string note = {});
  std::size_t passed() const;
  std::size_t failed() const { return checks.size() - passed(); }
  bool ok() const { return failed() == 0; }

  Json to_json() const;
  std::string to_csv() const;
};

enum class McMode { Chain, Decimal };
std::string to_string(McMode m);

struct McConfig {
  std::uint64_t seed = 1;
  std::uint64_t samples = 200;
  std::uint64_t n_digits = 1000000;
  unsigned long budget_bits = 0;  // decimal mode; 0 selects 4n + 64
  McMode mode = McMode::Chain;
  bool parallel = true;
};

// Fixed bounds for the Monte Carlo checks, calibrated by a pilot run.
struct McBounds {
  double runlength_mean_lo = 0.40, runlength_mean_hi = 0.60;
  double trend_slack = 0.05;
  double nu_threshold = 0.05;
  double nu_fraction_max = 0.02;
  double fraction_slack = 0.02;
};

// n-schedule 10^4, 10^5, ... up to n_digits (always ending at n_digits).
std::vector<std::uint64_t> mc_schedule(std::uint64_t n_digits);

// Lebesgue-distributed digits: a = floor((1+r)/V - r), r <- 1/(a+r).
class LebesgueChain {
 public:
  explicit LebesgueChain(std::mt19937_64& g) : g_(&g) {}
  Digit next();

 private:
  std::mt19937_64* g_;
  double r_ = 0;
};

// Uniform x known to 2^-bits, certified digits by interval expansion.
// Returns nullopt when fewer than n digits are certified.
std::optional<Digits> decimal_budget_digits(std::mt19937_64& g, std::uint64_t n, unsigned long bits);

Report mc_runlength(const McConfig& cfg, const McBounds& b = {});
Report mc_nu_zero(const McConfig& cfg, Digit i, const McBounds& b = {});

Report lemma_suite(std::uint64_t seed = 1, std::uint64_t instances = 10000);
Report closed_form_suite();
Report solver_crosscheck(const SolverOptions& opts = {},
                         const std::vector<std::uint64_t>& n_schedule = default_n_schedule());

}  // namespace cfdim
