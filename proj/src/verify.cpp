#include "cfdim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"
#include "cfdim/exponents.hpp"
#include "cfdim/parallel.hpp"
#include "cfdim/runlength.hpp"

namespace cfdim {

std::string to_string(McMode m) { return m == McMode::Chain ? "chain" : "decimal"; }

std::vector<std::uint64_t> mc_schedule(std::uint64_t n_digits) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t n = 10000; n < n_digits; n *= 10) s.push_back(n);
  s.push_back(n_digits);
  return s;
}

Digit LebesgueChain::next() {
  double v = uniform01_open_low(*g_);
  double x = (1.0 + r_) / v - r_;
  Digit a = std::max<Digit>(1, static_cast<Digit>(x));
  r_ = 1.0 / (static_cast<double>(a) + r_);
  return a;
}

std::optional<Digits> decimal_budget_digits(std::mt19937_64& g, std::uint64_t n, unsigned long bits) {
  if (bits == 0) bits = static_cast<unsigned long>(4 * n + 64);
  std::vector<std::uint64_t> words((bits + 63) / 64);
  for (auto& w : words) w = g();
  mpz_class K;
  mpz_import(K.get_mpz_t(), words.size(), -1, sizeof(std::uint64_t), 0, 0, words.data());
  mpz_class top;
  mpz_ui_pow_ui(top.get_mpz_t(), 2, bits);
  K %= top;
  mpq_class x(K, top), eps(1, top);
  x.canonicalize();
  eps.canonicalize();
  mpq_class lo = x - eps, hi = x + eps;
  if (lo <= 0 || hi >= 1) return std::nullopt;
  DigitSeq d = expand_interval(lo, hi, n);
  if (d.size() < n) return std::nullopt;
  return std::move(d.digits);
}

namespace {

constexpr std::uint64_t kMaxDecimalDigits = 10000;
constexpr int kMaxRedraws = 100;

void check_config(const McConfig& cfg) {
  if (cfg.samples < 1) fail(ErrorKind::OutOfRange, "samples must be >= 1");
  if (cfg.n_digits < 10000) fail(ErrorKind::OutOfRange, "n_digits must be >= 10^4");
  if (cfg.mode == McMode::Decimal && cfg.n_digits > kMaxDecimalDigits)
    fail(ErrorKind::OutOfRange, "decimal-budget mode supports n_digits <= 10^4");
}

// Feeds one sample's digits to `consume`; returns the redraw count.
template <class F>
int draw_sample(const McConfig& cfg, std::uint64_t index, F&& consume) {
  std::mt19937_64 g = stream_for(cfg.seed, index);
  if (cfg.mode == McMode::Chain) {
    LebesgueChain chain(g);
    for (std::uint64_t k = 0; k < cfg.n_digits; ++k) consume(chain.next());
    return 0;
  }
  for (int redraws = 0; redraws <= kMaxRedraws; ++redraws) {
    auto d = decimal_budget_digits(g, cfg.n_digits, cfg.budget_bits);
    if (!d) continue;
    for (Digit a : *d) consume(a);
    return redraws;
  }
  fail(ErrorKind::Exhausted, "decimal budget too small: no sample certified");
}

template <class Body>
void for_samples(const McConfig& cfg, Body&& body) {
  const std::int64_t n = static_cast<std::int64_t>(cfg.samples);
  const int nt = threads();
  if (!cfg.parallel) {
    for (std::int64_t s = 0; s < n; ++s) body(static_cast<std::uint64_t>(s));
    return;
  }
  // Errors are rethrown after the loop; exceptions may not cross the region.
  std::vector<std::string> errs(static_cast<std::size_t>(n));
  std::vector<int> kinds(static_cast<std::size_t>(n), -1);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt) if (nt != 1)
  for (std::int64_t s = 0; s < n; ++s) {
    try {
      body(static_cast<std::uint64_t>(s));
    } catch (const Error& e) {
      kinds[static_cast<std::size_t>(s)] = static_cast<int>(e.kind());
      errs[static_cast<std::size_t>(s)] = e.what();
    }
  }
  for (std::size_t s = 0; s < kinds.size(); ++s)
    if (kinds[s] >= 0) fail(static_cast<ErrorKind>(kinds[s]), errs[s]);
}

struct MeanSd {
  double mean = 0, sd = 0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.sd += (x - r.mean) * (x - r.mean);
  r.sd = v.size() > 1 ? std::sqrt(r.sd / static_cast<double>(v.size() - 1)) : 0.0;
  return r;
}

std::string nstr(std::uint64_t n) { return std::to_string(n); }

}  // namespace

Report mc_runlength(const McConfig& cfg, const McBounds& b) {
  check_config(cfg);
  const auto sched = mc_schedule(cfg.n_digits);
  const std::size_t S = sched.size();
  const double log_phi = std::log(std::numbers::phi);
  std::vector<double> stat(cfg.samples * S);
  std::vector<int> redraws(cfg.samples);
  for_samples(cfg, [&](std::uint64_t s) {
    RunTracker rt;
    std::size_t j = 0;
    redraws[s] = draw_sample(cfg, s, [&](Digit a) {
      rt.put(a);
      if (j < S && rt.position() == sched[j]) {
        double n = static_cast<double>(sched[j]);
        stat[s * S + j] = static_cast<double>(rt.longest()) / (std::log(n) / log_phi);
        ++j;
      }
    });
  });

  Report rep;
  rep.suite = "mc_runlength";
  std::vector<double> means;
  for (std::size_t j = 0; j < S; ++j) {
    std::vector<double> col(cfg.samples);
    for (std::uint64_t s = 0; s < cfg.samples; ++s) col[s] = stat[s * S + j];
    MeanSd m = mean_sd(col);
    means.push_back(m.mean);
    rep.series.push_back({"mean_ratio", static_cast<double>(sched[j]), m.mean, m.mean - m.sd, m.mean + m.sd});
  }
  rep.add("mean_ratio_n=" + nstr(sched.back()), means.back(), b.runlength_mean_lo, b.runlength_mean_hi,
          "R_n / log_phi n, " + nstr(cfg.samples) + " samples, " + to_string(cfg.mode));
  for (std::size_t j = 1; j < S; ++j)
    rep.add("trend_n=" + nstr(sched[j]), means[j] - means[j - 1], -b.trend_slack, 1.0,
            "change of the mean from n=" + nstr(sched[j - 1]));
  if (cfg.mode == McMode::Decimal) {
    double total = 0;
    for (int r : redraws) total += r;
    rep.add("redraw_rate", total / (total + static_cast<double>(cfg.samples)), 0.0, 0.01);
  }
  return rep;
}

Report mc_nu_zero(const McConfig& cfg, Digit i, const McBounds& b) {
  check_config(cfg);
  if (i < 1) fail(ErrorKind::OutOfRange, "target digit must be >= 1");
  const auto sched = mc_schedule(cfg.n_digits);
  const std::size_t S = sched.size();
  std::vector<double> nu(cfg.samples * S), nu_hat(cfg.samples * S);
  std::vector<std::uint8_t> thin(cfg.samples * S, 0);
  for_samples(cfg, [&](std::uint64_t s) {
    BlockScanner sc(i);
    std::size_t j = 0;
    draw_sample(cfg, s, [&](Digit a) {
      sc.put(a);
      if (j < S && sc.position() == sched[j]) {
        BlockScanner snap = sc;
        snap.finish();
        try {
          ExponentEstimate e = exponent_estimates(snap.records(), sched[j]);
          nu[s * S + j] = e.nu_est;
          nu_hat[s * S + j] = e.nu_hat_est;
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::InsufficientBlocks) throw;
          thin[s * S + j] = 1;
        }
        ++j;
      }
    });
  });

  Report rep;
  rep.suite = "mc_nu_zero";
  std::vector<double> frac(S);
  std::uint64_t order_violations = 0, thin_count = 0;
  for (std::size_t j = 0; j < S; ++j) {
    std::uint64_t over = 0;
    std::vector<double> col;
    for (std::uint64_t s = 0; s < cfg.samples; ++s) {
      std::size_t k = s * S + j;
      if (thin[k]) {
        ++thin_count;
        continue;
      }
      col.push_back(nu[k]);
      if (nu[k] > b.nu_threshold) ++over;
      if (nu_hat[k] > nu[k]) ++order_violations;
    }
    frac[j] = static_cast<double>(over) / static_cast<double>(cfg.samples);
    rep.series.push_back({"exceed_fraction", static_cast<double>(sched[j]), frac[j], frac[j], frac[j]});
    if (!col.empty()) {
      MeanSd m = mean_sd(col);
      rep.series.push_back({"mean_nu_est", static_cast<double>(sched[j]), m.mean, m.mean - m.sd, m.mean + m.sd});
    }
  }
  rep.add("exceed_fraction_n=" + nstr(sched.back()), frac.back(), 0.0, b.nu_fraction_max,
          "fraction of samples with nu_est > " + Json(b.nu_threshold).dump() + ", digit " + nstr(i));
  for (std::size_t j = 1; j < S; ++j)
    rep.add("fraction_trend_n=" + nstr(sched[j]), frac[j] - frac[j - 1], -1.0, b.fraction_slack);
  rep.add("nu_hat_le_nu", static_cast<double>(order_violations), 0.0, 0.0);
  rep.add("insufficient_blocks", static_cast<double>(thin_count), 0.0, static_cast<double>(cfg.samples * S),
          "horizons without an eligible record pair (counted as nu_est = 0)");
  return rep;
}

namespace {

struct Tally {
  std::uint64_t bounds = 0, split = 0, det = 0, length = 0, endpoints = 0, nesting = 0, roundtrip = 0,
                parity = 0, instances = 0;
};

mpz_class prod(std::span<const Digit> d, Digit add) {
  mpz_class r = 1;
  for (Digit a : d) r *= from_u64(a + add);
  return r;
}

void check_string(std::span<const Digit> d, Digit extra, std::size_t split_at, Tally& t) {
  const long n = static_cast<long>(d.size());
  ContinuantTable ct = continuants(d);
  const mpz_class& q = ct.q(n);
  const mpz_class& qm = ct.q(n - 1);
  const mpz_class& p = ct.p(n);
  const mpz_class& pm = ct.p(n - 1);
  ++t.instances;

  mpz_class two_pow;
  mpz_ui_pow_ui(two_pow.get_mpz_t(), 2, static_cast<unsigned long>(n - 1));
  if (!(prod(d, 0) <= q && q <= prod(d, 1) && q * q >= two_pow)) ++t.bounds;

  if (n >= 2) {
    std::size_t k = 1 + split_at % static_cast<std::size_t>(n - 1);
    mpz_class a = continuant(d.first(k)), c = continuant(d.subspan(k));
    if (!(a * c <= q && q <= 2 * a * c)) ++t.split;
  }

  mpz_class det = pm * q - p * qm;
  if (det != (n % 2 == 0 ? 1 : -1)) ++t.det;

  BasicInterval I = basic_interval(d);
  mpq_class len = I.right - I.left;
  mpq_class formula(1, q * (q + qm));
  formula.canonicalize();
  mpq_class qq(mpz_class(q * q));
  if (!(I.length == len && len == formula && len <= 1 / qq && len >= 1 / (2 * qq))) ++t.length;

  mpq_class e1(p, q), e2(mpz_class(p + pm), mpz_class(q + qm));
  e1.canonicalize();
  e2.canonicalize();
  if (!(I.left == std::min(e1, e2) && I.right == std::max(e1, e2))) ++t.endpoints;

  Digits child(d.begin(), d.end());
  child.push_back(extra);
  BasicInterval C = basic_interval(child);
  if (!(C.left >= I.left && C.right <= I.right)) ++t.nesting;

  mpq_class mid = (I.left + I.right) / 2;
  DigitSeq back = expand(RationalInput{mid.get_num(), mid.get_den()}, d.size());
  if (back.digits != Digits(d.begin(), d.end())) ++t.roundtrip;
}

// Children of a prefix are disjoint, nested and ordered by the parity of
// the prefix length.
void check_parity(const Digits& d, Digit B, Tally& t) {
  mpq_class pl = 0, pr = 1;
  if (!d.empty()) {
    BasicInterval P = basic_interval(d);
    pl = P.left;
    pr = P.right;
  }
  bool decreasing = d.size() % 2 == 0;
  Digits c = d;
  c.push_back(1);
  BasicInterval prev = basic_interval(c);
  bool ok = prev.left >= pl && prev.right <= pr;
  for (Digit a = 2; a <= B; ++a) {
    c.back() = a;
    BasicInterval cur = basic_interval(c);
    ok = ok && cur.left >= pl && cur.right <= pr;
    ok = ok && (decreasing ? cur.right <= prev.left : prev.right <= cur.left);
    prev = cur;
  }
  if (!ok) ++t.parity;
}

}  // namespace

Report lemma_suite(std::uint64_t seed, std::uint64_t instances) {
  Tally t;
  std::mt19937_64 g = stream_for(seed, 0);
  std::uniform_int_distribution<int> len_d(1, 30);
  std::uniform_int_distribution<Digit> dig_d(1, 10);
  std::uniform_int_distribution<std::size_t> split_d(0, 1000);
  for (std::uint64_t k = 0; k < instances; ++k) {
    Digits d(static_cast<std::size_t>(len_d(g)));
    for (auto& a : d) a = dig_d(g);
    check_string(d, dig_d(g), split_d(g), t);
  }
  std::uint64_t random_parity = 0;
  for (std::uint64_t k = 0; k < std::min<std::uint64_t>(instances, 2000); ++k) {
    Digits d(static_cast<std::size_t>(len_d(g)) % 12);
    for (auto& a : d) a = dig_d(g);
    check_parity(d, 10, t);
    ++random_parity;
  }
  // exhaustive: all strings of length <= 6 over {1..4}
  std::uint64_t exhaustive = 0;
  std::vector<Digits> level{{}};
  for (int n = 1; n <= 6; ++n) {
    std::vector<Digits> next;
    for (const auto& p : level) {
      check_parity(p, 4, t);
      for (Digit a = 1; a <= 4; ++a) {
        Digits d = p;
        d.push_back(a);
        check_string(d, a, static_cast<std::size_t>(exhaustive), t);
        ++exhaustive;
        next.push_back(std::move(d));
      }
    }
    level = std::move(next);
  }
  Report rep;
  rep.suite = "lemmas";
  const std::string note = nstr(instances) + " random + " + nstr(exhaustive) + " exhaustive strings";
  rep.add("continuant_bounds", static_cast<double>(t.bounds), 0, 0, note);
  rep.add("continuant_split_ratio", static_cast<double>(t.split), 0, 0, note);
  rep.add("determinant_identity", static_cast<double>(t.det), 0, 0, note);
  rep.add("interval_length_bounds", static_cast<double>(t.length), 0, 0, note);
  rep.add("interval_endpoints", static_cast<double>(t.endpoints), 0, 0, note);
  rep.add("interval_nesting", static_cast<double>(t.nesting), 0, 0, note);
  rep.add("expand_roundtrip", static_cast<double>(t.roundtrip), 0, 0, note);
  rep.add("parity_ordering", static_cast<double>(t.parity), 0, 0,
          nstr(random_parity) + " random prefixes + all prefixes of length <= 5 over {1..4}");
  return rep;
}

Report closed_form_suite() {
  std::uint64_t mismatch = 0, bounds = 0, lengths = 0;
  for (Digit i = 1; i <= 5; ++i) {
    QuadraticTarget t = target(i);
    for (std::uint64_t n = 0; n <= 40; ++n) {
      mpz_class q = run_continuant(i, n);
      if (q != run_continuant_recursive(i, n)) ++mismatch;
      if (n >= 1) {
        BigReal tn(t.tau.precision());
        mpfr_pow_ui(tn.get(), t.tau.get(), static_cast<unsigned long>(n), MPFR_RNDN);
        BigReal qr(q, MPFR_RNDN, t.tau.precision());
        BigReal half = mul(tn, 0.5), twice = mul(tn, 2.0);
        if (!(half <= qr && qr <= twice)) ++bounds;
        Digits run(n, i);
        if (basic_interval(run).length != run_interval_length(i, n)) ++lengths;
      }
    }
  }
  Report rep;
  rep.suite = "closed_form";
  rep.add("closed_form_vs_recursion", static_cast<double>(mismatch), 0, 0, "i <= 5, n <= 40");
  rep.add("tau_power_bounds", static_cast<double>(bounds), 0, 0, "tau^n/2 <= q_n(i..i) <= 2 tau^n");
  rep.add("run_interval_length", static_cast<double>(lengths), 0, 0, "closed form vs exact endpoints");
  return rep;
}

Report solver_crosscheck(const SolverOptions& opts, const std::vector<std::uint64_t>& n_schedule) {
  Report rep;
  rep.suite = "solver_crosscheck";
  const mpq_class alphas[] = {mpq_class(0), mpq_class(1, 4), mpq_class(1, 2)};
  for (std::uint64_t B = 1; B <= 3; ++B) {
    for (Digit i = 1; i <= 2; ++i) {
      double prev_spec = std::numeric_limits<double>::infinity();
      for (const auto& a : alphas) {
        DimEstimate lim = dim_limit(B, a, i, n_schedule, opts);
        DimEstimate sp = spectral_dim(B, a, i, opts);
        const std::string tag = "B=" + nstr(B) + ",alpha=" + to_string(a) + ",i=" + nstr(i);
        double half = 0.5 * (lim.hi - lim.lo) + 0.5 * (sp.hi - sp.lo);
        rep.add("agreement[" + tag + "]", std::abs(lim.value - sp.value), 0.0, std::min(0.01, std::max(half, 1e-9)),
                "enumeration " + Json(lim.value).dump() + " vs spectral " + Json(sp.value).dump());
        rep.series.push_back({"enumerate[" + tag + "]", nearest_double(a), lim.value, lim.lo, lim.hi});
        rep.series.push_back({"spectral[" + tag + "]", nearest_double(a), sp.value, sp.lo, sp.hi});
        if (B == 2 && a == 0 && i == 1) {
          rep.add("anchor_enumerate[" + tag + "]", lim.value, 0.526, 0.536);
          rep.add("anchor_spectral[" + tag + "]", sp.value, 0.526, 0.536);
        }
        if (std::isfinite(prev_spec))
          rep.add("alpha_monotone[" + tag + "]", sp.value - prev_spec, -1.0, 1e-9);
        prev_spec = sp.value;
      }
    }
  }
  return rep;
}

}  // namespace cfdim
