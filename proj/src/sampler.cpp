#include <algorithm>
#include <cmath>
#include <limits>

#include "cfdim/cantor.hpp"
#include "cfdim/error.hpp"
#include "cfdim/parallel.hpp"

namespace cfdim {

namespace {

constexpr std::uint64_t kExactLeaves = 4096;
constexpr std::uint64_t kTableGrid = 1 << 16;
constexpr std::uint64_t kTableMaxB = 64;
constexpr std::uint64_t kExactTailDigits = 64;
constexpr std::uint64_t kMaxSegmentAlphabet = 1 << 16;

std::uint64_t leaves(std::uint64_t B, std::uint64_t R) {
  std::uint64_t v = 1;
  for (std::uint64_t k = 0; k < R; ++k) {
    if (v > kExactLeaves) return kExactLeaves + 1;
    v *= B;
  }
  return v;
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

SegmentModel::SegmentModel(const SegmentBounds& sb, std::uint64_t B, Digit i, const SolverOptions& opts)
    : sb_(sb), B_(B), i_(i) {
  const std::uint64_t free = sb.free_length();
  const std::uint64_t tail = sb.tail_length();
  tail_ = run_tail(i, tail);
  if (free == 0) {
    s_method_ = "forced";
    return;
  }
  SolverOptions o = opts;
  o.exact_node_limit = 1000000;
  DimEstimate e = predim_tilde(B, i, free + tail, tail, o, Method::Auto);
  s_ = e.value;
  s_method_ = e.method;
  log_const_ = -2.0 * s_ * tail_.log_q;
  if (leaves(B, free) > kExactLeaves) {
    grid_ = std::make_unique<ChebyshevGrid>(opts.cheb_nodes);
    op_ = std::make_unique<TransferOperator>(B, s_, *grid_);
    std::vector<double> start(grid_->size());
    for (int k = 0; k < grid_->size(); ++k)
      start[k] = std::exp(-2.0 * s_ * std::log1p(grid_->nodes()[k] * tail_.x));
    orbit_ = std::make_unique<Orbit>(*op_, std::move(start), free);
  }
}

double SegmentModel::log_phi_exact(std::uint64_t R, double r) const {
  scratch_.clear();
  // iterative DFS over A^R from the state (q_{j-1}, q_j) = (r, 1)
  struct Frame {
    double qp, qc;
    std::uint64_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({r, 1.0, 1});
  auto leaf = [&](double qp, double qc) {
    double L = std::log(qc) + tail_.log_q + std::log1p(qp / qc * tail_.x);
    scratch_.push_back(-2.0 * s_ * L);
  };
  if (R == 0) {
    leaf(r, 1.0);
    return scratch_[0];
  }
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next > B_) {
      stack.pop_back();
      continue;
    }
    double a = static_cast<double>(f.next++);
    double qp = f.qc, qc = a * f.qc + f.qp;
    if (stack.size() == R)
      leaf(qp, qc);
    else
      stack.push_back({qp, qc, 1});
  }
  return log_sum_exp(scratch_);
}

double SegmentModel::log_phi(std::uint64_t R, double r) const {
  if (R > sb_.free_length()) fail(ErrorKind::OutOfRange, "more free digits than the segment holds");
  if (s_ == 0.0 && sb_.free_length() == 0) return 0.0;
  if (R == 0) return log_const_ - 2.0 * s_ * std::log1p(r * tail_.x);
  if (!orbit_ || leaves(B_, R) <= kExactLeaves) return log_phi_exact(R, r);
  return log_const_ + orbit_->log_value(R, r);
}

void SegmentModel::child_probabilities(std::uint64_t R, double r, std::vector<double>& out) const {
  if (R == 0) fail(ErrorKind::OutOfRange, "no free digit left");
  out.resize(B_);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::uint64_t a = 1; a <= B_; ++a) {
    double z = static_cast<double>(a) + r;
    out[a - 1] = -2.0 * s_ * std::log(z) + log_phi(R - 1, 1.0 / z);
    mx = std::max(mx, out[a - 1]);
  }
  double sum = 0;
  for (double& w : out) {
    w = std::exp(w - mx);
    sum += w;
  }
  for (double& w : out) w /= sum;
}

bool SegmentModel::table_usable(std::uint64_t R) const {
  return orbit_ && orbit_->stationary() && B_ >= 2 && B_ <= kTableMaxB &&
         R > std::max<std::uint64_t>(orbit_->stored(), kExactTailDigits);
}

void SegmentModel::build_table() const {
  const std::vector<double>& h = orbit_->shape(orbit_->stored());
  const std::uint64_t W = B_ - 1;
  table_.assign((kTableGrid + 1) * W, 0.0);
  std::vector<double> w(B_);
  for (std::uint64_t j = 0; j <= kTableGrid; ++j) {
    double r = static_cast<double>(j) / static_cast<double>(kTableGrid);
    double sum = 0;
    for (std::uint64_t a = 1; a <= B_; ++a) {
      double z = static_cast<double>(a) + r;
      w[a - 1] = std::exp(-2.0 * s_ * std::log(z)) * grid_->interpolate(h, 1.0 / z);
      sum += w[a - 1];
    }
    double c = 0;
    for (std::uint64_t a = 0; a < W; ++a) {
      c += w[a] / sum;
      table_[j * W + a] = c;
    }
  }
}

const double* SegmentModel::stationary_table() const {
  if (table_.empty()) build_table();
  return table_.data();
}

std::uint64_t SegmentModel::table_grid() { return kTableGrid; }

Digit SegmentModel::draw(std::uint64_t R, double r, double u, bool allow_table) const {
  if (B_ == 1) return 1;
  if (allow_table && table_usable(R)) {
    if (table_.empty()) build_table();
    const std::uint64_t W = B_ - 1;
    double x = r * static_cast<double>(kTableGrid);
    std::uint64_t j = std::min<std::uint64_t>(static_cast<std::uint64_t>(x), kTableGrid - 1);
    double t = x - static_cast<double>(j);
    const double* lo = &table_[j * W];
    const double* hi = lo + W;
    for (std::uint64_t a = 0; a < W; ++a)
      if (u < lo[a] + t * (hi[a] - lo[a])) return a + 1;
    return B_;
  }
  std::vector<double> p;
  child_probabilities(R, r, p);
  double c = 0;
  for (std::uint64_t a = 0; a + 1 < B_; ++a) {
    c += p[a];
    if (u < c) return a + 1;
  }
  return B_;
}

CantorMeasure::CantorMeasure(CantorSpec spec, SolverOptions opts)
    : spec_(std::move(spec)), opts_(opts) {}

const SegmentModel& CantorMeasure::segment(std::size_t k) const {
  if (k < 1 || k > segment_count(spec_)) fail(ErrorKind::Exhausted, "segment beyond the constructed sequences");
  if (models_.size() < k) models_.resize(k);
  if (!models_[k - 1]) {
    SegmentBounds sb = segment_bounds(spec_, k);
    std::uint64_t B = 1;
    if (sb.free_length() > 0) {
      auto b = to_u64(segment_alphabet(spec_, k));
      if (!b || *b > kMaxSegmentAlphabet) fail(ErrorKind::OutOfRange, "segment alphabet too large for the measure");
      B = *b;
    }
    models_[k - 1] = std::make_unique<SegmentModel>(sb, B, spec_.i, opts_);
  }
  return *models_[k - 1];
}

MeasureNode CantorMeasure::node(std::span<const Digit> prefix) const {
  check_admissible(spec_, prefix);
  const mpfr_prec_t prec = std::max<mpfr_prec_t>(default_precision(), 256);
  MeasureNode out;
  out.digits.assign(prefix.begin(), prefix.end());
  out.log_mass = BigReal(0.0, prec);
  const std::uint64_t len = prefix.size();
  const std::size_t K = segment_count(spec_);
  for (std::size_t k = 1; k <= K; ++k) {
    SegmentBounds sb = segment_bounds(spec_, k);
    if (sb.start >= len) {
      out.segment = k;
      break;
    }
    const SegmentModel& sm = segment(k);
    std::span<const Digit> seg = prefix.subspan(sb.start, std::min(len, sb.end) - sb.start);
    if (len >= sb.end) ++out.boundaries;
    if (sm.s() == 0.0) {
      if (len < sb.end) out.segment = k;
      continue;
    }
    if (len >= sb.free_end) {
      // unique completion through the run
      Digits full(seg.begin(), seg.end());
      full.resize(sb.length(), spec_.i);
      BigReal lq = log_of(continuant(full), MPFR_RNDN, prec);
      out.log_mass = add(out.log_mass, mul(lq, -2.0 * sm.s()));
    } else {
      ContinuantTable ct = continuants(seg);
      long j = ct.order();
      BigReal lq = log_of(ct.q(j), MPFR_RNDN, prec);
      double r = mpq_class(ct.q(j - 1), ct.q(j)).get_d();
      out.log_mass = add(out.log_mass, mul(lq, -2.0 * sm.s()));
      out.log_mass = add(out.log_mass, BigReal(sm.log_phi(sb.free_end - len, r), prec));
    }
    if (len < sb.end) {
      out.segment = k;
      break;
    }
    if (k == K) out.segment = K + 1;
  }
  return out;
}

double CantorMeasure::local_dimension(std::span<const Digit> prefix) const {
  if (prefix.empty()) fail(ErrorKind::OutOfRange, "local dimension needs a nonempty prefix");
  MeasureNode nd = node(prefix);
  BasicInterval I = basic_interval(prefix);
  const mpfr_prec_t prec = nd.log_mass.precision();
  BigReal ll = log_of(I.length, MPFR_RNDN, prec);
  return div(nd.log_mass, ll).to_double();
}

namespace {

class Drawer {
 public:
  Drawer(const CantorMeasure& mu, std::uint64_t stop, DigitSink& sink, std::uint64_t keep_prefix,
         const SampleOptions& o)
      : mu_(mu), stop_(stop), sink_(sink), keep_(keep_prefix), o_(o) {}

  bool run(std::mt19937_64& g, Digits& prefix) {
    const CantorSpec& spec = mu_.spec();
    const std::size_t K = segment_count(spec);
    buf_.clear();
    for (std::size_t k = 1; k <= K; ++k) {
      SegmentBounds sb = segment_bounds(spec, k);
      if (sb.start >= stop_) break;
      const SegmentModel& sm = mu_.segment(k);
      const std::uint64_t thr = spec.seq.run_length(k >= 2 ? k - 2 : 0);
      const bool reject = o_.reject_accidental && sm.alphabet() >= 2 && spec.i <= sm.alphabet();
      const std::uint64_t free_stop = std::min(sb.free_end, stop_);
      double r = 0;
      std::uint64_t run = 0;
      std::uint64_t p = sb.start + 1;
      if (o_.use_table && sm.table_usable(sb.free_end - p + 1)) {
        // bulk of a long free stretch: stationary table, branch-light
        std::uint64_t last = free_stop;
        while (last >= p && !sm.table_usable(sb.free_end - last + 1)) --last;
        const double* T = sm.stationary_table();
        // signed conversions only: unsigned <-> double is slow on x86-64
        const std::int64_t W = static_cast<std::int64_t>(sm.alphabet()) - 1;
        const double G = static_cast<double>(SegmentModel::table_grid());
        const std::int64_t jmax = static_cast<std::int64_t>(SegmentModel::table_grid()) - 1;
        const std::uint64_t limit = reject ? thr : std::numeric_limits<std::uint64_t>::max();
        const std::int64_t run_digit = static_cast<std::int64_t>(spec.i);
        for (; p <= last; ++p) {
          double u = uniform01(g);
          double x = r * G;
          std::int64_t j = std::min(static_cast<std::int64_t>(x), jmax);
          double t = x - static_cast<double>(j);
          const double* lo = T + j * W;
          const double* hi = lo + W;
          std::int64_t a = 1;
          for (std::int64_t k = 0; k < W; ++k) a += u >= lo[k] + t * (hi[k] - lo[k]);
          r = 1.0 / (static_cast<double>(a) + r);
          run = a == run_digit ? run + 1 : 0;
          if (run >= limit) return false;
          if (p <= keep_) prefix.push_back(a);
          buf_.push_back(a);
          if (buf_.size() == 4096) flush();
        }
      }
      for (; p <= free_stop; ++p) {
        Digit a = sm.draw(sb.free_end - p + 1, r, uniform01(g), o_.use_table);
        r = 1.0 / (static_cast<double>(a) + r);
        if (a == spec.i) {
          if (++run >= thr && reject) return false;
        } else {
          run = 0;
        }
        if (p <= keep_) prefix.push_back(a);
        buf_.push_back(a);
        if (buf_.size() == 4096) flush();
      }
      flush();
      if (sb.free_end < stop_) {
        std::uint64_t t = std::min(sb.end, stop_) - sb.free_end;
        for (std::uint64_t p = sb.free_end + 1; p <= std::min(sb.free_end + t, keep_); ++p)
          prefix.push_back(spec.i);
        sink_.put_run(spec.i, t);
      }
    }
    return true;
  }

 private:
  void flush() {
    if (!buf_.empty()) sink_.put(buf_.data(), buf_.size());
    buf_.clear();
  }

  const CantorMeasure& mu_;
  std::uint64_t stop_;
  DigitSink& sink_;
  std::uint64_t keep_;
  SampleOptions o_;
  Digits buf_;
};

StreamResult drive(const CantorMeasure& mu, std::uint64_t stop, std::uint64_t seed, std::uint64_t index,
                   DigitSink& sink, std::uint64_t keep_prefix, const SampleOptions& opts) {
  const CantorSpec& spec = mu.spec();
  if (stop > spec.seq.m.back()) fail(ErrorKind::Exhausted, "depth beyond the constructed sequences");
  std::mt19937_64 g = stream_for(seed, index);
  StreamResult res;
  Drawer dr(mu, stop, sink, keep_prefix, opts);
  for (;;) {
    sink.reset();
    res.prefix.clear();
    if (dr.run(g, res.prefix)) break;
    if (++res.restarts > opts.max_restarts) fail(ErrorKind::BudgetExceeded, "too many rejected samples");
  }
  res.emitted = stop;
  return res;
}

}  // namespace

SampleResult sample_measure(const CantorMeasure& mu, std::uint64_t depth, std::uint64_t seed,
                            std::uint64_t index, const SampleOptions& opts) {
  CollectSink sink;
  StreamResult r = drive(mu, depth, seed, index, sink, 0, opts);
  return {std::move(sink.digits), r.restarts};
}

StreamResult sample_stream(const CantorMeasure& mu, std::size_t segments, std::uint64_t seed,
                           std::uint64_t index, DigitSink& sink, std::uint64_t keep_prefix,
                           const SampleOptions& opts) {
  if (segments < 1 || segments > segment_count(mu.spec()))
    fail(ErrorKind::Exhausted, "segment count beyond the constructed sequences");
  return drive(mu, mu.spec().seq.m[segments - 1], seed, index, sink, keep_prefix, opts);
}

}  // namespace cfdim
