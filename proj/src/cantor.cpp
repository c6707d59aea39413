#include "cfdim/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfdim/error.hpp"

namespace cfdim {

namespace {

bool fits(const mpz_class& z) { return z >= 0 && z <= mpz_class(from_u64(kSequenceCap)); }

std::uint64_t u64(const mpz_class& z) { return *to_u64(z); }

mpz_class pow_z(const mpz_class& b, unsigned long e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

// floor(m log m), evaluated with a wide margin.
mpz_class floor_m_log_m(const mpz_class& m) {
  BigReal lg = log_of(m, MPFR_RNDN, 256);
  BigReal v(mpfr_prec_t{256});
  mpfr_mul_z(v.get(), lg.get(), m.get_mpz_t(), MPFR_RNDN);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), v.get(), MPFR_RNDD);
  return out;
}

constexpr double kMaxBoundBits = 1 << 20;

}  // namespace

bool sequences_valid(const SeqPair& sp) {
  if (sp.n.size() != sp.m.size()) return false;
  for (std::size_t k = 0; k < sp.n.size(); ++k) {
    if (!(sp.n[k] < sp.m[k])) return false;
    if (k + 1 < sp.n.size() && !(sp.m[k] < sp.n[k + 1])) return false;
    if (k > 0 && sp.run_length(k) < sp.run_length(k - 1)) return false;
  }
  return true;
}

SeqPair construct_sequences(const mpq_class& nu_hat, const mpq_class& nu, std::size_t max_terms) {
  if (nu <= 0) fail(ErrorKind::OutOfRange, "nu must be positive and finite");
  if (nu_hat < 0 || nu_hat > nu / (1 + nu))
    fail(ErrorKind::OutOfRange, "need 0 <= nu_hat <= nu/(1+nu)");
  SeqPair sp;
  sp.params = {{"nu_hat", to_string(nu_hat)}, {"nu", to_string(nu)}};
  const mpq_class one_plus = 1 + nu;
  if (nu_hat == 0) {
    sp.recipe = "finite-zero";
    for (std::size_t k = 1; k <= max_terms && 2 * k < 63; ++k) {
      mpz_class base = pow_z(2, 1UL << (2 * k));
      mpz_class n = floor_q(mpq_class(one_plus * base)) + 2;
      mpz_class m = floor_q(mpq_class(one_plus * n)) + 1;
      if (!fits(m)) break;
      sp.n.push_back(u64(n));
      sp.m.push_back(u64(m));
    }
  } else {
    sp.recipe = "finite";
    const mpq_class ratio = nu / nu_hat;
    const mpq_class inv_nu = 1 / nu;
    mpz_class n = 2;
    for (std::size_t k = 1; k <= max_terms; ++k) {
      mpz_class m = floor_q(mpq_class(one_plus * n)) + 1;
      if (!fits(m)) break;
      sp.n.push_back(u64(n));
      sp.m.push_back(u64(m));
      n = floor_q(mpq_class(ratio * (n + inv_nu))) + 2;
      if (!fits(n)) break;
    }
  }
  if (!sequences_valid(sp)) fail(ErrorKind::OutOfRange, "sequence conditions fail for these parameters");
  return sp;
}

SeqPair construct_sequences_infinite(const mpq_class& nu_hat, std::size_t max_terms) {
  if (nu_hat < 0 || nu_hat > 1) fail(ErrorKind::OutOfRange, "need 0 <= nu_hat <= 1");
  SeqPair sp;
  sp.params = {{"nu_hat", to_string(nu_hat)}, {"nu", "inf"}};
  auto add_bound = [&](mpz_class b) {
    sp.bounds_log2.push_back(static_cast<double>(mpz_sizeinbase(b.get_mpz_t(), 2)));
    sp.bounds.push_back(std::move(b));
  };
  if (nu_hat == 0) {
    sp.recipe = "infinite-zero";
    for (std::size_t k = 1; k <= max_terms && 2 * k < 63; ++k) {
      mpz_class n = pow_z(2, 1UL << (2 * k));
      mpz_class m = n * n;
      if (!fits(m)) break;
      sp.n.push_back(u64(n));
      sp.m.push_back(u64(m));
      double bits = static_cast<double>(u64(n));
      if (bits <= kMaxBoundBits) {
        add_bound(pow_z(2, u64(n)));
        sp.bounds_log2.back() = bits;
      } else {
        sp.bounds.push_back(0);
        sp.bounds_log2.push_back(bits);
      }
    }
  } else if (nu_hat == 1) {
    sp.recipe = "infinite-one";
    mpz_class fact = 1, n = 1;
    for (std::size_t k = 1; k <= max_terms; ++k) {
      fact *= static_cast<unsigned long>(k + 1);
      const mpz_class& m = fact;
      if (!fits(m) || !fits(n)) break;
      sp.n.push_back(u64(n));
      sp.m.push_back(u64(m));
      double root = std::sqrt(static_cast<double>(u64(m)));
      if (root <= kMaxBoundBits) {
        mpfr_prec_t prec = static_cast<mpfr_prec_t>(root) + 96;
        BigReal rt(prec), v(prec);
        mpfr_set_z(rt.get(), m.get_mpz_t(), MPFR_RNDN);
        mpfr_sqrt(rt.get(), rt.get(), MPFR_RNDN);
        mpfr_ui_pow(v.get(), 2, rt.get(), MPFR_RNDN);
        mpz_class b;
        mpfr_get_z(b.get_mpz_t(), v.get(), MPFR_RNDD);
        sp.bounds.push_back(b);
        sp.bounds_log2.push_back(root);
      } else {
        sp.bounds.push_back(0);
        sp.bounds_log2.push_back(root);
      }
      // n_{k+1} = m_k + floor(m_k / log m_k)
      BigReal lg = log_of(m, MPFR_RNDN, 256);
      BigReal q = div(BigReal(m, MPFR_RNDN, 256), lg);
      mpz_class step;
      mpfr_get_z(step.get_mpz_t(), q.get(), MPFR_RNDD);
      n = m + step;
    }
  } else {
    sp.recipe = "infinite";
    mpz_class n = 2;
    for (std::size_t k = 1; k <= max_terms; ++k) {
      mpz_class nk = pow_z(n, static_cast<unsigned long>(k));
      mpz_class m = floor_q(mpq_class(nu_hat * nk)) + n;
      if (!fits(m)) break;
      sp.n.push_back(u64(n));
      sp.m.push_back(u64(m));
      add_bound(floor_m_log_m(m));
      n = nk + 2 * n;
      if (!fits(n)) break;
    }
  }
  if (!sequences_valid(sp)) fail(ErrorKind::OutOfRange, "sequence conditions fail for these parameters");
  return sp;
}

SeqPair construct_sequences_runlength(const mpq_class& alpha, const mpq_class& beta,
                                      std::size_t max_terms) {
  if (!(alpha > 0 && alpha <= beta / (1 + beta) && beta < 1))
    fail(ErrorKind::OutOfRange, "need 0 < alpha <= beta/(1+beta) < beta < 1");
  SeqPair sp;
  sp.recipe = "runlength";
  sp.params = {{"alpha", to_string(alpha)}, {"beta", to_string(beta)}};
  const mpq_class grow = (1 - alpha) / alpha;
  const mpq_class stretch = 1 / (1 - beta);
  mpz_class n = 2;
  for (std::size_t k = 1; k <= max_terms; ++k) {
    mpz_class m = floor_q(mpq_class(stretch * n)) + 1;
    if (!fits(m)) break;
    sp.n.push_back(u64(n));
    sp.m.push_back(u64(m));
    n = floor_q(mpq_class(grow * (m - n))) + 2;
    if (!fits(n)) break;
  }
  if (!sequences_valid(sp)) fail(ErrorKind::OutOfRange, "sequence conditions fail for these parameters");
  return sp;
}

CantorSpec make_cantor_spec(std::uint64_t B, Digit i, SeqPair seq, Digit d) {
  if (B < 1) fail(ErrorKind::OutOfRange, "alphabet bound must be >= 1");
  if (i < 1) fail(ErrorKind::OutOfRange, "run digit must be >= 1");
  if (seq.size() == 0) fail(ErrorKind::OutOfRange, "empty sequence pair");
  if (!sequences_valid(seq)) fail(ErrorKind::OutOfRange, "invalid sequence pair");
  if (d == 0) d = std::max(B, i) + 1;
  if (d <= B || d == i) fail(ErrorKind::OutOfRange, "marker digit must exceed B and differ from i");
  CantorSpec s;
  s.B = B;
  s.i = i;
  s.d = d;
  s.seq = std::move(seq);
  return s;
}

CantorSpec make_cantor_spec_infinite(Digit i, SeqPair seq) {
  if (i < 1) fail(ErrorKind::OutOfRange, "run digit must be >= 1");
  if (seq.size() == 0 || seq.bounds.size() != seq.size())
    fail(ErrorKind::OutOfRange, "infinite recipe needs per-block bounds");
  CantorSpec s;
  s.B = 0;
  s.i = i;
  s.d = 0;
  s.seq = std::move(seq);
  s.per_block_bounds = true;
  return s;
}

std::size_t segment_count(const CantorSpec& spec) { return spec.seq.size(); }

SegmentBounds segment_bounds(const CantorSpec& spec, std::size_t k) {
  if (k < 1 || k > spec.seq.size()) fail(ErrorKind::Exhausted, "segment beyond the constructed sequences");
  SegmentBounds sb;
  sb.k = k;
  sb.start = k == 1 ? 0 : spec.seq.m[k - 2];
  sb.free_end = spec.seq.n[k - 1];
  sb.end = spec.seq.m[k - 1];
  if (spec.per_block_bounds && k == 1) sb.free_end = 0;  // positions 1..n_1 are forced
  return sb;
}

std::size_t segment_of(const CantorSpec& spec, std::uint64_t p) {
  const auto& m = spec.seq.m;
  auto it = std::lower_bound(m.begin(), m.end(), p);
  if (p == 0 || it == m.end()) fail(ErrorKind::Exhausted, "position beyond the constructed sequences");
  return static_cast<std::size_t>(it - m.begin()) + 1;
}

mpz_class segment_alphabet(const CantorSpec& spec, std::size_t k) {
  if (!spec.per_block_bounds) return from_u64(spec.B);
  if (k <= 1) return 0;
  const mpz_class& b = spec.seq.bounds.at(k - 2);
  if (b == 0) fail(ErrorKind::Overflow, "per-block alphabet bound too large to materialise");
  return b;
}

void check_admissible(const CantorSpec& spec, std::span<const Digit> prefix) {
  std::size_t k = 0;
  SegmentBounds sb;
  mpz_class bound;
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    std::uint64_t p = j + 1;
    if (k == 0 || p > sb.end) {
      k = segment_of(spec, p);
      sb = segment_bounds(spec, k);
      bound = sb.free_length() > 0 ? segment_alphabet(spec, k) : mpz_class(0);
    }
    Digit a = prefix[j];
    if (p > sb.free_end) {
      if (a != spec.i)
        fail(ErrorKind::Inadmissible, "digit at position " + std::to_string(p) + " must equal the run digit");
    } else if (a < 1 || from_u64(a) > bound) {
      fail(ErrorKind::Inadmissible, "digit at position " + std::to_string(p) + " outside the alphabet");
    }
  }
}

ChildSet admissible_children(const CantorSpec& spec, std::span<const Digit> prefix) {
  check_admissible(spec, prefix);
  std::uint64_t p = prefix.size() + 1;
  std::size_t k = segment_of(spec, p);
  SegmentBounds sb = segment_bounds(spec, k);
  ChildSet c;
  if (p > sb.free_end) {
    c.forced = true;
    c.digit = spec.i;
    c.bound = 0;
  } else {
    c.bound = segment_alphabet(spec, k);
  }
  return c;
}

InsertStream::InsertStream(const CantorSpec& spec, DigitSink& out) : spec_(&spec), out_(&out) {
  if (spec.per_block_bounds) fail(ErrorKind::OutOfRange, "insert map needs a bounded alphabet");
  d_ = spec.d;
  reset_state();
}

void InsertStream::reset_state() {
  pos_ = 0;
  inserted_ = 0;
  block_ = 1;
  next_mark_ = spec_->seq.n[0] + 1;
}

void InsertStream::reset() {
  reset_state();
  out_->reset();
}

void InsertStream::emit_marker() {
  out_->put(&d_, 1);
  ++inserted_;
  if (marks_) marks_->push_back(pos_ + inserted_);
  const auto& sq = spec_->seq;
  std::uint64_t L = sq.run_length(block_ - 1);
  std::uint64_t end = block_ < sq.size() ? sq.n[block_] : std::numeric_limits<std::uint64_t>::max();
  std::uint64_t next = next_mark_ + L;
  if (next > end) {
    ++block_;
    next = end + 1;
  }
  next_mark_ = next;
}

void InsertStream::put(const Digit* d, std::size_t n) {
  while (n > 0) {
    if (pos_ + 1 == next_mark_) emit_marker();
    std::uint64_t room = next_mark_ - (pos_ + 1);
    std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(room, n));
    out_->put(d, take);
    d += take;
    n -= take;
    pos_ += take;
  }
}

void InsertStream::put_run(Digit a, std::uint64_t count) {
  while (count > 0) {
    if (pos_ + 1 == next_mark_) emit_marker();
    std::uint64_t take = std::min(next_mark_ - (pos_ + 1), count);
    out_->put_run(a, take);
    count -= take;
    pos_ += take;
  }
}

InsertResult insert_map(const CantorSpec& spec, std::span<const Digit> x) {
  check_admissible(spec, x);
  CollectSink sink;
  InsertResult r;
  InsertStream ins(spec, sink);
  ins.record_marks(&r.marked);
  ins.put(x.data(), x.size());
  r.digits = std::move(sink.digits);
  r.density = r.digits.empty() ? 0.0
                               : static_cast<double>(r.marked.size()) / static_cast<double>(r.digits.size());
  return r;
}

Digits delete_marked(std::span<const Digit> fx, std::span<const std::uint64_t> marked) {
  Digits out;
  out.reserve(fx.size());
  std::size_t j = 0;
  for (std::size_t p = 1; p <= fx.size(); ++p) {
    if (j < marked.size() && marked[j] == p) {
      ++j;
      continue;
    }
    out.push_back(fx[p - 1]);
  }
  return out;
}

}  // namespace cfdim
