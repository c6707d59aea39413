#pragma once

// Cantor-type subsets with prescribed i-runs, the mass distribution on
// them, a sampler for that distribution, and the marker-insertion map.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfdim/bigreal.hpp"
#include "cfdim/cf_core.hpp"
#include "cfdim/dim_solver.hpp"
#include "cfdim/exact.hpp"
#include "cfdim/exponents.hpp"
#include "cfdim/transfer.hpp"

namespace cfdim {

inline constexpr std::uint64_t kSequenceCap = 1ULL << 62;

// Runs a_{n_k+1} = ... = a_{m_k} = i.
struct SeqPair {
  std::vector<std::uint64_t> n, m;
  std::string recipe;
  std::map<std::string, std::string> params;
  // Per-block alphabet bounds for the infinite-exponent recipes; 0 marks a
  // bound too large to materialise (see bounds_log2).
  std::vector<mpz_class> bounds;
  std::vector<double> bounds_log2;

  std::size_t size() const { return n.size(); }
  std::uint64_t run_length(std::size_t k) const { return m[k] - n[k]; }  // 0-based k
};

SeqPair construct_sequences(const mpq_class& nu_hat, const mpq_class& nu,
                            std::size_t max_terms = 64);
SeqPair construct_sequences_infinite(const mpq_class& nu_hat, std::size_t max_terms = 64);
SeqPair construct_sequences_runlength(const mpq_class& alpha, const mpq_class& beta,
                                      std::size_t max_terms = 64);

// n_k < m_k < n_{k+1} and non-decreasing run lengths.
bool sequences_valid(const SeqPair& sp);

struct CantorSpec {
  std::uint64_t B = 3;
  Digit i = 1;
  Digit d = 0;  // marker digit; 0 selects B + 1
  SeqPair seq;
  bool per_block_bounds = false;  // infinite recipes: B_k instead of B
};

CantorSpec make_cantor_spec(std::uint64_t B, Digit i, SeqPair seq, Digit d = 0);
CantorSpec make_cantor_spec_infinite(Digit i, SeqPair seq);

// Segment k (1-based) covers positions m_{k-1}+1 .. m_k: free digits up to
// n_k, then the forced run.
struct SegmentBounds {
  std::size_t k = 0;
  std::uint64_t start = 0, free_end = 0, end = 0;
  std::uint64_t free_length() const { return free_end - start; }
  std::uint64_t tail_length() const { return end - free_end; }
  std::uint64_t length() const { return end - start; }
};

std::size_t segment_count(const CantorSpec& spec);
SegmentBounds segment_bounds(const CantorSpec& spec, std::size_t k);
// Segment containing 1-based position p.
std::size_t segment_of(const CantorSpec& spec, std::uint64_t p);
// Alphabet bound for the free digits of segment k.
mpz_class segment_alphabet(const CantorSpec& spec, std::size_t k);

struct ChildSet {
  bool forced = false;
  Digit digit = 0;    // the forced digit
  mpz_class bound;    // free digits 1..bound
};

ChildSet admissible_children(const CantorSpec& spec, std::span<const Digit> prefix);
void check_admissible(const CantorSpec& spec, std::span<const Digit> prefix);

// Per-segment ingredients of the measure: the root s~ of the segment sum and
// Phi_R(r) = sum over the R remaining free digits and the run, in the state
// r = q_{j-1}/q_j of the segment prefix.
class SegmentModel {
 public:
  SegmentModel(const SegmentBounds& sb, std::uint64_t B, Digit i, const SolverOptions& opts);

  const SegmentBounds& bounds() const { return sb_; }
  std::uint64_t alphabet() const { return B_; }
  double s() const { return s_; }
  const std::string& s_method() const { return s_method_; }

  double log_phi(std::uint64_t R, double r) const;
  // Conditional law of the next digit with R free digits left (this one
  // included); probabilities for a = 1..B.
  void child_probabilities(std::uint64_t R, double r, std::vector<double>& out) const;
  Digit draw(std::uint64_t R, double r, double u, bool allow_table) const;
  bool table_usable(std::uint64_t R) const;
  // Cumulative conditional law on a uniform r-grid, valid when
  // table_usable(R): row j holds P(a' <= a | r = j / grid) for a < B.
  const double* stationary_table() const;
  static std::uint64_t table_grid();

 private:
  double log_phi_exact(std::uint64_t R, double r) const;
  void build_table() const;

  SegmentBounds sb_;
  std::uint64_t B_;
  Digit i_;
  double s_ = 0;
  std::string s_method_;
  RunTail tail_;
  double log_const_ = 0;
  std::unique_ptr<ChebyshevGrid> grid_;
  std::unique_ptr<TransferOperator> op_;
  std::unique_ptr<Orbit> orbit_;
  mutable std::vector<double> table_;
  mutable std::vector<double> scratch_;
};

struct MeasureNode {
  Digits digits;
  BigReal log_mass;
  std::size_t boundaries = 0;  // number of m_k with m_k <= depth
  std::size_t segment = 0;     // segment holding the next position
};

class CantorMeasure {
 public:
  explicit CantorMeasure(CantorSpec spec, SolverOptions opts = {});

  const CantorSpec& spec() const { return spec_; }
  const SegmentModel& segment(std::size_t k) const;  // builds on first use
  double s_tilde(std::size_t k) const { return segment(k).s(); }

  MeasureNode node(std::span<const Digit> prefix) const;
  BigReal log_mass(std::span<const Digit> prefix) const { return node(prefix).log_mass; }
  // log mu(I_n) / log |I_n|.
  double local_dimension(std::span<const Digit> prefix) const;

 private:
  CantorSpec spec_;
  SolverOptions opts_;
  mutable std::vector<std::unique_ptr<SegmentModel>> models_;
};

// Consumer of a digit stream.
class DigitSink {
 public:
  virtual ~DigitSink() = default;
  virtual void put(const Digit* d, std::size_t n) = 0;
  virtual void put_run(Digit a, std::uint64_t count) = 0;
  virtual void reset() = 0;
};

class CollectSink : public DigitSink {
 public:
  void put(const Digit* d, std::size_t n) override { digits.insert(digits.end(), d, d + n); }
  void put_run(Digit a, std::uint64_t count) override { digits.insert(digits.end(), count, a); }
  void reset() override { digits.clear(); }
  Digits digits;
};

class ScannerSink : public DigitSink {
 public:
  explicit ScannerSink(BlockScanner& s) : s_(s) {}
  void put(const Digit* d, std::size_t n) override { s_.put(d, n); }
  void put_run(Digit a, std::uint64_t count) override { s_.put_run(a, count); }
  void reset() override { s_.reset(); }

 private:
  BlockScanner& s_;
};

struct SampleOptions {
  bool use_table = false;       // stationary CDF tables for long free stretches
  bool reject_accidental = true;
  std::uint64_t max_restarts = 100000;
};

struct SampleResult {
  Digits digits;
  std::uint64_t restarts = 0;
};

SampleResult sample_measure(const CantorMeasure& mu, std::uint64_t depth, std::uint64_t seed,
                            std::uint64_t index = 0, const SampleOptions& opts = {});

struct StreamResult {
  std::uint64_t restarts = 0;
  std::uint64_t emitted = 0;  // positions of x written to the sink
  Digits prefix;              // first keep_prefix digits of x
};

// Streams x through position m_{segments} into the sink.
StreamResult sample_stream(const CantorMeasure& mu, std::size_t segments, std::uint64_t seed,
                           std::uint64_t index, DigitSink& sink, std::uint64_t keep_prefix = 0,
                           const SampleOptions& opts = {.use_table = true});

struct InsertResult {
  Digits digits;
  std::vector<std::uint64_t> marked;  // 1-based positions of inserted markers
  double density = 0;                 // |K ∩ [1,N]| / N over the output
};

// The marker d goes in front of every chunk of length m_k - n_k of block
// k = (n_k, n_{k+1}]; the first chunk is the run itself. Positions 1..n_1
// are copied unchanged.
InsertResult insert_map(const CantorSpec& spec, std::span<const Digit> x);
Digits delete_marked(std::span<const Digit> fx, std::span<const std::uint64_t> marked);

// Streaming form of insert_map.
class InsertStream : public DigitSink {
 public:
  InsertStream(const CantorSpec& spec, DigitSink& out);
  void put(const Digit* d, std::size_t n) override;
  void put_run(Digit a, std::uint64_t count) override;
  void reset() override;

  std::uint64_t inserted() const { return inserted_; }
  std::uint64_t in_position() const { return pos_; }
  void record_marks(std::vector<std::uint64_t>* marks) { marks_ = marks; }

 private:
  void reset_state();
  void emit_marker();

  const CantorSpec* spec_;
  DigitSink* out_;
  Digit d_;
  std::uint64_t pos_ = 0;        // input digits consumed
  std::size_t block_ = 1;        // block k = (n_k, n_{k+1}] owning next_mark_
  std::uint64_t next_mark_ = 0;  // 1-based input position preceded by d
  std::uint64_t inserted_ = 0;
  std::vector<std::uint64_t>* marks_ = nullptr;
};

}  // namespace cfdim
