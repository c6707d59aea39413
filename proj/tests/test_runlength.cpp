#include <doctest.h>

#include <random>

#include "cfdim/cantor.hpp"
#include "cfdim/error.hpp"
#include "cfdim/parallel.hpp"
#include "cfdim/runlength.hpp"
#include "cfdim/verify.hpp"

using namespace cfdim;

namespace {

// Quadratic oracle: R_n as the longest constant window inside the first n digits.
std::uint32_t brute_R(const Digits& d, std::size_t n) {
  std::uint32_t best = 0;
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t e = s;
    while (e < n && d[e] == d[s]) ++e;
    best = std::max<std::uint32_t>(best, static_cast<std::uint32_t>(e - s));
  }
  return best;
}

}  // namespace

TEST_CASE("run profile on the hand examples") {
  CHECK(run_profile(Digits{1, 2, 2, 3, 2, 2, 2, 1}).at(8) == 3);
  CHECK(run_profile(Digits{5}).at(1) == 1);
  RunProfile rp = run_profile(Digits(17, 4));
  for (std::uint64_t n = 1; n <= 17; ++n) CHECK(rp.at(n) == n);
  REQUIRE(rp.blocks.size() == 1);
  CHECK(rp.blocks[0].start == 1);
  CHECK(rp.blocks[0].length == 17);
  CHECK(rp.blocks[0].digit == 4);
}

TEST_CASE("run profile equals the brute-force oracle") {
  std::mt19937_64 g(3);
  for (int t = 0; t < 1000; ++t) {
    Digits d(1 + g() % 200);
    const Digit alphabet = 1 + g() % 3;
    for (auto& a : d) a = 1 + g() % alphabet;
    RunProfile rp = run_profile(d);
    REQUIRE(rp.R.size() == d.size());
    CHECK(rp.at(1) == 1);
    for (std::size_t n = 1; n <= d.size(); ++n) {
      CHECK(rp.at(n) == brute_R(d, n));
      if (n > 1) {
        const auto step = rp.at(n) - rp.at(n - 1);
        CHECK((step == 0 || step == 1));
      }
    }
    // Blocks tile the sequence with maximal constant runs.
    std::uint64_t pos = 1;
    for (std::size_t b = 0; b < rp.blocks.size(); ++b) {
      const Run& r = rp.blocks[b];
      CHECK(r.start == pos);
      for (std::uint64_t k = r.start; k < r.start + r.length; ++k) CHECK(d[k - 1] == r.digit);
      if (b > 0) CHECK(rp.blocks[b - 1].digit != r.digit);
      pos += r.length;
    }
    CHECK(pos == d.size() + 1);
  }
}

TEST_CASE("streaming tracker agrees with the profile") {
  std::mt19937_64 g(9);
  for (int t = 0; t < 200; ++t) {
    Digits d;
    RunTracker tr;
    const int chunks = 1 + static_cast<int>(g() % 20);
    for (int c = 0; c < chunks; ++c) {
      const Digit a = 1 + g() % 2;
      const std::uint64_t len = g() % 6;
      d.insert(d.end(), len, a);
      tr.put_run(a, len);
    }
    if (d.empty()) continue;
    CHECK(tr.position() == d.size());
    CHECK(tr.longest() == run_profile(d).at(d.size()));
  }
}

TEST_CASE("block endpoint conventions differ by one at the start") {
  Run r{4, 3, 1};
  CHECK(block_endpoints(r, RunConvention::ExclusiveStart) == std::pair<std::uint64_t, std::uint64_t>{3, 6});
  CHECK(block_endpoints(r, RunConvention::InclusiveStart) == std::pair<std::uint64_t, std::uint64_t>{4, 6});
}

TEST_CASE("ratio estimates on constant digits and window errors") {
  RatioEstimate e = ratio_estimates(run_profile(Digits(1000, 1)), 0.5);
  CHECK(e.liminf_est == 1.0);
  CHECK(e.limsup_est == 1.0);
  CHECK(e.k_min == 501);
  CHECK(e.n_max == 1000);

  RunProfile small = run_profile(Digits{1, 2, 3});
  CHECK_THROWS_AS(ratio_estimates(small, 0.2), Error);
  try {
    ratio_estimates(small, 0.2);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::EmptyWindow);
  }
  CHECK_THROWS_AS(ratio_estimates(small, 0.0), Error);
  CHECK_THROWS_AS(ratio_estimates(small, 1.5), Error);
}

TEST_CASE("ratio estimates are ordered on random input") {
  std::mt19937_64 g(21);
  for (int t = 0; t < 200; ++t) {
    Digits d(10 + g() % 300);
    for (auto& a : d) a = 1 + g() % 2;
    RatioEstimate e = ratio_estimates(run_profile(d), 0.5);
    CHECK(0.0 <= e.liminf_est);
    CHECK(e.liminf_est <= e.limsup_est);
    CHECK(e.limsup_est <= 1.0);
  }
}

TEST_CASE("Gauss-measure random digits have vanishing run ratios") {
  auto g = stream_for(5, 0);
  LebesgueChain chain(g);
  Digits d(1000000);
  for (auto& a : d) a = chain.next();
  RatioEstimate e = ratio_estimates(run_profile(d), 0.5);
  CHECK(e.liminf_est <= 0.01);
  CHECK(e.limsup_est <= 0.01);
}

TEST_CASE("run-length construction tracks its design targets") {
  for (std::uint64_t seed : {17, 18, 19}) {
    const mpq_class alpha(1, 3), beta(1, 2);
    CantorSpec spec = make_cantor_spec(3, 1, construct_sequences_runlength(alpha, beta));
    CantorMeasure mu(spec);
    std::size_t k = 0;
    while (spec.seq.m[k] < 20000) ++k;
    SampleResult s = sample_measure(mu, spec.seq.m[k], seed);
    REQUIRE(s.digits.size() >= 10000);
    // Runs are read off f(x): the marker digit keeps designed runs from merging.
    InsertResult fx = insert_map(spec, s.digits);
    RatioEstimate e = ratio_estimates(run_profile(fx.digits), 0.5);
    CHECK(std::abs(e.liminf_est - 1.0 / 3.0) <= 0.05);
    CHECK(std::abs(e.limsup_est - 1.0 / 2.0) <= 0.05);
  }
}
