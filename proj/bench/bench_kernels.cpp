// Serial reference against the OpenMP kernels.
//
//   bench_kernels --benchmark_filter=SumPower
//   CFDIM_THREADS=4 bench_kernels

#include <benchmark/benchmark.h>

#include "cfdim/dim_solver.hpp"
#include "cfdim/parallel.hpp"
#include "cfdim/verify.hpp"

using namespace cfdim;

namespace {

SumKernelSpec kernel(std::uint64_t n) {
  SumKernelSpec s;
  s.free_length = n;
  s.tail_i = n / 2;
  s.i = 1;
  return s;
}

void SumPowerSerial(benchmark::State& st) {
  const auto B = static_cast<std::uint64_t>(st.range(0));
  const auto spec = kernel(static_cast<std::uint64_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(sum_power_serial(B, spec, 0.55).value);
  st.counters["nodes"] = static_cast<double>(dfs_nodes(B, spec.free_length));
}

void SumPowerParallel(benchmark::State& st) {
  const auto B = static_cast<std::uint64_t>(st.range(0));
  const auto spec = kernel(static_cast<std::uint64_t>(st.range(1)));
  SolverOptions opts;
  opts.parallel = true;
  for (auto _ : st) benchmark::DoNotOptimize(sum_power_deriv(B, spec, 0.55, opts).value);
  st.counters["nodes"] = static_cast<double>(dfs_nodes(B, spec.free_length));
  st.counters["threads"] = threads();
}

void SumPowerTransfer(benchmark::State& st) {
  const auto B = static_cast<std::uint64_t>(st.range(0));
  const auto spec = kernel(static_cast<std::uint64_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(sum_power_transfer(B, spec, 0.55));
}

void MonteCarlo(benchmark::State& st, bool parallel) {
  McConfig cfg;
  cfg.samples = 16;
  cfg.n_digits = static_cast<std::uint64_t>(st.range(0));
  cfg.parallel = parallel;
  for (auto _ : st) benchmark::DoNotOptimize(mc_runlength(cfg).checks.size());
  st.counters["digits"] = benchmark::Counter(static_cast<double>(cfg.samples * cfg.n_digits),
                                             benchmark::Counter::kIsIterationInvariantRate);
}

void McRunlengthSerial(benchmark::State& st) { MonteCarlo(st, false); }
void McRunlengthParallel(benchmark::State& st) { MonteCarlo(st, true); }

}  // namespace

BENCHMARK(SumPowerSerial)->Args({2, 16})->Args({3, 10})->Args({5, 7})->Unit(benchmark::kMillisecond);
BENCHMARK(SumPowerParallel)->Args({2, 16})->Args({3, 10})->Args({5, 7})->Unit(benchmark::kMillisecond);
BENCHMARK(SumPowerTransfer)->Args({2, 16})->Args({3, 10})->Args({5, 7})->Unit(benchmark::kMillisecond);
BENCHMARK(McRunlengthSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(McRunlengthParallel)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
