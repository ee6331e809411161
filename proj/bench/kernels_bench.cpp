/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pdm2/kernels.hpp"

namespace {

std::vector<double> Noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

// Arguments: signal length, pattern length.
template <auto Kernel>
void BM_CrossCorrelate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const std::vector<double> signal = Noise(n, 1), pattern = Noise(m, 2);
  std::vector<double> out(n - m + 1);
  for (auto _ : state) {
    Kernel(signal, pattern, 0, n - m, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

// Arguments: series length, window length.
template <auto Kernel>
void BM_SlidingDft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = static_cast<std::size_t>(state.range(1));
  const std::vector<double> series = Noise(n, 3);
  constexpr std::size_t kValues = 8;
  std::vector<double> out((n - w + 1) * kValues);
  for (auto _ : state) {
    Kernel(series, w, 1, kValues, true, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n - w + 1));
}

void CorrelateArgs(benchmark::internal::Benchmark* b) {
  for (std::int64_t n : {2500, 20000, 200000}) b->Args({n, 155});
}

void DftArgs(benchmark::internal::Benchmark* b) {
  for (std::int64_t n : {1600, 16000, 160000}) b->Args({n, 64});
}

}  // namespace

BENCHMARK(BM_CrossCorrelate<pdm2::kernels::CrossCorrelateSerial>)->Name("CrossCorrelate/serial")->Apply(CorrelateArgs);
BENCHMARK(BM_CrossCorrelate<pdm2::kernels::CrossCorrelateParallel>)->Name("CrossCorrelate/openmp")->Apply(CorrelateArgs)->UseRealTime();
BENCHMARK(BM_SlidingDft<pdm2::kernels::SlidingDftSerial>)->Name("SlidingDft/serial")->Apply(DftArgs);
BENCHMARK(BM_SlidingDft<pdm2::kernels::SlidingDftParallel>)->Name("SlidingDft/openmp")->Apply(DftArgs)->UseRealTime();

BENCHMARK_MAIN();
