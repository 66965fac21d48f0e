// Copyright 2026 The Gradecraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP for each kernel, at the shapes training and
// fitting actually use. Run with --benchmark_filter to pick one kernel.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "gradecraft/kernels.hpp"
#include "gradecraft/rng.hpp"

using namespace gradecraft;
using kernels::Exec;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

// One-hot rows with about 8 of 198 cells set, like encoded routes.
Matrix one_hot_rows(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, 198);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 8; ++k) x(i, static_cast<std::size_t>(rng.uniform_int(0, 197))) = 1.0;
  }
  return x;
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "omp"); }

// Dense layer forward: batch 64, 198 -> 256.
void BM_GemmNT(benchmark::State& state) {
  const std::size_t m = 64, n = 256, k = 198;
  const auto a = random_values(m * k, 1), b = random_values(n * k, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::gemm_nt(exec_of(state), a, b, c, m, n, k);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * n * k));
  label(state);
}

// Convolution as a matrix product: 64 grids of 18x11, 32 -> 64 channels.
void BM_GemmNN(benchmark::State& state) {
  const std::size_t m = 64 * 198, n = 64, k = 32 * 9;
  const auto a = random_values(m * k, 3), b = random_values(k * n, 4);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::gemm_nn(exec_of(state), a, b, c, m, n, k);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * n * k));
  label(state);
}

// Weight gradient of the same convolution.
void BM_GemmTN(benchmark::State& state) {
  const std::size_t m = 32 * 9, n = 64, k = 64 * 198;
  const auto a = random_values(k * m, 5), b = random_values(k * n, 6);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    kernels::gemm_tn(exec_of(state), a, b, c, m, n, k);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * n * k));
  label(state);
}

void BM_Im2col(benchmark::State& state) {
  const std::size_t n = 64, channels = 32, h = 18, w = 11;
  const auto x = random_values(n * channels * h * w, 7);
  std::vector<double> cols(n * h * w * channels * 9);
  for (auto _ : state) {
    kernels::im2col3x3(exec_of(state), x, cols, n, channels, h, w);
    benchmark::DoNotOptimize(cols.data());
  }
  label(state);
}

void BM_Col2im(benchmark::State& state) {
  const std::size_t n = 64, channels = 32, h = 18, w = 11;
  const auto cols = random_values(n * h * w * channels * 9, 8);
  std::vector<double> dx(n * channels * h * w);
  for (auto _ : state) {
    std::fill(dx.begin(), dx.end(), 0.0);
    kernels::col2im3x3(exec_of(state), cols, dx, n, channels, h, w);
    benchmark::DoNotOptimize(dx.data());
  }
  label(state);
}

// One kernel-matrix row against the default 8000-route subsample.
void BM_RbfRow(benchmark::State& state) {
  const auto rows = kernels::SparseRows::from_dense(one_hot_rows(8000, 9));
  std::vector<double> out(rows.rows());
  std::size_t i = 0;
  for (auto _ : state) {
    kernels::rbf_row(exec_of(state), rows, i, 1.0 / 198, out);
    benchmark::DoNotOptimize(out.data());
    i = (i + 1) % rows.rows();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rows.rows()));
  label(state);
}

// Split-search histograms for a root node of 20000 routes.
void BM_Histograms(benchmark::State& state) {
  const auto binned = kernels::BinnedFeatures::build(one_hot_rows(20000, 10));
  const auto targets = random_values(binned.n_samples, 11);
  std::vector<std::uint32_t> samples(binned.n_samples);
  std::iota(samples.begin(), samples.end(), 0u);
  std::vector<double> sums(binned.total_bins);
  std::vector<std::uint32_t> counts(binned.total_bins);
  for (auto _ : state) {
    kernels::histograms(exec_of(state), binned, samples, targets, sums, counts);
    benchmark::DoNotOptimize(sums.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(binned.n_samples));
  label(state);
}

}  // namespace

BENCHMARK(BM_GemmNT)->Arg(0)->Arg(1)->UseRealTime();
BENCHMARK(BM_GemmNN)->Arg(0)->Arg(1)->UseRealTime();
BENCHMARK(BM_GemmTN)->Arg(0)->Arg(1)->UseRealTime();
BENCHMARK(BM_Im2col)->Arg(0)->Arg(1)->UseRealTime();
BENCHMARK(BM_Col2im)->Arg(0)->Arg(1)->UseRealTime();
BENCHMARK(BM_RbfRow)->Arg(0)->Arg(1)->UseRealTime();
BENCHMARK(BM_Histograms)->Arg(0)->Arg(1)->UseRealTime();

BENCHMARK_MAIN();
