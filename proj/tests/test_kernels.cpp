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

#include <doctest.h>

#include <cmath>

#include "gradecraft/classical.hpp"
#include "gradecraft/kernels.hpp"
#include "gradecraft/rng.hpp"

using namespace gradecraft;
namespace k = gradecraft::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double at_a(const std::vector<double>& a, bool transposed, std::size_t rows_or_m, std::size_t i,
            std::size_t p, std::size_t k_dim) {
  // A is [m, k] or, transposed, stored as [k, m].
  return transposed ? a[p * rows_or_m + i] : a[i * k_dim + p];
}

}  // namespace

TEST_CASE("gemm variants match a triple loop") {
  const std::size_t m = 7, n = 5, kk = 9;
  const auto a = random_values(m * kk, 1);
  const auto b = random_values(n * kk, 2);
  for (const k::Exec exec : {k::Exec::serial, k::Exec::parallel}) {
    std::vector<double> c(m * n, 0.5);

    k::gemm_nt(exec, a, b, c, m, n, kk);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t p = 0; p < kk; ++p) s += a[i * kk + p] * b[j * kk + p];
        CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-14));
      }
    }

    // b reinterpreted as [k, n]
    k::gemm_nn(exec, a, b, c, m, n, kk);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t p = 0; p < kk; ++p) s += a[i * kk + p] * b[p * n + j];
        CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-14));
      }
    }

    // a reinterpreted as [k, m]
    std::vector<double> before = c;
    k::gemm_tn(exec, a, b, c, m, n, kk, true);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t p = 0; p < kk; ++p) s += at_a(a, true, m, i, p, kk) * b[p * n + j];
        CHECK(c[i * n + j] == doctest::Approx(before[i * n + j] + s).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("serial and OpenMP kernels agree bitwise") {
  const std::size_t m = 65, n = 33, kk = 198;
  const auto a = random_values(m * kk, 3);
  const auto b = random_values(n * kk, 4);
  std::vector<double> s(m * n), p(m * n);
  k::serial::gemm_nt(a, b, s, m, n, kk, false);
  k::omp::gemm_nt(a, b, p, m, n, kk, false);
  CHECK(s == p);
  k::serial::gemm_tn(a, b, s, m, n, kk, false);
  k::omp::gemm_tn(a, b, p, m, n, kk, false);
  CHECK(s == p);

  const std::size_t batch = 3, ch = 2, h = 18, w = 11;
  const auto x = random_values(batch * ch * h * w, 5);
  std::vector<double> cs(batch * h * w * ch * 9), cp(cs.size());
  k::serial::im2col3x3(x, cs, batch, ch, h, w);
  k::omp::im2col3x3(x, cp, batch, ch, h, w);
  CHECK(cs == cp);
  std::vector<double> ds(x.size()), dp(x.size());
  k::serial::col2im3x3(cs, ds, batch, ch, h, w);
  k::omp::col2im3x3(cs, dp, batch, ch, h, w);
  CHECK(ds == dp);
}

TEST_CASE("col2im is the adjoint of im2col") {
  const std::size_t batch = 2, ch = 3, h = 6, w = 5;
  const auto x = random_values(batch * ch * h * w, 6);
  const auto c = random_values(batch * h * w * ch * 9, 7);
  std::vector<double> cols(c.size()), dx(x.size(), 0.0);
  k::im2col3x3(k::Exec::serial, x, cols, batch, ch, h, w);
  k::col2im3x3(k::Exec::serial, c, dx, batch, ch, h, w);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < c.size(); ++i) lhs += cols[i] * c[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * dx[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("im2col zero-pads at the border") {
  std::vector<double> x(1 * 1 * 3 * 3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
  std::vector<double> cols(9 * 9);
  k::im2col3x3(k::Exec::serial, x, cols, 1, 1, 3, 3);
  // Top-left output pixel sees only the lower-right 2x2 of its window.
  const std::vector<double> first(cols.begin(), cols.begin() + 9);
  CHECK(first == std::vector<double>{0, 0, 0, 0, 1, 2, 0, 4, 5});
  // The centre pixel sees the whole grid.
  const std::vector<double> centre(cols.begin() + 4 * 9, cols.begin() + 5 * 9);
  CHECK(centre == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("rbf rows match the kernel definition") {
  Rng rng(8);
  Matrix x(12, 20);
  for (double& v : x.data()) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
  const auto rows = k::SparseRows::from_dense(x);
  for (const k::Exec exec : {k::Exec::serial, k::Exec::parallel}) {
    std::vector<double> out(12);
    k::rbf_row(exec, rows, 4, 0.3, out);
    for (std::size_t j = 0; j < 12; ++j) {
      const double k = classical::rbf_kernel(x.row(4), x.row(j), 0.3);
      CHECK(out[j] == doctest::Approx(k).epsilon(1e-14));
    }
  }
}

TEST_CASE("histograms match a brute-force tally") {
  Rng rng(9);
  Matrix x(40, 6);
  for (double& v : x.data()) v = static_cast<double>(rng.uniform_int(0, 3));
  std::vector<double> y(40);
  for (auto& v : y) v = rng.uniform(0, 10);
  const auto binned = k::BinnedFeatures::build(x);
  std::vector<std::uint32_t> samples;
  for (std::uint32_t i = 0; i < 40; i += 3) samples.push_back(i);

  for (const k::Exec exec : {k::Exec::serial, k::Exec::parallel}) {
    std::vector<double> sums(binned.total_bins);
    std::vector<std::uint32_t> counts(binned.total_bins);
    k::histograms(exec, binned, samples, y, sums, counts);
    for (std::size_t f = 0; f < 6; ++f) {
      for (std::size_t b = 0; b < binned.bin_values[f].size(); ++b) {
        double s = 0;
        std::uint32_t c = 0;
        for (const auto i : samples) {
          if (x(i, f) == binned.bin_values[f][b]) {
            s += y[i];
            ++c;
          }
        }
        CHECK(counts[binned.bin_offset[f] + b] == c);
        CHECK(sums[binned.bin_offset[f] + b] == doctest::Approx(s).epsilon(1e-14));
      }
    }
  }
}
