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

// Data-parallel inner loops. Every kernel has a plain serial reference in
// kernels::serial and an OpenMP version in kernels::omp. The OpenMP versions
// split work only across independent output elements and keep each
// element's reduction order identical to the serial loop, so both produce
// bitwise-identical results for any thread count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gradecraft/matrix.hpp"

namespace gradecraft::kernels {

enum class Exec { serial, parallel };

/// Compressed sparse rows with cached squared norms, used for kernel
/// evaluations on mostly-zero one-hot data.
struct SparseRows {
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> index;
  std::vector<double> value;
  std::vector<double> sq_norm;
  std::size_t cols = 0;

  static SparseRows from_dense(const Matrix& x);
  std::size_t rows() const noexcept { return row_ptr.size() - 1; }
  double dot(std::size_t a, std::size_t b) const noexcept;
  double dot_dense(std::size_t a, std::span<const double> z) const noexcept;
};

/// Per-feature bin assignment for histogram split search. Feature-major:
/// bins[f * n_samples + i] is the bin of sample i on feature f, and
/// bin_values[f] lists the sorted distinct values of feature f.
struct BinnedFeatures {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  std::vector<std::uint32_t> bins;
  std::vector<std::vector<double>> bin_values;
  std::vector<std::size_t> bin_offset;  // prefix sums of bin counts
  std::size_t total_bins = 0;

  static BinnedFeatures build(const Matrix& x);
};

namespace serial {
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void im2col3x3(std::span<const double> x, std::span<double> cols, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w);
void col2im3x3(std::span<const double> cols, std::span<double> dx, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w);
void rbf_row(const SparseRows& rows, std::size_t i, double gamma, std::span<double> out);
void histograms(const BinnedFeatures& binned, std::span<const std::uint32_t> samples,
                std::span<const double> targets, std::span<double> sums,
                std::span<std::uint32_t> counts);
}  // namespace serial

namespace omp {
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void im2col3x3(std::span<const double> x, std::span<double> cols, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w);
void col2im3x3(std::span<const double> cols, std::span<double> dx, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w);
void rbf_row(const SparseRows& rows, std::size_t i, double gamma, std::span<double> out);
void histograms(const BinnedFeatures& binned, std::span<const std::uint32_t> samples,
                std::span<const double> targets, std::span<double> sums,
                std::span<std::uint32_t> counts);
}  // namespace omp

// Dispatchers. Shapes: gemm_nt computes C[m,n] = A[m,k] * B[n,k]^T,
// gemm_nn C[m,n] = A[m,k] * B[k,n], gemm_tn C[m,n] = A[k,m]^T * B[k,n].
// With accumulate the product is added to C instead of overwriting it.
void gemm_nt(Exec exec, std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t n, std::size_t k,
             bool accumulate = false);
void gemm_nn(Exec exec, std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t n, std::size_t k,
             bool accumulate = false);
void gemm_tn(Exec exec, std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t n, std::size_t k,
             bool accumulate = false);

/// Same-padding 3x3 patches: x is [n, channels, h, w]; cols is
/// [n*h*w, channels*9] with zero padding outside the grid.
void im2col3x3(Exec exec, std::span<const double> x, std::span<double> cols, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w);
/// Adjoint of im2col3x3; adds into dx.
void col2im3x3(Exec exec, std::span<const double> cols, std::span<double> dx, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w);

/// out[j] = exp(-gamma * ||x_i - x_j||^2) for every stored row j.
void rbf_row(Exec exec, const SparseRows& rows, std::size_t i, double gamma,
             std::span<double> out);

/// Target sums and sample counts per (feature, bin) over `samples`.
void histograms(Exec exec, const BinnedFeatures& binned, std::span<const std::uint32_t> samples,
                std::span<const double> targets, std::span<double> sums,
                std::span<std::uint32_t> counts);

}  // namespace gradecraft::kernels
