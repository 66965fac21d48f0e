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

#include "gradecraft/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

namespace gradecraft::kernels {
namespace {

using Index = std::ptrdiff_t;  // OpenMP loops want a signed induction variable

// All three products reduce to C[i][j] (+)= sum_p A(i, p) * B(p, j), with A
// read through strides and B row-major [k, n]. Every element is a single
// running sum over p in ascending order, started from 0 or from C, so its
// value does not depend on the tiling below or on which thread computes it.
struct Operand {
  const double* data;
  std::size_t row_stride;  // step between i (or p for B)
  std::size_t col_stride;  // step between p (or j for B)
};

constexpr std::size_t kMr = 4;    // rows per register block
constexpr std::size_t kNr = 8;    // columns per register block
constexpr std::size_t kMc = 64;   // rows per cache block
constexpr std::size_t kKc = 256;  // depth per cache block
constexpr std::size_t kNc = 64;   // columns per parallel tile

inline void block_full(const Operand& a, const double* b, std::size_t ldb, double* c,
                       std::size_t ldc, std::size_t i, std::size_t j, std::size_t p0,
                       std::size_t p1, bool from_zero) {
  double acc[kMr][kNr];
  for (std::size_t r = 0; r < kMr; ++r) {
    for (std::size_t q = 0; q < kNr; ++q) acc[r][q] = from_zero ? 0.0 : c[(i + r) * ldc + j + q];
  }
  for (std::size_t p = p0; p < p1; ++p) {
    const double* bp = b + p * ldb + j;
    for (std::size_t r = 0; r < kMr; ++r) {
      const double ar = a.data[(i + r) * a.row_stride + p * a.col_stride];
      for (std::size_t q = 0; q < kNr; ++q) acc[r][q] += ar * bp[q];
    }
  }
  for (std::size_t r = 0; r < kMr; ++r) {
    for (std::size_t q = 0; q < kNr; ++q) c[(i + r) * ldc + j + q] = acc[r][q];
  }
}

inline void block_edge(const Operand& a, const double* b, std::size_t ldb, double* c,
                       std::size_t ldc, std::size_t i0, std::size_t i1, std::size_t j0,
                       std::size_t j1, std::size_t p0, std::size_t p1, bool from_zero) {
  for (std::size_t i = i0; i < i1; ++i) {
    for (std::size_t j = j0; j < j1; ++j) {
      double acc = from_zero ? 0.0 : c[i * ldc + j];
      for (std::size_t p = p0; p < p1; ++p) {
        acc += a.data[i * a.row_stride + p * a.col_stride] * b[p * ldb + j];
      }
      c[i * ldc + j] = acc;
    }
  }
}

// C[i0:i1, j0:j1] for a product of depth k.
void gemm_tile(const Operand& a, const double* b, std::size_t ldb, double* c, std::size_t ldc,
               std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1, std::size_t k,
               bool accumulate) {
  if (k == 0) {
    if (!accumulate) {
      for (std::size_t i = i0; i < i1; ++i) std::fill(c + i * ldc + j0, c + i * ldc + j1, 0.0);
    }
    return;
  }
  for (std::size_t ic = i0; ic < i1; ic += kMc) {
    const std::size_t ie = std::min(ic + kMc, i1);
    for (std::size_t p0 = 0; p0 < k; p0 += kKc) {
      const std::size_t p1 = std::min(p0 + kKc, k);
      const bool from_zero = p0 == 0 && !accumulate;
      for (std::size_t j = j0; j < j1; j += kNr) {
        const std::size_t je = std::min(j + kNr, j1);
        std::size_t i = ic;
        if (je - j == kNr) {
          for (; i + kMr <= ie; i += kMr) block_full(a, b, ldb, c, ldc, i, j, p0, p1, from_zero);
        }
        if (i < ie) block_edge(a, b, ldb, c, ldc, i, ie, j, je, p0, p1, from_zero);
      }
    }
  }
}

void gemm_serial(const Operand& a, const double* b, std::size_t ldb, double* c, std::size_t m,
                 std::size_t n, std::size_t k, bool accumulate) {
  gemm_tile(a, b, ldb, c, n, 0, m, 0, n, k, accumulate);
}

void gemm_parallel(const Operand& a, const double* b, std::size_t ldb, double* c, std::size_t m,
                   std::size_t n, std::size_t k, bool accumulate) {
  const auto row_tiles = static_cast<Index>((m + kMc - 1) / kMc);
  const auto col_tiles = static_cast<Index>((n + kNc - 1) / kNc);
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (Index ti = 0; ti < row_tiles; ++ti) {
    for (Index tj = 0; tj < col_tiles; ++tj) {
      const std::size_t i0 = static_cast<std::size_t>(ti) * kMc;
      const std::size_t j0 = static_cast<std::size_t>(tj) * kNc;
      gemm_tile(a, b, ldb, c, n, i0, std::min(i0 + kMc, m), j0, std::min(j0 + kNc, n), k,
                accumulate);
    }
  }
}

// b is [n, k]; returns it as [k, n].
std::vector<double> transposed(std::span<const double> b, std::size_t n, std::size_t k) {
  std::vector<double> out(n * k);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) out[p * n + j] = b[j * k + p];
  }
  return out;
}

inline void im2col_row(const double* x, double* cols, std::size_t s, std::size_t y,
                       std::size_t channels, std::size_t h, std::size_t w) {
  const std::size_t width = channels * 9;
  for (std::size_t xx = 0; xx < w; ++xx) {
    double* out = cols + ((s * h + y) * w + xx) * width;
    for (std::size_t c = 0; c < channels; ++c) {
      const double* plane = x + (s * channels + c) * h * w;
      for (int ky = 0; ky < 3; ++ky) {
        const Index sy = static_cast<Index>(y) + ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const Index sx = static_cast<Index>(xx) + kx - 1;
          const bool inside = sy >= 0 && sy < static_cast<Index>(h) && sx >= 0 &&
                              sx < static_cast<Index>(w);
          out[c * 9 + static_cast<std::size_t>(ky * 3 + kx)] =
              inside ? plane[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)]
                     : 0.0;
        }
      }
    }
  }
}

inline void col2im_sample(const double* cols, double* dx, std::size_t s, std::size_t channels,
                          std::size_t h, std::size_t w) {
  const std::size_t width = channels * 9;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t xx = 0; xx < w; ++xx) {
      const double* in = cols + ((s * h + y) * w + xx) * width;
      for (std::size_t c = 0; c < channels; ++c) {
        double* plane = dx + (s * channels + c) * h * w;
        for (int ky = 0; ky < 3; ++ky) {
          const Index sy = static_cast<Index>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<Index>(h)) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const Index sx = static_cast<Index>(xx) + kx - 1;
            if (sx < 0 || sx >= static_cast<Index>(w)) continue;
            plane[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)] +=
                in[c * 9 + static_cast<std::size_t>(ky * 3 + kx)];
          }
        }
      }
    }
  }
}

inline double rbf_value(const SparseRows& rows, std::size_t i, std::size_t j, double gamma) {
  const double d2 = rows.sq_norm[i] + rows.sq_norm[j] - 2.0 * rows.dot(i, j);
  return std::exp(-gamma * std::max(d2, 0.0));
}

inline void histogram_feature(const BinnedFeatures& binned, std::size_t f,
                              std::span<const std::uint32_t> samples,
                              std::span<const double> targets, std::span<double> sums,
                              std::span<std::uint32_t> counts) {
  const std::size_t offset = binned.bin_offset[f];
  const std::size_t nbins = binned.bin_values[f].size();
  std::fill_n(sums.begin() + static_cast<Index>(offset), nbins, 0.0);
  std::fill_n(counts.begin() + static_cast<Index>(offset), nbins, 0u);
  const std::uint32_t* col = binned.bins.data() + f * binned.n_samples;
  for (const std::uint32_t s : samples) {
    const std::size_t slot = offset + col[s];
    sums[slot] += targets[s];
    ++counts[slot];
  }
}

}  // namespace

SparseRows SparseRows::from_dense(const Matrix& x) {
  SparseRows out;
  out.cols = x.cols();
  out.row_ptr.reserve(x.rows() + 1);
  out.sq_norm.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double sq = 0.0;
    const auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] != 0.0) {
        out.index.push_back(static_cast<std::uint32_t>(c));
        out.value.push_back(row[c]);
        sq += row[c] * row[c];
      }
    }
    out.row_ptr.push_back(out.index.size());
    out.sq_norm.push_back(sq);
  }
  return out;
}

double SparseRows::dot(std::size_t a, std::size_t b) const noexcept {
  std::size_t i = row_ptr[a];
  std::size_t j = row_ptr[b];
  const std::size_t ie = row_ptr[a + 1];
  const std::size_t je = row_ptr[b + 1];
  double sum = 0.0;
  while (i < ie && j < je) {
    if (index[i] == index[j]) {
      sum += value[i++] * value[j++];
    } else if (index[i] < index[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

double SparseRows::dot_dense(std::size_t a, std::span<const double> z) const noexcept {
  double sum = 0.0;
  for (std::size_t i = row_ptr[a]; i < row_ptr[a + 1]; ++i) sum += value[i] * z[index[i]];
  return sum;
}

BinnedFeatures BinnedFeatures::build(const Matrix& x) {
  BinnedFeatures out;
  out.n_samples = x.rows();
  out.n_features = x.cols();
  out.bins.resize(out.n_samples * out.n_features);
  out.bin_values.resize(out.n_features);
  out.bin_offset.resize(out.n_features + 1, 0);
  for (std::size_t f = 0; f < out.n_features; ++f) {
    std::vector<double> values(out.n_samples);
    for (std::size_t i = 0; i < out.n_samples; ++i) values[i] = x(i, f);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i < out.n_samples; ++i) {
      out.bins[f * out.n_samples + i] = static_cast<std::uint32_t>(
          std::lower_bound(values.begin(), values.end(), x(i, f)) - values.begin());
    }
    out.bin_offset[f + 1] = out.bin_offset[f] + values.size();
    out.bin_values[f] = std::move(values);
  }
  out.total_bins = out.bin_offset[out.n_features];
  return out;
}

namespace serial {

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  const auto bt = transposed(b, n, k);
  gemm_serial({a.data(), k, 1}, bt.data(), n, c.data(), m, n, k, accumulate);
}

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  gemm_serial({a.data(), k, 1}, b.data(), n, c.data(), m, n, k, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  gemm_serial({a.data(), 1, m}, b.data(), n, c.data(), m, n, k, accumulate);
}

void im2col3x3(std::span<const double> x, std::span<double> cols, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w) {
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t y = 0; y < h; ++y) im2col_row(x.data(), cols.data(), s, y, channels, h, w);
  }
}

void col2im3x3(std::span<const double> cols, std::span<double> dx, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w) {
  for (std::size_t s = 0; s < n; ++s) col2im_sample(cols.data(), dx.data(), s, channels, h, w);
}

void rbf_row(const SparseRows& rows, std::size_t i, double gamma, std::span<double> out) {
  for (std::size_t j = 0; j < rows.rows(); ++j) out[j] = rbf_value(rows, i, j, gamma);
}

void histograms(const BinnedFeatures& binned, std::span<const std::uint32_t> samples,
                std::span<const double> targets, std::span<double> sums,
                std::span<std::uint32_t> counts) {
  for (std::size_t f = 0; f < binned.n_features; ++f) {
    histogram_feature(binned, f, samples, targets, sums, counts);
  }
}

}  // namespace serial

namespace omp {

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  const auto bt = transposed(b, n, k);
  gemm_parallel({a.data(), k, 1}, bt.data(), n, c.data(), m, n, k, accumulate);
}

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  gemm_parallel({a.data(), k, 1}, b.data(), n, c.data(), m, n, k, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  gemm_parallel({a.data(), 1, m}, b.data(), n, c.data(), m, n, k, accumulate);
}

void im2col3x3(std::span<const double> x, std::span<double> cols, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w) {
#pragma omp parallel for collapse(2) schedule(static)
  for (Index s = 0; s < static_cast<Index>(n); ++s) {
    for (Index y = 0; y < static_cast<Index>(h); ++y) {
      im2col_row(x.data(), cols.data(), static_cast<std::size_t>(s), static_cast<std::size_t>(y),
                 channels, h, w);
    }
  }
}

void col2im3x3(std::span<const double> cols, std::span<double> dx, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w) {
#pragma omp parallel for schedule(static)
  for (Index s = 0; s < static_cast<Index>(n); ++s) {
    col2im_sample(cols.data(), dx.data(), static_cast<std::size_t>(s), channels, h, w);
  }
}

void rbf_row(const SparseRows& rows, std::size_t i, double gamma, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < static_cast<Index>(rows.rows()); ++j) {
    out[static_cast<std::size_t>(j)] = rbf_value(rows, i, static_cast<std::size_t>(j), gamma);
  }
}

void histograms(const BinnedFeatures& binned, std::span<const std::uint32_t> samples,
                std::span<const double> targets, std::span<double> sums,
                std::span<std::uint32_t> counts) {
#pragma omp parallel for schedule(dynamic, 4)
  for (Index f = 0; f < static_cast<Index>(binned.n_features); ++f) {
    histogram_feature(binned, static_cast<std::size_t>(f), samples, targets, sums, counts);
  }
}

}  // namespace omp

void gemm_nt(Exec exec, std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  exec == Exec::parallel ? omp::gemm_nt(a, b, c, m, n, k, accumulate)
                         : serial::gemm_nt(a, b, c, m, n, k, accumulate);
}

void gemm_nn(Exec exec, std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  exec == Exec::parallel ? omp::gemm_nn(a, b, c, m, n, k, accumulate)
                         : serial::gemm_nn(a, b, c, m, n, k, accumulate);
}

void gemm_tn(Exec exec, std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
  exec == Exec::parallel ? omp::gemm_tn(a, b, c, m, n, k, accumulate)
                         : serial::gemm_tn(a, b, c, m, n, k, accumulate);
}

void im2col3x3(Exec exec, std::span<const double> x, std::span<double> cols, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w) {
  exec == Exec::parallel ? omp::im2col3x3(x, cols, n, channels, h, w)
                         : serial::im2col3x3(x, cols, n, channels, h, w);
}

void col2im3x3(Exec exec, std::span<const double> cols, std::span<double> dx, std::size_t n,
               std::size_t channels, std::size_t h, std::size_t w) {
  exec == Exec::parallel ? omp::col2im3x3(cols, dx, n, channels, h, w)
                         : serial::col2im3x3(cols, dx, n, channels, h, w);
}

void rbf_row(Exec exec, const SparseRows& rows, std::size_t i, double gamma,
             std::span<double> out) {
  exec == Exec::parallel ? omp::rbf_row(rows, i, gamma, out)
                         : serial::rbf_row(rows, i, gamma, out);
}

void histograms(Exec exec, const BinnedFeatures& binned, std::span<const std::uint32_t> samples,
                std::span<const double> targets, std::span<double> sums,
                std::span<std::uint32_t> counts) {
  exec == Exec::parallel ? omp::histograms(binned, samples, targets, sums, counts)
                         : serial::histograms(binned, samples, targets, sums, counts);
}

}  // namespace gradecraft::kernels
