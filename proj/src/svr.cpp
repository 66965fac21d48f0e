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

// Epsilon-SVR dual solved by SMO with second-order working-set selection.
//
// The 2n dual variables are a = (alpha, alpha*) with signs s_t = +1 for the
// first half and -1 for the second. The solver minimizes
//   0.5 a'Qa + p'a   s.t.  s'a = 0,  0 <= a_t <= C
// with Q_st = s_s s_t K(s mod n, t mod n) and p_t = eps - s_t y_(t mod n).

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "gradecraft/classical.hpp"
#include "gradecraft/error.hpp"

namespace gradecraft::classical {
namespace {

constexpr double kTau = 1e-12;

/// Least-recently-used cache of kernel rows.
class KernelCache {
 public:
  KernelCache(const kernels::SparseRows& rows, double gamma, std::size_t megabytes, Exec exec)
      : rows_(rows), gamma_(gamma), exec_(exec) {
    const std::size_t row_bytes = std::max<std::size_t>(rows.rows(), 1) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, megabytes * 1024 * 1024 / row_bytes);
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    lru_.emplace_front(i, std::vector<double>(rows_.rows()));
    kernels::rbf_row(exec_, rows_, i, gamma_, lru_.front().second);
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  const kernels::SparseRows& rows_;
  double gamma_;
  Exec exec_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("RBF gamma must be > 0");
  if (x.size() != z.size()) throw ShapeError("kernel arguments differ in dimension");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - z[i];
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

FittedRegressor fit_rbf_svr(const Matrix& x, std::span<const double> y, double c, double epsilon,
                            double gamma, const SmoOptions& options, SmoReport* report) {
  if (!(c > 0.0)) throw InvalidArgument("SVR C must be > 0");
  if (!(epsilon >= 0.0)) throw InvalidArgument("SVR epsilon must be >= 0");
  if (!(gamma > 0.0)) throw InvalidArgument("RBF gamma must be > 0");
  if (x.rows() == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (x.rows() != y.size()) throw ShapeError("feature rows and target count differ");

  const std::size_t n = x.rows();
  const std::size_t l = 2 * n;
  const auto rows = kernels::SparseRows::from_dense(x);
  KernelCache cache(rows, gamma, options.cache_megabytes, options.exec);

  auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  std::vector<double> alpha(l, 0.0);
  std::vector<double> p(l);
  std::vector<double> grad(l);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = epsilon - y[i];
    p[i + n] = epsilon + y[i];
  }
  grad = p;
  // K(i, i) = 1 for the RBF kernel, so every Q_tt = 1.
  constexpr double kDiag = 1.0;

  auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  const long max_iter = options.max_iterations > 0
                            ? options.max_iterations
                            : std::max<long>(10'000'000L, 100L * static_cast<long>(l));
  long iter = 0;
  for (;; ++iter) {
    // Working-set selection: i maximizes -s_t G_t over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmax_idx = -1;
    for (std::size_t t = 0; t < l; ++t) {
      if (sign(t) > 0) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          gmax_idx = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        gmax_idx = static_cast<std::ptrdiff_t>(t);
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmin_idx = -1;
    double obj_diff_min = std::numeric_limits<double>::infinity();
    const std::vector<double>* k_i = nullptr;
    std::size_t i = 0;
    if (gmax_idx >= 0) {
      i = static_cast<std::size_t>(gmax_idx);
      k_i = &cache.row(i % n);
    }
    for (std::size_t t = 0; t < l; ++t) {
      const double q_it = k_i ? sign(i) * sign(t) * (*k_i)[t % n] : 0.0;
      if (sign(t) > 0) {
        if (!at_lower(t)) {
          const double grad_diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (grad_diff > 0.0 && k_i) {
            double quad = 2.0 * kDiag - 2.0 * sign(i) * q_it;
            if (quad <= 0.0) quad = kTau;
            const double obj_diff = -(grad_diff * grad_diff) / quad;
            if (obj_diff <= obj_diff_min) {
              gmin_idx = static_cast<std::ptrdiff_t>(t);
              obj_diff_min = obj_diff;
            }
          }
        }
      } else if (!at_upper(t)) {
        const double grad_diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (grad_diff > 0.0 && k_i) {
          double quad = 2.0 * kDiag + 2.0 * sign(i) * q_it;
          if (quad <= 0.0) quad = kTau;
          const double obj_diff = -(grad_diff * grad_diff) / quad;
          if (obj_diff <= obj_diff_min) {
            gmin_idx = static_cast<std::ptrdiff_t>(t);
            obj_diff_min = obj_diff;
          }
        }
      }
    }
    if (gmax + gmax2 < options.tolerance || gmin_idx < 0) break;
    if (iter >= max_iter) {
      double v = 0.0;
      for (std::size_t t = 0; t < l; ++t) v += alpha[t] * (grad[t] + p[t]);
      throw ConvergenceError("RBF SVR did not reach the KKT tolerance within " +
                                 std::to_string(max_iter) + " iterations",
                             0.5 * v);
    }

    const auto j = static_cast<std::size_t>(gmin_idx);
    // Copy row i: fetching row j may evict it from the cache.
    const std::vector<double> row_i = *k_i;
    const std::vector<double>& row_j = cache.row(j % n);
    const double q_ij = sign(i) * sign(j) * row_i[j % n];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    if (sign(i) != sign(j)) {
      double quad = 2.0 * kDiag + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = 2.0 * kDiag - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_ai = alpha[i] - old_ai;
    const double d_aj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < l; ++t) {
      grad[t] += sign(i) * sign(t) * row_i[t % n] * d_ai +
                 sign(j) * sign(t) * row_j[t % n] * d_aj;
    }
  }

  // Intercept: average over free variables, else the midpoint of the
  // feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = sign(t) * grad[t];
    if (at_upper(t)) {
      if (sign(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (sign(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  KernelSvrParams params;
  params.gamma = gamma;
  params.bias = -rho;
  std::vector<std::size_t> support;
  for (std::size_t s = 0; s < n; ++s) {
    if (alpha[s] - alpha[s + n] != 0.0) support.push_back(s);
  }
  params.support_vectors = Matrix(support.size(), x.cols());
  params.coef.reserve(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto src = x.row(support[k]);
    std::copy(src.begin(), src.end(), params.support_vectors.row(k).begin());
    params.coef.push_back(alpha[support[k]] - alpha[support[k] + n]);
  }

  if (report) {
    double v = 0.0;
    for (std::size_t t = 0; t < l; ++t) v += alpha[t] * (grad[t] + p[t]);
    report->iterations = iter;
    report->dual_objective = 0.5 * v;
    report->support_vectors = support.size();
  }

  FittedRegressor model;
  model.spec.family = Family::RbfSVR;
  model.spec.params.c = c;
  model.spec.params.epsilon = epsilon;
  model.spec.params.gamma = gamma;
  model.spec.params.svr_tolerance = options.tolerance;
  model.n_features = x.cols();
  model.params = std::move(params);
  model.meta.samples = n;
  return model;
}

}  // namespace gradecraft::classical
