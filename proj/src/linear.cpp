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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "gradecraft/classical.hpp"
#include "gradecraft/error.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft::classical {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_xy(const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (x.rows() != y.size()) throw ShapeError("feature rows and target count differ");
}

// Least squares with an unpenalized intercept. The centred normal system
// (Xc'Xc + lambda I) w = Xc'yc is solved by a rank-revealing complete
// orthogonal decomposition when lambda = 0, giving the minimum-norm
// solution on collinear one-hot data, and by LDLT otherwise.
LinearParams solve_least_squares(const Matrix& x, std::span<const double> y, double lambda) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  Eigen::Map<const RowMajor> xm(x.data().data(), n, d);
  Eigen::Map<const Eigen::VectorXd> ym(y.data(), n);

  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = ym.mean();
  const Eigen::MatrixXd xc = xm.rowwise() - x_mean;
  const Eigen::VectorXd yc = ym.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  Eigen::VectorXd w;
  if (lambda == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-10);
    cod.compute(gram);
    w = cod.solve(rhs);
  } else {
    gram.diagonal().array() += lambda;
    w = gram.ldlt().solve(rhs);
  }

  LinearParams out;
  out.weights.assign(w.data(), w.data() + w.size());
  out.bias = y_mean - x_mean.dot(w);
  return out;
}

}  // namespace

FittedRegressor fit_linear(const Matrix& x, std::span<const double> y) {
  check_xy(x, y);
  FittedRegressor model;
  model.spec.family = Family::LR;
  model.n_features = x.cols();
  model.params = solve_least_squares(x, y, 0.0);
  model.meta.samples = x.rows();
  return model;
}

FittedRegressor fit_ridge(const Matrix& x, std::span<const double> y, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("ridge lambda must be >= 0");
  check_xy(x, y);
  FittedRegressor model;
  model.spec.family = Family::RidgeLR;
  model.spec.params.lambda = lambda;
  model.n_features = x.cols();
  model.params = solve_least_squares(x, y, lambda);
  model.meta.samples = x.rows();
  return model;
}

double linear_svr_objective(const LinearParams& params, const Matrix& x,
                            std::span<const double> y, double c, double epsilon) {
  double reg = params.bias * params.bias;
  for (const double w : params.weights) reg += w * w;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double f =
        std::inner_product(row.begin(), row.end(), params.weights.begin(), params.bias);
    loss += std::max(0.0, std::abs(f - y[i]) - epsilon);
  }
  return 0.5 * reg + c * loss;
}

FittedRegressor fit_linear_svr(const Matrix& x, std::span<const double> y, double c,
                               double epsilon, const LinearSvrOptions& options) {
  if (!(c > 0.0)) throw InvalidArgument("SVR C must be > 0");
  if (!(epsilon >= 0.0)) throw InvalidArgument("SVR epsilon must be >= 0");
  check_xy(x, y);

  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const auto rows = kernels::SparseRows::from_dense(x);
  constexpr double kInterceptScale = 1.0;

  std::vector<double> beta(n, 0.0);
  LinearParams params;
  params.weights.assign(d, 0.0);
  double& wb = params.bias;  // bias = wb * kInterceptScale, scale is 1

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);

  double prev = linear_svr_objective(params, x, y, c, epsilon);
  double objective = prev;
  for (int pass = 1; pass <= options.max_passes; ++pass) {
    rng.shuffle(order);
    for (const std::size_t i : order) {
      const double h = rows.sq_norm[i] + kInterceptScale * kInterceptScale;
      const double g = rows.dot_dense(i, params.weights) + wb * kInterceptScale - y[i];
      const double gp = g + epsilon;
      const double gn = g - epsilon;
      const double old = beta[i];
      double t;
      if (gp < h * old) {
        t = old - gp / h;
      } else if (gn > h * old) {
        t = old - gn / h;
      } else {
        t = 0.0;
      }
      t = std::clamp(t, -c, c);
      const double delta = t - old;
      if (delta == 0.0) continue;
      beta[i] = t;
      for (std::size_t k = rows.row_ptr[i]; k < rows.row_ptr[i + 1]; ++k) {
        params.weights[rows.index[k]] += delta * rows.value[k];
      }
      wb += delta * kInterceptScale;
    }
    objective = linear_svr_objective(params, x, y, c, epsilon);
    if (pass > 1 &&
        std::abs(prev - objective) <= options.tolerance * std::max(std::abs(objective), 1e-12)) {
      FittedRegressor model;
      model.spec.family = Family::LinearSVR;
      model.spec.params.c = c;
      model.spec.params.epsilon = epsilon;
      model.n_features = d;
      model.params = std::move(params);
      model.meta.samples = n;
      model.meta.seed = options.seed;
      return model;
    }
    prev = objective;
  }
  throw ConvergenceError("linear SVR did not converge within " +
                             std::to_string(options.max_passes) + " passes",
                         objective);
}

}  // namespace gradecraft::classical
