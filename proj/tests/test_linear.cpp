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
#include <functional>

#include "gradecraft/classical.hpp"
#include "gradecraft/error.hpp"
#include "support.hpp"

using namespace gradecraft;
using namespace gradecraft::classical;

namespace {

const LinearParams& linear_params(const FittedRegressor& m) {
  return std::get<LinearParams>(m.params);
}

Matrix column(const std::vector<double>& v) {
  Matrix x(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) x(i, 0) = v[i];
  return x;
}

double norm(const std::vector<double>& w) {
  double s = 0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

// Minimizes a convex function of one variable on [lo, hi].
double ternary_min(const std::function<double(double)>& f, double lo, double hi, double* arg) {
  for (int i = 0; i < 300; ++i) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (f(a) < f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  *arg = (lo + hi) / 2;
  return f(*arg);
}

}  // namespace

TEST_CASE("least squares interpolates an exact line") {
  const auto m = fit_linear(column({0, 1, 0, 1, 1}), std::vector<double>{0, 2, 0, 2, 2});
  CHECK(linear_params(m).weights[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(linear_params(m).bias == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("constant targets give the minimum-norm solution") {
  const auto routes = testing::random_routes(1, 30);
  const Matrix x = encode_matrix(routes);
  const std::vector<double> y(30, 5.0);
  const auto m = fit_linear(x, y);
  for (double w : linear_params(m).weights) CHECK(std::abs(w) < 1e-10);
  CHECK(linear_params(m).bias == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_linear(Matrix(0, 3), std::vector<double>{}), InvalidArgument);
}

TEST_CASE("underdetermined planted system is interpolated") {
  Rng rng(2);
  Matrix x(50, kCells);
  for (double& v : x.data()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
  std::vector<double> w(kCells), y(50, 0.7);
  for (auto& v : w) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < 50; ++i) {
    for (int j = 0; j < kCells; ++j) y[i] += w[j] * x(i, j);
  }
  const auto pred = predict(fit_linear(x, y), x);
  for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(pred[i] - y[i]) < 1e-8);
}

TEST_CASE("ridge closed form on five points") {
  // Centred data: sum(xc*yc) = 9, sum(xc^2) = 10, so w = 9/11, b = 4 - 3w.
  const auto m = fit_ridge(column({1, 2, 3, 4, 5}), std::vector<double>{2, 3, 5, 4, 6}, 1.0);
  CHECK(linear_params(m).weights[0] == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
  CHECK(linear_params(m).bias == doctest::Approx(17.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("ridge reductions") {
  Rng rng(3);
  Matrix x(40, 6);
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  std::vector<double> y(40);
  for (auto& v : y) v = rng.uniform(0, 10);

  const auto ols = fit_linear(x, y);
  const auto r0 = fit_ridge(x, y, 0.0);
  for (std::size_t j = 0; j < 6; ++j) {
    const double expected = linear_params(ols).weights[j];
    CHECK(linear_params(r0).weights[j] == doctest::Approx(expected).epsilon(1e-9));
  }

  const auto big = fit_ridge(x, y, 1e9);
  CHECK(norm(linear_params(big).weights) < 1e-3);
  double mean = 0;
  for (double v : y) mean += v / 40;
  for (double p : predict(big, x)) CHECK(p == doctest::Approx(mean).epsilon(1e-3));

  double previous = norm(linear_params(fit_ridge(x, y, 1e-3)).weights);
  for (const double lambda : {1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    const double current = norm(linear_params(fit_ridge(x, y, lambda)).weights);
    CHECK(current <= previous + 1e-12);
    previous = current;
  }
  CHECK_THROWS_AS(fit_ridge(x, y, -1.0), InvalidArgument);
}

TEST_CASE("ridge recovers planted weights on noiseless data") {
  const auto planted = testing::planted_model(21);
  const auto routes = testing::planted_routes(planted, 22, 1500);
  const auto m = fit_ridge(testing::features_of(routes), testing::targets_of(routes), 1e-9);
  std::vector<bool> active(kCells, false);
  for (const auto& r : routes) {
    for (const auto& h : r.route.holds()) active[h.index()] = true;
  }
  double worst = 0;
  for (int i = 0; i < kCells; ++i) {
    if (!active[i]) continue;
    worst = std::max(worst, std::abs(linear_params(m).weights[i] - planted.weights[i]));
  }
  CHECK(worst < 1e-6);

  const auto grid = export_hold_weights(m);
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kColumns; ++c) {
      if (active[r * kColumns + c]) {
        CHECK(std::abs(grid.grid[r][c] - planted.weights[r * kColumns + c]) < 1e-3);
      }
    }
  }
}

TEST_CASE("linear predictions") {
  const auto routes = testing::random_routes(4, 60);
  std::vector<double> y;
  Rng rng(5);
  for (std::size_t i = 0; i < routes.size(); ++i) y.push_back(rng.uniform(0, 14));
  const auto m = fit_ridge(encode_matrix(routes), y, 1.0);
  const std::vector<double> zero(kCells, 0.0);
  CHECK(predict_one(m, zero) == linear_params(m).bias);

  const Route base(Edition::MB2017, {HoldPosition(2, 3), HoldPosition(5, 9)});
  const HoldPosition h(7, 12);
  std::vector<double> a(kCells), b(kCells);
  encode_dense(base, a);
  encode_dense(base.with_hold(h), b);
  CHECK(predict_one(m, b) - predict_one(m, a) ==
        doctest::Approx(linear_params(m).weights[h.index()]).epsilon(1e-12));
  CHECK_THROWS_AS(predict(m, Matrix(2, 5)), ShapeError);
}

TEST_CASE("hold weight export") {
  FittedRegressor m;
  m.spec.family = Family::RidgeLR;
  m.params = LinearParams{std::vector<double>(kCells, 0.0), 3.0};
  auto grid = export_hold_weights(m);
  for (const auto& row : grid.grid) {
    for (double v : row) CHECK(v == 0.0);
  }
  CHECK(grid.min == 0.0);
  CHECK(grid.max == 0.0);

  std::get<LinearParams>(m.params).weights[0] = 1.5;
  grid = export_hold_weights(m);
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kColumns; ++c) CHECK(grid.grid[r][c] == (r == 0 && c == 0 ? 1.5 : 0.0));
  }
  CHECK(grid.max == 1.5);
  CHECK(grid.mean == doctest::Approx(1.5 / kCells));

  FittedRegressor tree;
  tree.spec.family = Family::DTR;
  tree.params = Tree{};
  CHECK_THROWS_AS(export_hold_weights(tree), UnsupportedExportError);
}

TEST_CASE("linear SVR: a wide tube absorbs everything") {
  const Matrix x = column({0, 1, 2, 3, 4});
  const std::vector<double> y{0.0, 0.1, 0.2, 0.3, 0.4};
  const auto m = fit_linear_svr(x, y, 1.0, 10.0);
  const auto pred = predict(m, x);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(pred[i] - y[i]) <= 10.0);
  CHECK(linear_svr_objective(linear_params(m), x, y, 1.0, 10.0) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("linear SVR with zero tube matches a direct minimizer") {
  const Matrix x = column({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) y.push_back(0.5 * i + 1.0);
  const double c = 1000.0;
  const auto m = fit_linear_svr(x, y, c, 0.0, LinearSvrOptions{100000, 1e-12, 0});

  // Independent oracle: the objective is jointly convex in (w, b), so the
  // partial minimum over b is convex in w; nest two ternary searches.
  auto objective = [&](double w, double b) {
    return linear_svr_objective(LinearParams{{w}, b}, x, y, c, 0.0);
  };
  double w_star = 0, b_star = 0;
  const double best = ternary_min(
      [&](double w) {
        double b;
        return ternary_min([&](double bb) { return objective(w, bb); }, -10, 10, &b);
      },
      -10, 10, &w_star);
  ternary_min([&](double b) { return objective(w_star, b); }, -10, 10, &b_star);

  const double got = linear_svr_objective(linear_params(m), x, y, c, 0.0);
  CHECK(got <= best * (1 + 1e-6) + 1e-9);
  const auto pred = predict(m, x);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(std::abs(pred[i] - (w_star * x(i, 0) + b_star)) < 1e-3);
  }
}

TEST_CASE("linear SVR: duplicating every row equals doubling C") {
  Rng rng(6);
  Matrix x(30, 4), xx(60, 4);
  std::vector<double> y(30), yy(60);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = xx(i, j) = xx(i + 30, j) = rng.uniform(-1, 1);
    y[i] = yy[i] = yy[i + 30] = rng.uniform(-2, 2);
  }
  const LinearSvrOptions opts{100000, 1e-12, 1};
  const auto single = fit_linear_svr(x, y, 1.0, 0.1, opts);
  const auto doubled = fit_linear_svr(xx, yy, 0.5, 0.1, opts);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(linear_params(doubled).weights[j] ==
          doctest::Approx(linear_params(single).weights[j]).epsilon(1e-4));
  }
  CHECK(linear_params(doubled).bias == doctest::Approx(linear_params(single).bias).epsilon(1e-4));
}

TEST_CASE("linear SVR reports non-convergence with the last objective") {
  Rng rng(7);
  Matrix x(200, 10);
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  std::vector<double> y(200);
  for (auto& v : y) v = rng.uniform(-5, 5);
  try {
    fit_linear_svr(x, y, 100.0, 0.0, LinearSvrOptions{1, 1e-15, 0});
    FAIL("converged in one pass");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.last_objective()));
    CHECK(e.last_objective() > 0);
  }
}

TEST_CASE("spec validation and tags") {
  for (const Family f : kAllFamilies) CHECK(parse_family(family_tag(f)) == f);
  RegressorSpec spec;
  spec.family = Family::RidgeLR;
  spec.params.lambda = -1;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.family = Family::LinearSVR;
  spec.params.lambda = 1;
  spec.params.c = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  CHECK(is_linear(Family::LinearSVR));
  CHECK_FALSE(is_linear(Family::RbfSVR));
}
