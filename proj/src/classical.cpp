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

#include "gradecraft/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradecraft/error.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft::classical {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double predict_row(const Parameters& params, std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const LinearParams& p) {
            return std::inner_product(x.begin(), x.end(), p.weights.begin(), p.bias);
          },
          [&](const KernelSvrParams& p) {
            double f = p.bias;
            for (std::size_t i = 0; i < p.coef.size(); ++i) {
              const auto sv = p.support_vectors.row(i);
              double d2 = 0.0;
              for (std::size_t k = 0; k < x.size(); ++k) {
                const double diff = sv[k] - x[k];
                d2 += diff * diff;
              }
              f += p.coef[i] * std::exp(-p.gamma * d2);
            }
            return f;
          },
          [&](const Tree& t) { return t.predict(x); },
          [&](const BoostedParams& p) {
            double f = p.base;
            for (const Tree& t : p.trees) f += p.learning_rate * t.predict(x);
            return f;
          }},
      params);
}

}  // namespace

std::string family_tag(Family family) {
  switch (family) {
    case Family::LR: return "lr";
    case Family::RidgeLR: return "ridge";
    case Family::LinearSVR: return "linear-svr";
    case Family::RbfSVR: return "rbf-svr";
    case Family::DTR: return "dtr";
    case Family::XGBR: return "xgbr";
  }
  return "unknown";
}

Family parse_family(std::string_view tag) {
  for (const Family f : kAllFamilies) {
    if (family_tag(f) == tag) return f;
  }
  throw ParseError("unknown classical model family '" + std::string(tag) + "'",
                   std::string(tag));
}

bool is_linear(Family family) {
  return family == Family::LR || family == Family::RidgeLR || family == Family::LinearSVR;
}

void RegressorSpec::validate() const {
  const Hyperparams& p = params;
  switch (family) {
    case Family::LR:
      break;
    case Family::RidgeLR:
      if (!(p.lambda >= 0.0)) throw InvalidArgument("ridge lambda must be >= 0");
      break;
    case Family::RbfSVR:
      if (!(p.gamma > 0.0)) throw InvalidArgument("RBF gamma must be > 0");
      if (!(p.svr_tolerance > 0.0)) throw InvalidArgument("SVR tolerance must be > 0");
      [[fallthrough]];
    case Family::LinearSVR:
      if (!(p.c > 0.0)) throw InvalidArgument("SVR C must be > 0");
      if (!(p.epsilon >= 0.0)) throw InvalidArgument("SVR epsilon must be >= 0");
      if (p.max_passes < 1) throw InvalidArgument("max_passes must be >= 1");
      break;
    case Family::DTR:
      if (p.max_depth < 0) throw InvalidArgument("max_depth must be >= 1 or 0 for unlimited");
      if (p.min_leaf < 1) throw InvalidArgument("min_leaf must be >= 1");
      break;
    case Family::XGBR:
      if (p.n_estimators < 0) throw InvalidArgument("n_estimators must be >= 0");
      if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0)) {
        throw InvalidArgument("learning_rate must lie in (0, 1]");
      }
      if (p.boost_depth < 1) throw InvalidArgument("boosted tree depth must be >= 1");
      break;
  }
}

RegressorSpec regularized_tree_spec() {
  RegressorSpec spec;
  spec.family = Family::DTR;
  spec.params.max_depth = 8;
  spec.params.min_leaf = 5;
  return spec;
}

FittedRegressor fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                    std::uint64_t seed, Exec exec) {
  spec.validate();
  const Hyperparams& p = spec.params;
  FittedRegressor model;
  switch (spec.family) {
    case Family::LR:
      model = fit_linear(x, y);
      break;
    case Family::RidgeLR:
      model = fit_ridge(x, y, p.lambda);
      break;
    case Family::LinearSVR:
      model = fit_linear_svr(x, y, p.c, p.epsilon,
                             LinearSvrOptions{p.max_passes, 1e-6, seed});
      break;
    case Family::RbfSVR: {
      SmoOptions options;
      options.tolerance = p.svr_tolerance;
      options.exec = exec;
      if (p.subsample && x.rows() > p.subsample_limit) {
        std::vector<std::size_t> order(x.rows());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, 0x5b5));
        for (std::size_t i = 0; i < p.subsample_limit; ++i) {
          const auto last = static_cast<std::int64_t>(x.rows()) - 1;
          const auto j =
              static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), last));
          std::swap(order[i], order[j]);
        }
        order.resize(p.subsample_limit);
        std::sort(order.begin(), order.end());
        Matrix xs(order.size(), x.cols());
        std::vector<double> ys(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
          const auto src = x.row(order[i]);
          std::copy(src.begin(), src.end(), xs.row(i).begin());
          ys[i] = y[order[i]];
        }
        model = fit_rbf_svr(xs, ys, p.c, p.epsilon, p.gamma, options);
      } else {
        model = fit_rbf_svr(x, y, p.c, p.epsilon, p.gamma, options);
      }
      break;
    }
    case Family::DTR:
      model = fit_tree(x, y, p.max_depth, p.min_leaf, exec);
      break;
    case Family::XGBR:
      model = fit_gbt(x, y, p.n_estimators, p.learning_rate, p.boost_depth, exec);
      break;
  }
  model.spec = spec;
  model.meta.seed = seed;
  return model;
}

std::vector<double> predict(const FittedRegressor& model, const Matrix& x, Exec exec) {
  if (x.cols() != model.n_features) {
    throw ShapeError("model expects " + std::to_string(model.n_features) +
                     " features, got " + std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          predict_row(model.params, x.row(static_cast<std::size_t>(i)));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          predict_row(model.params, x.row(static_cast<std::size_t>(i)));
    }
  }
  return out;
}

double predict_one(const FittedRegressor& model, std::span<const double> x) {
  if (x.size() != model.n_features) {
    throw ShapeError("model expects " + std::to_string(model.n_features) +
                     " features, got " + std::to_string(x.size()));
  }
  return predict_row(model.params, x);
}

HoldWeightGrid export_hold_weights(const FittedRegressor& model) {
  const auto* linear = std::get_if<LinearParams>(&model.params);
  if (linear == nullptr || !is_linear(model.spec.family)) {
    throw UnsupportedExportError("hold weights exist only for linear model families, not " +
                                 family_tag(model.spec.family));
  }
  if (linear->weights.size() != static_cast<std::size_t>(kCells)) {
    throw ShapeError("hold weight export needs a 198-feature model");
  }
  HoldWeightGrid out;
  double sum = 0.0;
  out.min = linear->weights.front();
  out.max = linear->weights.front();
  for (int i = 0; i < kCells; ++i) {
    const double w = linear->weights[static_cast<std::size_t>(i)];
    out.grid[static_cast<std::size_t>(i / kColumns)][static_cast<std::size_t>(i % kColumns)] = w;
    sum += w;
    out.min = std::min(out.min, w);
    out.max = std::max(out.max, w);
  }
  out.mean = sum / kCells;
  return out;
}

}  // namespace gradecraft::classical
