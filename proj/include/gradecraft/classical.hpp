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

// Classical regressors behind one fit/predict contract: ordinary least
// squares, ridge, linear and RBF-kernel support vector regression, CART
// regression trees and gradient-boosted trees.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gradecraft/board.hpp"
#include "gradecraft/kernels.hpp"
#include "gradecraft/matrix.hpp"

namespace gradecraft::classical {

using kernels::Exec;

enum class Family { LR, RidgeLR, LinearSVR, RbfSVR, DTR, XGBR };

inline constexpr std::array<Family, 6> kAllFamilies = {
    Family::LR, Family::RidgeLR, Family::LinearSVR, Family::RbfSVR, Family::DTR, Family::XGBR};

/// CLI tags: lr, ridge, linear-svr, rbf-svr, dtr, xgbr.
std::string family_tag(Family family);
Family parse_family(std::string_view tag);
bool is_linear(Family family);

struct Hyperparams {
  double lambda = 1.0;           // ridge
  double c = 1.0;                // SVR box constraint
  double epsilon = 0.1;          // SVR tube half-width
  double gamma = 1.0 / kCells;   // RBF width
  int max_depth = 0;             // DTR, 0 = unlimited
  int min_leaf = 1;              // DTR
  int n_estimators = 300;        // XGBR
  double learning_rate = 0.1;    // XGBR
  int boost_depth = 4;           // XGBR tree depth
  bool subsample = true;         // RBF SVR: subsample large training sets
  std::size_t subsample_limit = 8000;
  int max_passes = 1000;         // linear SVR coordinate-descent passes
  double svr_tolerance = 1e-3;   // RBF SVR KKT tolerance
};

struct RegressorSpec {
  Family family = Family::RidgeLR;
  Hyperparams params;

  /// Throws InvalidArgument on out-of-range hyperparameters for the family.
  void validate() const;
};

/// Hyperparameters of the regularized tree variant: depth 8, min_leaf 5.
RegressorSpec regularized_tree_spec();

struct LinearParams {
  std::vector<double> weights;
  double bias = 0.0;
};

struct KernelSvrParams {
  Matrix support_vectors;
  std::vector<double> coef;  // alpha_i - alpha_i^*
  double bias = 0.0;
  double gamma = 1.0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::uint32_t samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree; x[feature] <= threshold goes left.
struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root, preorder

  double predict(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;
};

struct BoostedParams {
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
};

using Parameters = std::variant<LinearParams, KernelSvrParams, Tree, BoostedParams>;

struct TrainingMeta {
  std::vector<Edition> editions;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct FittedRegressor {
  RegressorSpec spec;
  std::size_t n_features = kCells;
  Parameters params;
  TrainingMeta meta;
};

FittedRegressor fit_linear(const Matrix& x, std::span<const double> y);
FittedRegressor fit_ridge(const Matrix& x, std::span<const double> y, double lambda);

struct LinearSvrOptions {
  int max_passes = 1000;
  double tolerance = 1e-6;  // relative objective change over one pass
  std::uint64_t seed = 0;
};

/// Dual coordinate descent on the L1-loss epsilon-SVR. The intercept is
/// carried as an augmented constant feature.
FittedRegressor fit_linear_svr(const Matrix& x, std::span<const double> y, double c,
                               double epsilon, const LinearSvrOptions& options = {});

/// 0.5 * (||w||^2 + b^2) + C * sum_i max(0, |w.x_i + b - y_i| - epsilon).
double linear_svr_objective(const LinearParams& params, const Matrix& x,
                            std::span<const double> y, double c, double epsilon);

/// exp(-gamma * ||x - z||^2).
double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma);

struct SmoOptions {
  double tolerance = 1e-3;
  long max_iterations = 0;  // 0 = max(10^7, 100 * 2n)
  std::size_t cache_megabytes = 256;
  Exec exec = Exec::serial;
};

struct SmoReport {
  long iterations = 0;
  double dual_objective = 0.0;
  std::size_t support_vectors = 0;
};

/// SMO with second-order working-set selection on the epsilon-SVR dual.
FittedRegressor fit_rbf_svr(const Matrix& x, std::span<const double> y, double c, double epsilon,
                            double gamma, const SmoOptions& options = {},
                            SmoReport* report = nullptr);

struct TreeOptions {
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  Exec exec = Exec::serial;
};

FittedRegressor fit_tree(const Matrix& x, std::span<const double> y, int max_depth,
                         int min_leaf, Exec exec = Exec::serial);
Tree build_tree(const Matrix& x, std::span<const double> y, const TreeOptions& options);

struct GbtTrace {
  std::vector<double> train_mse;  // index 0 is the constant model
  std::vector<double> train_predictions;
};

FittedRegressor fit_gbt(const Matrix& x, std::span<const double> y, int n_estimators,
                        double learning_rate, int max_depth, Exec exec = Exec::serial,
                        GbtTrace* trace = nullptr);

/// Fits any family from its spec. RBF SVR training sets larger than
/// subsample_limit are uniformly subsampled with `seed` unless disabled.
FittedRegressor fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                    std::uint64_t seed = 0, Exec exec = Exec::serial);

/// Real-valued grade estimates, one per row. Throws ShapeError when the
/// column count differs from the fitted feature dimension.
std::vector<double> predict(const FittedRegressor& model, const Matrix& x,
                            Exec exec = Exec::serial);
double predict_one(const FittedRegressor& model, std::span<const double> x);

struct HoldWeightGrid {
  std::array<std::array<double, kColumns>, kRows> grid{};  // grid[row][col]
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

/// Per-hold weights of a linear family. Throws UnsupportedExportError for
/// other families.
HoldWeightGrid export_hold_weights(const FittedRegressor& model);

}  // namespace gradecraft::classical
