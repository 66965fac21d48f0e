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

#include "gradecraft/classical.hpp"
#include "gradecraft/error.hpp"

namespace gradecraft::classical {
namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  std::uint32_t left_bin = 0;  // samples with bin <= left_bin go left
  double threshold = 0.0;
  double score = -1.0;
};

// Variance reduction is maximized by maximizing sum_L^2/n_L + sum_R^2/n_R.
// Candidates are scanned by ascending feature, then ascending threshold; a
// later candidate replaces the incumbent only when it is better by more
// than a relative 1e-12, so exact ties resolve to the lowest feature index
// and then the lowest threshold.
bool better(double score, double incumbent) {
  return score > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

class TreeBuilder {
 public:
  TreeBuilder(const kernels::BinnedFeatures& binned, std::span<const double> targets,
              const TreeOptions& options)
      : binned_(binned),
        targets_(targets),
        options_(options),
        sums_(binned.total_bins),
        counts_(binned.total_bins) {}

  Tree build() {
    std::vector<std::uint32_t> samples(binned_.n_samples);
    std::iota(samples.begin(), samples.end(), 0u);
    Tree tree;
    grow(tree, samples, 0);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<std::uint32_t>& samples, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0;
    double lo = targets_[samples.front()];
    double hi = lo;
    for (const std::uint32_t s : samples) {
      sum += targets_[s];
      lo = std::min(lo, targets_[s]);
      hi = std::max(hi, targets_[s]);
    }
    const auto count = static_cast<double>(samples.size());
    tree.nodes[static_cast<std::size_t>(id)].value = sum / count;
    tree.nodes[static_cast<std::size_t>(id)].samples = static_cast<std::uint32_t>(samples.size());

    const bool depth_capped = options_.max_depth > 0 && depth >= options_.max_depth;
    const bool too_small =
        samples.size() < 2 * static_cast<std::size_t>(std::max(options_.min_leaf, 1));
    if (depth_capped || too_small || lo == hi) return id;

    const Split split = find_split(samples, sum);
    if (!split.found) return id;

    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    const std::uint32_t* col = binned_.bins.data() + split.feature * binned_.n_samples;
    for (const std::uint32_t s : samples) {
      (col[s] <= split.left_bin ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split find_split(const std::vector<std::uint32_t>& samples, double total_sum) {
    kernels::histograms(options_.exec, binned_, samples, targets_, sums_, counts_);
    const auto total = static_cast<std::uint32_t>(samples.size());
    const auto min_leaf = static_cast<std::uint32_t>(std::max(options_.min_leaf, 1));
    Split best;
    for (std::size_t f = 0; f < binned_.n_features; ++f) {
      const std::size_t offset = binned_.bin_offset[f];
      const auto& values = binned_.bin_values[f];
      double left_sum = 0.0;
      std::uint32_t left_count = 0;
      std::ptrdiff_t prev_bin = -1;
      for (std::size_t b = 0; b < values.size(); ++b) {
        const std::uint32_t cnt = counts_[offset + b];
        if (cnt == 0) continue;
        if (prev_bin >= 0 && left_count >= min_leaf && total - left_count >= min_leaf) {
          const double right_sum = total_sum - left_sum;
          const double score = left_sum * left_sum / left_count +
                               right_sum * right_sum / (total - left_count);
          if (!best.found || better(score, best.score)) {
            const double lo = values[static_cast<std::size_t>(prev_bin)];
            double threshold = lo + (values[b] - lo) / 2.0;
            if (threshold >= values[b]) threshold = lo;
            best = Split{true, f, static_cast<std::uint32_t>(prev_bin), threshold, score};
          }
        }
        left_sum += sums_[offset + b];
        left_count += cnt;
        prev_bin = static_cast<std::ptrdiff_t>(b);
      }
    }
    return best;
  }

  const kernels::BinnedFeatures& binned_;
  std::span<const double> targets_;
  TreeOptions options_;
  std::vector<double> sums_;
  std::vector<std::uint32_t> counts_;
};

Tree build_tree_binned(const kernels::BinnedFeatures& binned, std::span<const double> y,
                       const TreeOptions& options) {
  return TreeBuilder(binned, y, options).build();
}

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

double Tree::predict(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& node = nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[id].value;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Tree build_tree(const Matrix& x, std::span<const double> y, const TreeOptions& options) {
  if (x.rows() == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (x.rows() != y.size()) throw ShapeError("feature rows and target count differ");
  if (options.min_leaf < 1) throw InvalidArgument("min_leaf must be >= 1");
  if (options.max_depth < 0) throw InvalidArgument("max_depth must be >= 1 or 0 for unlimited");
  const auto binned = kernels::BinnedFeatures::build(x);
  return build_tree_binned(binned, y, options);
}

FittedRegressor fit_tree(const Matrix& x, std::span<const double> y, int max_depth,
                         int min_leaf, Exec exec) {
  FittedRegressor model;
  model.spec.family = Family::DTR;
  model.spec.params.max_depth = max_depth;
  model.spec.params.min_leaf = min_leaf;
  model.n_features = x.cols();
  model.params = build_tree(x, y, TreeOptions{max_depth, min_leaf, exec});
  model.meta.samples = x.rows();
  return model;
}

FittedRegressor fit_gbt(const Matrix& x, std::span<const double> y, int n_estimators,
                        double learning_rate, int max_depth, Exec exec, GbtTrace* trace) {
  if (n_estimators < 0) throw InvalidArgument("n_estimators must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("learning_rate must lie in (0, 1]");
  }
  if (max_depth < 0) throw InvalidArgument("max_depth must be >= 1 or 0 for unlimited");
  if (x.rows() == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (x.rows() != y.size()) throw ShapeError("feature rows and target count differ");

  const std::size_t n = x.rows();
  BoostedParams params;
  params.learning_rate = learning_rate;
  params.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> current(n, params.base);
  std::vector<double> residual(n);
  if (trace) {
    trace->train_mse.clear();
    trace->train_mse.push_back(mse(current, y));
  }

  if (n_estimators > 0) {
    const auto binned = kernels::BinnedFeatures::build(x);
    const TreeOptions options{max_depth, 1, exec};
    for (int t = 0; t < n_estimators; ++t) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];
      Tree tree = build_tree_binned(binned, residual, options);
      for (std::size_t i = 0; i < n; ++i) current[i] += learning_rate * tree.predict(x.row(i));
      params.trees.push_back(std::move(tree));
      if (trace) trace->train_mse.push_back(mse(current, y));
    }
  }
  if (trace) trace->train_predictions = current;

  FittedRegressor model;
  model.spec.family = Family::XGBR;
  model.spec.params.n_estimators = n_estimators;
  model.spec.params.learning_rate = learning_rate;
  model.spec.params.boost_depth = max_depth;
  model.n_features = x.cols();
  model.params = std::move(params);
  model.meta.samples = n;
  return model;
}

}  // namespace gradecraft::classical
