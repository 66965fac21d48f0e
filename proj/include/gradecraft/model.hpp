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

// A single handle over classical regressors and neural networks so that
// evaluation, persistence and serving need not care which one they hold.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gradecraft/classical.hpp"
#include "gradecraft/dataset.hpp"
#include "gradecraft/network.hpp"
#include "gradecraft/training.hpp"

namespace gradecraft {

using kernels::Exec;

class GradeModel {
 public:
  explicit GradeModel(classical::FittedRegressor regressor);
  explicit GradeModel(nn::Network network);

  bool is_neural() const noexcept;
  /// Family tag ("ridge", "xgbr", ...) or architecture tag ("cnn2d", ...).
  std::string tag() const;
  /// True for the linear families, which expose per-hold weights.
  bool has_hold_weights() const noexcept;

  std::vector<double> predict(std::span<const Route> routes, Exec exec = Exec::serial) const;
  double predict(const Route& route) const;

  const classical::FittedRegressor* regressor() const noexcept;
  const nn::Network* network() const noexcept;

  std::vector<Edition> editions;  // training editions
  std::uint64_t seed = 0;

 private:
  std::variant<classical::FittedRegressor, nn::Network> impl_;
};

/// All recognized model tags: the classical families then the architectures.
std::vector<std::string> model_tags();
bool is_model_tag(const std::string& tag);

struct TrainOptions {
  classical::Hyperparams hyper;
  // Replace the default widths of networks whose kind matches; at most one
  // entry per kind.
  std::vector<nn::ArchitectureSpec> architectures;
  nn::TrainConfig train;
  std::uint64_t seed = 0;
  Exec exec = Exec::serial;
};

/// Fits the model named by `tag` on `train_set`. Networks early-stop on
/// `validation`; classical models ignore it. Throws ParseError for unknown
/// tags.
GradeModel train_model(const std::string& tag, std::span<const LabeledRoute> train_set,
                       std::span<const LabeledRoute> validation, const TrainOptions& options,
                       nn::TrainReport* report = nullptr);

}  // namespace gradecraft
