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

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gradecraft/dataset.hpp"
#include "gradecraft/network.hpp"

namespace gradecraft::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One Adam update at step t >= 1 using each parameter's grad. Moment
/// buffers are created on first use.
void adam_step(std::span<Parameter> params, AdamState& state, std::uint64_t t,
               const AdamConfig& config = {});

/// Per-grade weights N / (K * count(g)), K the number of grades present, so
/// the mean weight over samples is 1. Absent grades get 0. Throws
/// InvalidArgument for empty input or ordinals outside [0, 14].
std::array<double, kGradeCount> class_weights(std::span<const int> grades);

/// ln(ascents) scaled to mean 1. Throws InvalidArgument for ascents < 1 or
/// when every weight is zero.
std::vector<double> sample_weights(std::span<const std::int64_t> ascents);
std::vector<double> sample_weights(std::span<const double> ascents);

/// Zeroes every parameter's grad, accumulates d(loss)/d(param) for the
/// weighted squared error and returns the loss.
double gradients(Network& net, const Tensor& inputs, std::span<const double> targets,
                 std::span<const double> weights, Exec exec = Exec::serial);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
  double val_rmse = 0.0;
};

/// One JSON object per line: {"epoch":..,"train_loss":..,"val_mae":..,"val_rmse":..}.
std::string epoch_record_json(const EpochRecord& record);

struct TrainConfig {
  int max_epochs = 100;
  int patience = 20;
  std::size_t batch_size = 64;
  AdamConfig adam;
  bool use_class_weights = false;
  bool use_sample_weights = false;
  std::uint64_t seed = 0;
  Exec exec = Exec::serial;
  std::function<void(const EpochRecord&)> on_epoch;

  /// Throws InvalidArgument unless 0 <= patience < max_epochs and batch_size >= 1.
  void validate() const;
};

/// Patience counter over a metric where lower is better. Only strict
/// improvements reset the counter.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Returns true when `metric` improves on the best so far.
  bool update(int epoch, double metric);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  int best_epoch() const noexcept { return best_epoch_; }
  double best_metric() const noexcept { return best_; }

 private:
  int patience_;
  int best_epoch_ = -1;
  int since_best_ = 0;
  double best_;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  int stopped_epoch = -1;
  bool restored_best = false;
  // Set when the validation set is the evaluation test set.
  bool validation_is_test = false;
  // Parallel kernels split work only across independent outputs, so runs
  // are reproducible in either mode.
  bool deterministic = true;
};

/// Adam on weighted squared error with early stopping on validation MAE.
/// Leaves the best-epoch parameters in `net`. Throws DivergenceError with
/// the epoch index when the loss stops being finite.
TrainReport train(Network& net, std::span<const LabeledRoute> train_set,
                  std::span<const LabeledRoute> validation, const TrainConfig& config);

/// Trains on split.train and early-stops on split.test, flagging the
/// report accordingly.
TrainReport train(Network& net, const DatasetSplit& split, const TrainConfig& config);

}  // namespace gradecraft::nn
