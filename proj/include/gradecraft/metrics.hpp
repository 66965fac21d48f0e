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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "gradecraft/model.hpp"

namespace gradecraft {

struct PredictionBatch {
  std::vector<double> predicted;
  std::vector<int> actual;  // grade ordinals

  /// Throws InvalidArgument for an empty batch or unequal lengths.
  void validate() const;
  std::size_t size() const noexcept { return predicted.size(); }
};

double mae(const PredictionBatch& batch);
double rmse(const PredictionBatch& batch);

struct Accuracies {
  double exact = 0.0;
  double within1 = 0.0;
};

/// Predictions are rounded half away from zero and clamped to [0, 14].
Accuracies accuracies(const PredictionBatch& batch);

struct ResidualCell {
  double mean_residual = 0.0;  // mean of predicted - actual
  std::size_t count = 0;
  bool operator==(const ResidualCell&) const = default;
};

/// Keyed by true grade ordinal; grades absent from the batch are absent.
std::map<int, ResidualCell> residual_table(const PredictionBatch& batch);

/// Mean of predicted - actual over samples whose true grade is >= `ordinal`.
/// Returns nullopt when no sample qualifies.
std::optional<double> mean_residual_from(const PredictionBatch& batch, int ordinal);

struct MetricsReport {
  std::size_t count = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double exact_acc = 0.0;
  double within1_acc = 0.0;
  std::map<int, ResidualCell> residuals_by_grade;
};

MetricsReport compute_metrics(const PredictionBatch& batch);

/// Predicts every route in `test` and scores against its grade.
PredictionBatch predict_batch(const GradeModel& model, std::span<const LabeledRoute> test,
                              Exec exec = Exec::serial);
MetricsReport evaluate(const GradeModel& model, std::span<const LabeledRoute> test,
                       Exec exec = Exec::serial);

/// {"count", "mae", "rmse", "exact_acc", "within1_acc",
///  "residuals_by_grade": [{"grade", "label", "mean_residual", "count"}]}
nlohmann::ordered_json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::ordered_json& j);

}  // namespace gradecraft
