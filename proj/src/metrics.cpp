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

#include "gradecraft/metrics.hpp"

#include <cmath>
#include <cstdlib>

#include "gradecraft/error.hpp"

namespace gradecraft {

void PredictionBatch::validate() const {
  if (predicted.empty()) throw InvalidArgument("prediction batch is empty");
  if (predicted.size() != actual.size()) {
    throw InvalidArgument("prediction batch has " + std::to_string(predicted.size()) +
                          " predictions but " + std::to_string(actual.size()) + " targets");
  }
}

double mae(const PredictionBatch& batch) {
  batch.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    sum += std::abs(batch.predicted[i] - batch.actual[i]);
  }
  return sum / static_cast<double>(batch.size());
}

double rmse(const PredictionBatch& batch) {
  batch.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = batch.predicted[i] - batch.actual[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(batch.size()));
}

Accuracies accuracies(const PredictionBatch& batch) {
  batch.validate();
  std::size_t exact = 0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int diff = std::abs(round_to_ordinal(batch.predicted[i]) - batch.actual[i]);
    exact += diff == 0;
    within += diff <= 1;
  }
  const auto n = static_cast<double>(batch.size());
  return {static_cast<double>(exact) / n, static_cast<double>(within) / n};
}

std::map<int, ResidualCell> residual_table(const PredictionBatch& batch) {
  batch.validate();
  std::map<int, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto& [sum, count] = sums[batch.actual[i]];
    sum += batch.predicted[i] - batch.actual[i];
    ++count;
  }
  std::map<int, ResidualCell> out;
  for (const auto& [grade, acc] : sums) {
    out[grade] = ResidualCell{acc.first / static_cast<double>(acc.second), acc.second};
  }
  return out;
}

std::optional<double> mean_residual_from(const PredictionBatch& batch, int ordinal) {
  batch.validate();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.actual[i] < ordinal) continue;
    sum += batch.predicted[i] - batch.actual[i];
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

MetricsReport compute_metrics(const PredictionBatch& batch) {
  MetricsReport report;
  report.count = batch.size();
  report.mae = mae(batch);
  report.rmse = rmse(batch);
  const Accuracies acc = accuracies(batch);
  report.exact_acc = acc.exact;
  report.within1_acc = acc.within1;
  report.residuals_by_grade = residual_table(batch);
  return report;
}

PredictionBatch predict_batch(const GradeModel& model, std::span<const LabeledRoute> test,
                              Exec exec) {
  std::vector<Route> routes;
  routes.reserve(test.size());
  PredictionBatch batch;
  for (const LabeledRoute& r : test) {
    routes.push_back(r.route);
    batch.actual.push_back(r.grade.ordinal());
  }
  batch.predicted = model.predict(routes, exec);
  return batch;
}

MetricsReport evaluate(const GradeModel& model, std::span<const LabeledRoute> test, Exec exec) {
  return compute_metrics(predict_batch(model, test, exec));
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["count"] = report.count;
  j["mae"] = report.mae;
  j["rmse"] = report.rmse;
  j["exact_acc"] = report.exact_acc;
  j["within1_acc"] = report.within1_acc;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& [grade, cell] : report.residuals_by_grade) {
    nlohmann::ordered_json row;
    row["grade"] = grade;
    row["label"] = grade_to_label(grade);
    row["mean_residual"] = cell.mean_residual;
    row["count"] = cell.count;
    rows.push_back(std::move(row));
  }
  j["residuals_by_grade"] = std::move(rows);
  return j;
}

MetricsReport metrics_from_json(const nlohmann::ordered_json& j) {
  try {
    MetricsReport report;
    report.count = j.at("count").get<std::size_t>();
    report.mae = j.at("mae").get<double>();
    report.rmse = j.at("rmse").get<double>();
    report.exact_acc = j.at("exact_acc").get<double>();
    report.within1_acc = j.at("within1_acc").get<double>();
    for (const auto& row : j.at("residuals_by_grade")) {
      report.residuals_by_grade[row.at("grade").get<int>()] =
          ResidualCell{row.at("mean_residual").get<double>(), row.at("count").get<std::size_t>()};
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed metrics report: ") + e.what(), "");
  }
}

}  // namespace gradecraft
