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

#include "gradecraft/generalization.hpp"

#include <algorithm>
#include <sstream>

#include "gradecraft/error.hpp"

namespace gradecraft {

const GeneralizationCell* GeneralizationMatrix::find(const std::string& model,
                                                     Edition test) const {
  for (const GeneralizationCell& c : cells) {
    if (c.model == model && c.test_edition == test) return &c;
  }
  return nullptr;
}

std::optional<double> GeneralizationMatrix::in_distribution_mae(const std::string& model) const {
  double sum = 0.0;
  int count = 0;
  for (const GeneralizationCell& c : cells) {
    if (c.model != model || !c.in_distribution || !c.report) continue;
    sum += c.report->mae;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

GeneralizationMatrix generalization_run(std::span<const Edition> train_editions,
                                        const std::map<Edition, DatasetSplit>& datasets,
                                        const GeneralizationConfig& config) {
  if (train_editions.empty()) throw InvalidArgument("at least one training edition is required");
  GeneralizationMatrix matrix;
  matrix.train_editions.assign(train_editions.begin(), train_editions.end());
  std::sort(matrix.train_editions.begin(), matrix.train_editions.end());
  matrix.train_editions.erase(
      std::unique(matrix.train_editions.begin(), matrix.train_editions.end()),
      matrix.train_editions.end());
  matrix.models = config.models;

  std::vector<LabeledRoute> train_set;
  std::vector<LabeledRoute> validation;
  for (const Edition e : matrix.train_editions) {
    const auto it = datasets.find(e);
    if (it == datasets.end()) {
      throw DatasetError("no dataset loaded for training edition " + edition_name(e));
    }
    train_set.insert(train_set.end(), it->second.train.begin(), it->second.train.end());
    validation.insert(validation.end(), it->second.test.begin(), it->second.test.end());
  }

  auto is_train = [&](Edition e) {
    return std::find(matrix.train_editions.begin(), matrix.train_editions.end(), e) !=
           matrix.train_editions.end();
  };
  // Training editions are always scored so held-out cells have a baseline.
  std::vector<Edition> scored = matrix.train_editions;
  scored.insert(scored.end(), config.test_editions.begin(), config.test_editions.end());
  std::sort(scored.begin(), scored.end());
  scored.erase(std::unique(scored.begin(), scored.end()), scored.end());

  for (const std::string& tag : config.models) {
    std::optional<GradeModel> model;
    std::string train_error;
    try {
      nn::TrainReport report;
      model = train_model(tag, train_set, validation, config.options, &report);
      if (model->is_neural()) {
        report.validation_is_test = true;
        matrix.train_reports[tag] = std::move(report);
      }
    } catch (const std::exception& e) {
      train_error = std::string("training failed: ") + e.what();
    }

    for (const Edition test : scored) {
      GeneralizationCell cell;
      cell.model = tag;
      cell.test_edition = test;
      cell.in_distribution = is_train(test);
      const auto it = datasets.find(test);
      if (!model) {
        cell.error = train_error;
      } else if (it == datasets.end()) {
        cell.error = "no dataset loaded for edition " + edition_name(test);
      } else if (it->second.test.empty()) {
        cell.error = "edition " + edition_name(test) + " has no benchmark routes";
      } else {
        try {
          cell.report = evaluate(*model, it->second.test, config.options.exec);
        } catch (const std::exception& e) {
          cell.error = std::string("evaluation failed: ") + e.what();
        }
      }
      matrix.cells.push_back(std::move(cell));
    }

    const auto in_mae = matrix.in_distribution_mae(tag);
    if (!in_mae) continue;
    for (const GeneralizationCell& c : matrix.cells) {
      if (c.model != tag || c.in_distribution || !c.report) continue;
      if (c.report->mae < *in_mae) {
        std::ostringstream msg;
        msg << tag << ": held-out " << edition_name(c.test_edition) << " MAE " << c.report->mae
            << " is below in-distribution MAE " << *in_mae;
        matrix.warnings.push_back(msg.str());
      }
    }
  }
  return matrix;
}

nlohmann::ordered_json generalization_to_json(const GeneralizationMatrix& matrix) {
  nlohmann::ordered_json j;
  auto editions = nlohmann::ordered_json::array();
  for (const Edition e : matrix.train_editions) editions.push_back(edition_name(e));
  j["train_editions"] = std::move(editions);
  j["models"] = matrix.models;
  auto cells = nlohmann::ordered_json::array();
  for (const GeneralizationCell& c : matrix.cells) {
    nlohmann::ordered_json cell;
    cell["model"] = c.model;
    cell["test_edition"] = edition_name(c.test_edition);
    cell["in_distribution"] = c.in_distribution;
    if (c.report) {
      cell["status"] = "ok";
      cell["metrics"] = metrics_to_json(*c.report);
    } else {
      cell["status"] = "failed";
      cell["error"] = c.error;
    }
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  auto training = nlohmann::ordered_json::object();
  for (const auto& [tag, report] : matrix.train_reports) {
    training[tag] = {{"best_epoch", report.best_epoch},
                     {"stopped_epoch", report.stopped_epoch},
                     {"restored_best", report.restored_best},
                     {"validation_is_test", report.validation_is_test}};
  }
  j["training"] = std::move(training);
  j["warnings"] = matrix.warnings;
  return j;
}

}  // namespace gradecraft
