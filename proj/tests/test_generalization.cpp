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

#include <map>

#include "gradecraft/error.hpp"
#include "gradecraft/generalization.hpp"
#include "support.hpp"

using namespace gradecraft;

namespace {

std::map<Edition, DatasetSplit> synthetic_editions() {
  const auto planted = testing::planted_model(31);
  std::map<Edition, DatasetSplit> out;
  std::uint64_t seed = 500;
  for (const Edition e : kAllEditions) {
    SyntheticSpec spec;
    spec.edition = e;
    std::copy(planted.weights.begin(), planted.weights.end(), spec.planted_weights.begin());
    spec.bias = 1.0;
    spec.noise_sd = 0.3;
    spec.n_routes = 150;
    spec.min_holds = 3;
    spec.max_holds = 8;
    spec.benchmark_fraction = 0.2;
    spec.seed = ++seed;
    spec.restrict_to_layout = true;
    out.emplace(e, split_benchmarks(generate_synthetic(spec)));
  }
  return out;
}

TrainOptions quick_options() {
  TrainOptions opts;
  opts.seed = 9;
  opts.train.max_epochs = 4;
  opts.train.patience = 2;
  opts.train.batch_size = 16;
  for (const auto a : nn::kAllArchitectures) {
    opts.architectures.push_back(nn::ArchitectureSpec::compact(a));
  }
  return opts;
}

}  // namespace

TEST_CASE("a single-edition cell equals a direct evaluation") {
  const auto data = synthetic_editions();
  const auto& split = data.at(Edition::MB2016);
  GeneralizationConfig config;
  config.models = {"ridge", "dnn"};
  config.options = quick_options();
  const std::vector<Edition> train{Edition::MB2016};
  const auto matrix = generalization_run(train, data, config);

  for (const auto& tag : config.models) {
    CAPTURE(tag);
    const GradeModel model = train_model(tag, split.train, split.test, config.options);
    const auto direct = metrics_to_json(evaluate(model, split.test));
    const GeneralizationCell* cell = matrix.find(tag, Edition::MB2016);
    REQUIRE(cell != nullptr);
    REQUIRE(cell->report.has_value());
    CHECK(cell->in_distribution);
    CHECK(metrics_to_json(*cell->report) == direct);
    CHECK(*matrix.in_distribution_mae(tag) == cell->report->mae);
  }
  CHECK(matrix.train_reports.contains("dnn"));
  CHECK_FALSE(matrix.train_reports.contains("ridge"));
  CHECK(matrix.train_reports.at("dnn").validation_is_test);
}

TEST_CASE("two training editions score every architecture on the third") {
  const auto data = synthetic_editions();
  GeneralizationConfig config;
  config.models = {"dnn", "cnn2d", "lstm", "hybrid"};
  config.options = quick_options();
  const std::vector<Edition> train{Edition::MB2019, Edition::MB2017};
  const auto matrix = generalization_run(train, data, config);

  CHECK(matrix.train_editions == std::vector<Edition>{Edition::MB2017, Edition::MB2019});
  CHECK(matrix.cells.size() == 12);
  for (const auto& tag : config.models) {
    CAPTURE(tag);
    const GeneralizationCell* held_out = matrix.find(tag, Edition::MB2016);
    REQUIRE(held_out != nullptr);
    CHECK_FALSE(held_out->in_distribution);
    REQUIRE(held_out->report.has_value());
    CHECK(held_out->report->count == data.at(Edition::MB2016).test.size());
    CHECK(matrix.find(tag, Edition::MB2017)->in_distribution);
    CHECK(matrix.find(tag, Edition::MB2019)->in_distribution);
  }

  // Warnings are exactly the held-out cells that beat the in-distribution mean.
  std::size_t expected = 0;
  for (const auto& tag : config.models) {
    const double in_mae = (matrix.find(tag, Edition::MB2017)->report->mae +
                           matrix.find(tag, Edition::MB2019)->report->mae) /
                          2.0;
    if (matrix.find(tag, Edition::MB2016)->report->mae < in_mae) ++expected;
  }
  CHECK(matrix.warnings.size() == expected);

  const auto j = generalization_to_json(matrix);
  CHECK(j["cells"].size() == 12);
  CHECK(j["cells"][0]["status"] == "ok");
  CHECK(j["train_editions"] == nlohmann::ordered_json::array({"2017", "2019"}));
  CHECK(j["training"].size() == 4);
}

TEST_CASE("failed cells are recorded and the run continues") {
  auto data = synthetic_editions();
  data.erase(Edition::MB2016);
  GeneralizationConfig config;
  config.models = {"ridge", "lstm"};
  config.options = quick_options();
  config.options.train.patience = 10;  // invalid for 4 epochs, so lstm fails to train
  const std::vector<Edition> train{Edition::MB2017};
  const auto matrix = generalization_run(train, data, config);
  REQUIRE(matrix.cells.size() == 6);

  const auto* missing = matrix.find("ridge", Edition::MB2016);
  CHECK_FALSE(missing->report.has_value());
  CHECK(missing->error.find("2016") != std::string::npos);
  CHECK(matrix.find("ridge", Edition::MB2017)->report.has_value());
  CHECK(matrix.find("ridge", Edition::MB2019)->report.has_value());
  for (const Edition e : kAllEditions) {
    const auto* cell = matrix.find("lstm", e);
    REQUIRE(cell != nullptr);
    CHECK_FALSE(cell->report.has_value());
    CHECK(cell->error.find("training failed") != std::string::npos);
  }
  const auto j = generalization_to_json(matrix);
  CHECK(j["cells"][0]["status"] == "failed");
}

TEST_CASE("training editions must be given and loaded") {
  auto data = synthetic_editions();
  GeneralizationConfig config;
  config.models = {"ridge"};
  CHECK_THROWS_AS(generalization_run(std::vector<Edition>{}, data, config), InvalidArgument);
  data.erase(Edition::MB2019);
  CHECK_THROWS_AS(generalization_run(std::vector<Edition>{Edition::MB2019}, data, config),
                  DatasetError);
}
