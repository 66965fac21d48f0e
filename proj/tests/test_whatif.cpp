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

#include <algorithm>

#include "gradecraft/whatif.hpp"
#include "support.hpp"

using namespace gradecraft;

namespace {

TrainOptions quick() {
  TrainOptions opts;
  opts.seed = 4;
  opts.train.max_epochs = 3;
  opts.train.patience = 1;
  opts.train.batch_size = 32;
  opts.architectures.push_back(nn::ArchitectureSpec::compact(nn::Architecture::CNN2D));
  return opts;
}

}  // namespace

TEST_CASE("cnn deltas match one prediction per changed route") {
  const auto data = testing::planted_routes(testing::planted_model(2), 20, 100);
  const GradeModel model = train_model("cnn2d", data, data, quick());
  const Route route = testing::random_routes(5, 1, Edition::MB2017, 6, 6).front();
  const WhatIfResult r = whatif(route, model);

  // 192 additions plus 6 removals, so 199 predictions with the base.
  REQUIRE(r.deltas.size() == static_cast<std::size_t>(kCells));
  CHECK(r.base == model.predict(route));
  for (const WhatIfDelta& d : r.deltas) {
    CAPTURE(d.position.to_string());
    std::vector<HoldPosition> holds = route.holds();
    const auto it = std::find(holds.begin(), holds.end(), d.position);
    CHECK(d.removal == (it != holds.end()));
    if (d.removal) {
      holds.erase(it);
    } else {
      holds.push_back(d.position);
    }
    const double expected = model.predict(Route(route.edition(), holds)) - r.base;
    CHECK(d.delta == doctest::Approx(expected).epsilon(1e-12).scale(1e-12));
  }
  CHECK(std::is_sorted(r.deltas.begin(), r.deltas.end(), [](const auto& a, const auto& b) {
    return a.position.index() < b.position.index();
  }));
  CHECK(whatif(route, model, Exec::parallel).deltas.size() == r.deltas.size());
}

TEST_CASE("linear additions equal the hold weights") {
  const auto data = testing::planted_routes(testing::planted_model(3), 30, 400);
  const GradeModel model = train_model("ridge", data, data, TrainOptions{});
  const auto& weights = std::get<classical::LinearParams>(model.regressor()->params).weights;
  const Route route = testing::random_routes(8, 1, Edition::MB2017, 4, 4).front();
  const WhatIfResult r = whatif(route, model);
  for (const WhatIfDelta& d : r.deltas) {
    const double w = weights[static_cast<std::size_t>(d.position.index())];
    CHECK(d.delta == doctest::Approx(d.removal ? -w : w).epsilon(1e-10).scale(1e-10));
  }
}

TEST_CASE("a single-hold route has no removal") {
  const auto data = testing::planted_routes(testing::planted_model(3), 30, 100);
  const GradeModel model = train_model("dtr", data, data, TrainOptions{});
  const Route route(Edition::MB2017, {parse_position("F9")});
  const WhatIfResult r = whatif(route, model);
  CHECK(r.deltas.size() == static_cast<std::size_t>(kCells - 1));
  for (const WhatIfDelta& d : r.deltas) {
    CHECK_FALSE(d.removal);
    CHECK(d.position != route.holds()[0]);
  }
}
