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

#include "gradecraft/whatif.hpp"

namespace gradecraft {

WhatIfResult whatif(const Route& route, const GradeModel& model, Exec exec) {
  std::vector<Route> variants{route};
  std::vector<WhatIfDelta> deltas;
  for (int i = 0; i < kCells; ++i) {
    const HoldPosition pos = HoldPosition::from_index(i);
    if (!route.contains(pos)) {
      variants.push_back(route.with_hold(pos));
      deltas.push_back({pos, false, 0.0});
    } else if (route.size() > 1) {
      variants.push_back(route.without_hold(pos));
      deltas.push_back({pos, true, 0.0});
    }
  }
  // One batch; every model scores samples independently of the batch.
  const std::vector<double> pred = model.predict(variants, exec);
  WhatIfResult out;
  out.base = pred[0];
  for (std::size_t k = 0; k < deltas.size(); ++k) deltas[k].delta = pred[k + 1] - out.base;
  out.deltas = std::move(deltas);
  return out;
}

}  // namespace gradecraft
