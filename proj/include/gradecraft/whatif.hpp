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

#include <vector>

#include "gradecraft/model.hpp"

namespace gradecraft {

struct WhatIfDelta {
  HoldPosition position;
  bool removal = false;  // the position is in the route
  double delta = 0.0;    // predict(changed route) - predict(route)
};

struct WhatIfResult {
  double base = 0.0;
  std::vector<WhatIfDelta> deltas;  // ascending position index
};

/// Grade change from adding each free cell of the 198 and from removing
/// each route hold. Removals that would empty the route are left out.
WhatIfResult whatif(const Route& route, const GradeModel& model, Exec exec = Exec::serial);

}  // namespace gradecraft
