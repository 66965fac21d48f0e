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

// Shared fixtures for the unit tests and the acceptance runner.

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "gradecraft/board.hpp"
#include "gradecraft/dataset.hpp"
#include "gradecraft/matrix.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft::testing {

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gradecraft-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Route with between lo and hi distinct cells drawn from the whole grid.
inline Route random_route(Rng& rng, Edition edition = Edition::MB2017, int lo = 2, int hi = 10) {
  const int k = static_cast<int>(rng.uniform_int(lo, hi));
  std::vector<HoldPosition> holds;
  while (static_cast<int>(holds.size()) < k) {
    const auto index = static_cast<int>(rng.uniform_int(0, kCells - 1));
    const HoldPosition p = HoldPosition::from_index(index);
    bool seen = false;
    for (const auto& h : holds) seen = seen || h == p;
    if (!seen) holds.push_back(p);
  }
  return Route(edition, holds);
}

inline std::vector<Route> random_routes(std::uint64_t seed, std::size_t n,
                                        Edition edition = Edition::MB2017, int lo = 2,
                                        int hi = 10) {
  Rng rng(seed);
  std::vector<Route> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_route(rng, edition, lo, hi));
  return out;
}

/// Integer planted weights (0 or 1 per cell) so that noiseless targets are
/// exact grade ordinals.
struct PlantedModel {
  std::vector<double> weights;
  double bias = 2.0;
};

inline PlantedModel planted_model(std::uint64_t seed) {
  Rng rng(seed);
  PlantedModel m;
  m.weights.resize(kCells);
  for (auto& w : m.weights) w = rng.uniform() < 0.3 ? 1.0 : 0.0;
  return m;
}

inline double planted_target(const PlantedModel& m, const Route& r) {
  double y = m.bias;
  for (const auto& h : r.holds()) y += m.weights[static_cast<std::size_t>(h.index())];
  return y;
}

inline std::vector<LabeledRoute> planted_routes(const PlantedModel& m, std::uint64_t seed,
                                                std::size_t n, int lo = 2, int hi = 6) {
  std::vector<LabeledRoute> out;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Route r = random_route(rng, Edition::MB2017, lo, hi);
    const int grade = static_cast<int>(planted_target(m, r));
    out.push_back(LabeledRoute{std::move(r), FontGrade(grade),
                               static_cast<std::int64_t>(rng.uniform_int(5, 500)),
                               "planted-" + std::to_string(i)});
  }
  return out;
}

inline std::vector<double> targets_of(const std::vector<LabeledRoute>& routes) {
  std::vector<double> y;
  for (const auto& r : routes) y.push_back(r.grade.ordinal());
  return y;
}

inline Matrix features_of(const std::vector<LabeledRoute>& routes) {
  std::vector<Route> rs;
  for (const auto& r : routes) rs.push_back(r.route);
  return encode_matrix(rs);
}

/// Source tree root, for the checked-in fixtures and atlas.
inline std::filesystem::path source_dir() { return GRADECRAFT_SOURCE_DIR; }

}  // namespace gradecraft::testing
