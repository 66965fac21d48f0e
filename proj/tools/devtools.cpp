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

// Regenerates the checked-in synthetic fixtures and placeholder atlas.
//
//   gradecraft-devtools fixtures --out data/fixtures
//   gradecraft-devtools atlas --out data/atlas/placeholder

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "gradecraft/dataset.hpp"
#include "gradecraft/render.hpp"
#include "gradecraft/rng.hpp"

namespace {

void write_fixtures(const std::filesystem::path& dir, int routes, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  for (const auto edition : gradecraft::kAllEditions) {
    gradecraft::SyntheticSpec spec;
    spec.edition = edition;
    spec.n_routes = routes;
    spec.benchmark_fraction = 0.2;
    spec.noise_sd = 0.3;
    spec.bias = 1.0;
    spec.restrict_to_layout = true;
    spec.seed = gradecraft::derive_seed(seed, static_cast<std::uint64_t>(edition));
    // Higher holds are harder, plus a little per-cell jitter.
    gradecraft::Rng rng(spec.seed);
    for (int i = 0; i < gradecraft::kCells; ++i) {
      spec.planted_weights[i] = 0.07 * (i / gradecraft::kColumns) + rng.uniform(-0.1, 0.1);
    }
    const auto records = gradecraft::generate_synthetic(spec);
    const auto path = gradecraft::dataset_file(dir, edition);
    gradecraft::save_dataset(path, edition, records);
    std::cout << path.string() << ": " << records.size() << " routes\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradecraft developer tools"};
  app.require_subcommand(1);
  std::string out;
  int routes = 120;
  std::uint64_t seed = 2016;

  auto* fixtures = app.add_subcommand("fixtures", "Write synthetic moonboard_<year>.json files");
  fixtures->add_option("--out", out, "Output directory")->required();
  fixtures->add_option("--routes", routes, "Routes per edition")->capture_default_str();
  fixtures->add_option("--seed", seed, "Seed")->capture_default_str();

  auto* atlas = app.add_subcommand("atlas", "Write the procedural placeholder atlas");
  atlas->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fixtures) write_fixtures(out, routes, seed);
    if (*atlas) {
      gradecraft::write_placeholder_atlas(out);
      std::cout << "atlas written to " << out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
