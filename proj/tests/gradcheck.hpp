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

// Central-difference gradient check for whole networks.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>
#include <utility>

#include "gradecraft/autodiff.hpp"
#include "gradecraft/network.hpp"
#include "gradecraft/training.hpp"
#include "support.hpp"

namespace gradecraft::testing {

struct GradCheckResult {
  double max_relative = 0.0;
  double max_absolute = 0.0;
  std::size_t parameters = 0;
  // Coordinates checked with a smaller step because +-h crossed a ReLU
  // kink, and those where even the smallest step still crossed one.
  std::size_t refined = 0;
  std::size_t skipped = 0;
};

/// Gradients smaller than this are compared on an absolute scale.
inline constexpr double kGradCheckFloor = 1e-4;

/// Loss of a frozen forward pass plus which ReLU outputs are positive.
inline std::pair<double, std::vector<bool>> loss_and_pattern(const nn::Network& net,
                                                            const nn::Tensor& input,
                                                            std::span<const double> targets,
                                                            std::span<const double> weights) {
  nn::Tape tape;
  const nn::Var y = net.forward_frozen(tape, tape.constant(input));
  std::vector<bool> pattern;
  for (std::size_t id = 0; id < tape.size(); ++id) {
    if (std::string_view(tape.op(id)) != "relu") continue;
    for (const double v : tape.value(id).values()) pattern.push_back(v > 0.0);
  }
  return {nn::weighted_mse_loss(y.value().values(), targets, weights), std::move(pattern)};
}

/// One random compact network, with random biases, and batch per seed.
/// Every parameter is perturbed by +-h. A central difference is only a
/// valid oracle where the loss is smooth, so when either step flips a ReLU
/// the step is shrunk tenfold, down to 1e-7, and the coordinate is skipped
/// if it still crosses.
inline GradCheckResult gradient_check(nn::Architecture arch, std::uint64_t seed,
                                      double h = 1e-4) {
  nn::Network net = nn::Network::build(nn::ArchitectureSpec::compact(arch, seed));
  Rng rng(derive_seed(seed, 77));
  // Zero biases put one-hot inputs exactly on ReLU kinks; move them off.
  for (auto& p : net.parameters()) {
    if (p.name.ends_with(".bias")) {
      for (double& v : p.value.values()) v = rng.uniform(-0.5, 0.5);
    }
  }
  const std::size_t n = 3;
  std::vector<Route> routes;
  for (std::size_t i = 0; i < n; ++i) routes.push_back(random_route(rng, Edition::MB2017, 3, 12));
  const nn::Tensor input = net.make_input(routes);
  std::vector<double> targets(n), weights(n);
  for (auto& t : targets) t = rng.uniform(0, 14);
  for (auto& w : weights) w = rng.uniform(0.5, 2.0);

  nn::gradients(net, input, targets, weights);
  std::vector<double> analytic;
  for (const auto& p : net.parameters()) {
    analytic.insert(analytic.end(), p.grad.values().begin(), p.grad.values().end());
  }
  const auto base_pattern = loss_and_pattern(net, input, targets, weights).second;

  std::vector<double> flat = net.flat_parameters();
  // Loss at flat with coordinate i moved by delta; reports a kink crossing.
  auto probe = [&](std::size_t i, double delta, bool* crossed) {
    const double saved = flat[i];
    flat[i] = saved + delta;
    net.set_flat_parameters(flat);
    flat[i] = saved;
    auto [loss, pattern] = loss_and_pattern(net, input, targets, weights);
    if (pattern != base_pattern) *crossed = true;
    return loss;
  };

  GradCheckResult out;
  out.parameters = flat.size();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    double step = h;
    double numeric = 0.0;
    bool crossed = true;
    while (crossed && step >= 1e-7 * 0.999) {
      crossed = false;
      const double up = probe(i, step, &crossed);
      const double down = probe(i, -step, &crossed);
      numeric = (up - down) / (2 * step);
      if (crossed) step /= 10;
    }
    if (crossed) {
      ++out.skipped;
      continue;
    }
    if (step < h) ++out.refined;
    const double diff = std::abs(numeric - analytic[i]);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), kGradCheckFloor});
    out.max_absolute = std::max(out.max_absolute, diff);
    out.max_relative = std::max(out.max_relative, diff / scale);
  }
  net.set_flat_parameters(flat);
  return out;
}

}  // namespace gradecraft::testing
