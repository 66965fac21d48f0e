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

#include "gradecraft/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "gradecraft/error.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft::nn {
namespace {

struct Encoded {
  std::vector<double> features;  // n rows of 198
  std::vector<double> targets;
  std::vector<double> weights;
};

Encoded encode(std::span<const LabeledRoute> routes) {
  Encoded out;
  out.features.assign(routes.size() * kCells, 0.0);
  out.targets.reserve(routes.size());
  for (std::size_t i = 0; i < routes.size(); ++i) {
    encode_dense(routes[i].route,
                 std::span<double>(out.features).subspan(i * kCells, kCells));
    out.targets.push_back(routes[i].grade.ordinal());
  }
  out.weights.assign(routes.size(), 1.0);
  return out;
}

}  // namespace

void adam_step(std::span<Parameter> params, AdamState& state, std::uint64_t t,
               const AdamConfig& config) {
  if (t < 1) throw InvalidArgument("Adam step index must be >= 1");
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const Parameter& p : params) {
      state.m.emplace_back(p.value.shape());
      state.v.emplace_back(p.value.shape());
    }
  }
  const double td = static_cast<double>(t);
  const double c1 = 1.0 - std::pow(config.beta1, td);
  const double c2 = 1.0 - std::pow(config.beta2, td);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    if (p.grad.shape() != p.value.shape()) continue;
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p.value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

std::array<double, kGradeCount> class_weights(std::span<const int> grades) {
  if (grades.empty()) throw InvalidArgument("class weights need at least one target");
  std::array<std::size_t, kGradeCount> counts{};
  for (const int g : grades) {
    if (g < 0 || g >= kGradeCount) {
      throw InvalidArgument("grade ordinal " + std::to_string(g) + " outside [0, 14]");
    }
    ++counts[static_cast<std::size_t>(g)];
  }
  const auto present = static_cast<double>(
      std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
  const auto total = static_cast<double>(grades.size());
  std::array<double, kGradeCount> out{};
  for (std::size_t g = 0; g < counts.size(); ++g) {
    if (counts[g] > 0) out[g] = total / (present * static_cast<double>(counts[g]));
  }
  return out;
}

std::vector<double> sample_weights(std::span<const double> ascents) {
  std::vector<double> out;
  out.reserve(ascents.size());
  double sum = 0.0;
  for (const double a : ascents) {
    if (!(a >= 1.0)) throw InvalidArgument("ascent counts must be >= 1, got " + std::to_string(a));
    out.push_back(std::log(a));
    sum += out.back();
  }
  if (!(sum > 0.0)) throw InvalidArgument("log-ascent weights are all zero");
  const double mean = sum / static_cast<double>(out.size());
  for (double& w : out) w /= mean;
  return out;
}

std::vector<double> sample_weights(std::span<const std::int64_t> ascents) {
  std::vector<double> real(ascents.begin(), ascents.end());
  return sample_weights(std::span<const double>(real));
}

double gradients(Network& net, const Tensor& inputs, std::span<const double> targets,
                 std::span<const double> weights, Exec exec) {
  for (Parameter& p : net.parameters()) p.zero_grad();
  Tape tape(exec);
  const Var out = net.forward(tape, tape.constant(inputs));
  const Var loss = weighted_mse(out, targets, weights);
  tape.backward(loss);
  return loss.value()[0];
}

std::string epoch_record_json(const EpochRecord& record) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["train_loss"] = record.train_loss;
  j["val_mae"] = record.val_mae;
  j["val_rmse"] = record.val_rmse;
  return j.dump();
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
  if (patience < 0 || patience >= max_epochs) {
    throw InvalidArgument("patience must lie in [0, max_epochs)");
  }
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
}

EarlyStopping::EarlyStopping(int patience)
    : patience_(patience), best_(std::numeric_limits<double>::infinity()) {
  if (patience < 0) throw InvalidArgument("patience must be >= 0");
}

bool EarlyStopping::update(int epoch, double metric) {
  if (metric < best_) {
    best_ = metric;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

TrainReport train(Network& net, std::span<const LabeledRoute> train_set,
                  std::span<const LabeledRoute> validation, const TrainConfig& config) {
  config.validate();
  if (train_set.empty() || validation.empty()) {
    throw InvalidArgument("training and validation sets must be non-empty");
  }
  Encoded tr = encode(train_set);
  const Encoded va = encode(validation);

  if (config.use_class_weights) {
    std::vector<int> grades;
    for (const LabeledRoute& r : train_set) grades.push_back(r.grade.ordinal());
    const auto cw = class_weights(grades);
    for (std::size_t i = 0; i < grades.size(); ++i) {
      tr.weights[i] *= cw[static_cast<std::size_t>(grades[i])];
    }
  }
  if (config.use_sample_weights) {
    std::vector<std::int64_t> ascents;
    for (const LabeledRoute& r : train_set) ascents.push_back(r.ascents);
    const auto sw = sample_weights(ascents);
    for (std::size_t i = 0; i < sw.size(); ++i) tr.weights[i] *= sw[i];
  }

  const Tensor val_inputs = net.make_input(va.features, validation.size());
  const std::size_t n = train_set.size();
  const std::size_t batch = config.batch_size;

  TrainReport report;
  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best = [&] {
    std::vector<Tensor> v;
    for (const Parameter& p : net.parameters()) v.push_back(p.value);
    return v;
  }();
  AdamState adam;
  std::uint64_t step = 0;
  std::vector<std::size_t> order(n);
  std::vector<double> xb;
  std::vector<double> yb;
  std::vector<double> wb;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double loss_sum = 0.0;
    double loss_count = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      xb.resize(count * kCells);
      yb.resize(count);
      wb.resize(count);
      double wsum = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(tr.features.begin() + static_cast<std::ptrdiff_t>(src * kCells), kCells,
                    xb.begin() + static_cast<std::ptrdiff_t>(i * kCells));
        yb[i] = tr.targets[src];
        wb[i] = tr.weights[src];
        wsum += wb[i];
      }
      if (!(wsum > 0.0)) continue;
      double loss = 0.0;
      try {
        loss = gradients(net, net.make_input(xb, count), yb, wb, config.exec);
      } catch (const NonFiniteError& e) {
        throw DivergenceError(std::string("training diverged: ") + e.what(), epoch);
      }
      if (!std::isfinite(loss)) throw DivergenceError("training loss is not finite", epoch);
      adam_step(net.parameters(), adam, ++step, config.adam);
      loss_sum += loss * static_cast<double>(count);
      loss_count += static_cast<double>(count);
    }

    std::vector<double> pred;
    try {
      pred = net.predict(val_inputs, config.exec);
    } catch (const NonFiniteError& e) {
      throw DivergenceError(std::string("validation diverged: ") + e.what(), epoch);
    }
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double r = pred[i] - va.targets[i];
      abs_sum += std::abs(r);
      sq_sum += r * r;
    }
    const auto nv = static_cast<double>(pred.size());
    EpochRecord record{epoch, loss_count > 0.0 ? loss_sum / loss_count : 0.0, abs_sum / nv,
                       std::sqrt(sq_sum / nv)};
    report.epochs.push_back(record);
    if (config.on_epoch) config.on_epoch(record);

    if (stopper.update(epoch, record.val_mae)) {
      for (std::size_t k = 0; k < best.size(); ++k) best[k] = net.parameters()[k].value;
    }
    report.stopped_epoch = epoch;
    if (stopper.should_stop()) break;
  }

  for (std::size_t k = 0; k < best.size(); ++k) net.parameters()[k].value = best[k];
  report.best_epoch = stopper.best_epoch();
  report.restored_best = true;
  return report;
}

TrainReport train(Network& net, const DatasetSplit& split, const TrainConfig& config) {
  TrainReport report = train(net, split.train, split.test, config);
  report.validation_is_test = true;
  return report;
}

}  // namespace gradecraft::nn
