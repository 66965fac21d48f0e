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

#include "gradecraft/model.hpp"

#include <algorithm>
#include <set>

#include "gradecraft/error.hpp"
#include "gradecraft/matrix.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft {

GradeModel::GradeModel(classical::FittedRegressor regressor) : impl_(std::move(regressor)) {
  seed = std::get<classical::FittedRegressor>(impl_).meta.seed;
  editions = std::get<classical::FittedRegressor>(impl_).meta.editions;
}

GradeModel::GradeModel(nn::Network network) : impl_(std::move(network)) {
  seed = std::get<nn::Network>(impl_).spec().seed;
}

bool GradeModel::is_neural() const noexcept {
  return std::holds_alternative<nn::Network>(impl_);
}

std::string GradeModel::tag() const {
  if (const auto* net = network()) return nn::architecture_tag(net->spec().kind);
  return classical::family_tag(regressor()->spec.family);
}

bool GradeModel::has_hold_weights() const noexcept {
  const auto* r = regressor();
  return r != nullptr && classical::is_linear(r->spec.family);
}

std::vector<double> GradeModel::predict(std::span<const Route> routes, Exec exec) const {
  if (const auto* net = network()) return net->predict(routes, exec);
  return classical::predict(*regressor(), encode_matrix(routes), exec);
}

double GradeModel::predict(const Route& route) const {
  return predict(std::span<const Route>(&route, 1)).front();
}

const classical::FittedRegressor* GradeModel::regressor() const noexcept {
  return std::get_if<classical::FittedRegressor>(&impl_);
}

const nn::Network* GradeModel::network() const noexcept {
  return std::get_if<nn::Network>(&impl_);
}

std::vector<std::string> model_tags() {
  std::vector<std::string> out;
  for (const auto f : classical::kAllFamilies) out.push_back(classical::family_tag(f));
  for (const auto a : nn::kAllArchitectures) out.push_back(nn::architecture_tag(a));
  return out;
}

bool is_model_tag(const std::string& tag) {
  const auto tags = model_tags();
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

GradeModel train_model(const std::string& tag, std::span<const LabeledRoute> train_set,
                       std::span<const LabeledRoute> validation, const TrainOptions& options,
                       nn::TrainReport* report) {
  if (!is_model_tag(tag)) {
    throw ParseError("unknown model '" + tag + "'", tag);
  }
  if (train_set.empty()) throw InvalidArgument("training set is empty");

  std::set<Edition> seen;
  std::vector<Edition> editions;
  for (const LabeledRoute& r : train_set) {
    if (seen.insert(r.route.edition()).second) editions.push_back(r.route.edition());
  }
  std::sort(editions.begin(), editions.end());

  for (const auto f : classical::kAllFamilies) {
    if (classical::family_tag(f) != tag) continue;
    std::vector<Route> routes;
    std::vector<double> y;
    for (const LabeledRoute& r : train_set) {
      routes.push_back(r.route);
      y.push_back(r.grade.ordinal());
    }
    classical::RegressorSpec spec{f, options.hyper};
    classical::FittedRegressor fitted =
        classical::fit(spec, encode_matrix(routes), y, options.seed, options.exec);
    fitted.meta.editions = editions;
    fitted.meta.samples = train_set.size();
    return GradeModel(std::move(fitted));
  }

  const nn::Architecture arch = nn::parse_architecture(tag);
  nn::ArchitectureSpec spec = nn::ArchitectureSpec::defaults(arch);
  for (const nn::ArchitectureSpec& s : options.architectures) {
    if (s.kind == arch) spec = s;
  }
  spec.seed = options.seed;
  nn::Network net = nn::Network::build(spec);
  nn::TrainConfig config = options.train;
  config.seed = derive_seed(options.seed, 0x7a11);
  config.exec = options.exec;
  nn::TrainReport rep = nn::train(net, train_set, validation, config);
  if (report != nullptr) *report = std::move(rep);
  GradeModel model(std::move(net));
  model.editions = editions;
  return model;
}

}  // namespace gradecraft
