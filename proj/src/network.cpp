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

#include "gradecraft/network.hpp"

#include <algorithm>
#include <cmath>

#include "gradecraft/error.hpp"
#include "gradecraft/rng.hpp"

namespace gradecraft::nn {
namespace {

constexpr std::size_t kGridH = kRows;
constexpr std::size_t kGridW = kColumns;
constexpr std::size_t kFlat = kCells;
constexpr std::size_t kPredictChunk = 256;

Parameter make_param(std::string name, Shape shape, std::size_t fan_in, Rng* rng) {
  Parameter p{std::move(name), Tensor(std::move(shape)), {}};
  if (rng != nullptr) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = rng->uniform(-limit, limit);
  }
  p.zero_grad();
  return p;
}

void add_dense(std::vector<Parameter>& out, const std::string& name, std::size_t in,
               std::size_t width, Rng& rng) {
  out.push_back(make_param(name + ".weight", {width, in}, in, &rng));
  out.push_back(make_param(name + ".bias", {width}, in, nullptr));
}

void add_conv(std::vector<Parameter>& out, const std::string& name, std::size_t in,
              std::size_t channels, Rng& rng) {
  out.push_back(make_param(name + ".weight", {channels, in, 3, 3}, in * 9, &rng));
  out.push_back(make_param(name + ".bias", {channels}, in * 9, nullptr));
}

// Shared layer walk for trainable and frozen passes. `param(i)` yields the
// tape handle for parameter i in declaration order.
template <typename ParamFn>
Var run_layers(const ArchitectureSpec& spec, Tape& tape, Var x, ParamFn param) {
  std::size_t next = 0;
  auto dense = [&](Var in, bool activate) {
    const Var w = param(next++);
    const Var b = param(next++);
    const Var y = linear(in, w, b);
    return activate ? relu(y) : y;
  };
  auto conv_stack = [&](Var in) {
    for (std::size_t l = 0; l < spec.conv_channels.size(); ++l) {
      const Var w = param(next++);
      const Var b = param(next++);
      in = relu(conv2d_same(in, w, b));
    }
    const std::size_t n = in.value().dim(0);
    return reshape(in, {n, spec.conv_channels.back() * kFlat});
  };

  switch (spec.kind) {
    case Architecture::DNN: {
      for (std::size_t l = 0; l < spec.dense_widths.size(); ++l) x = dense(x, true);
      return dense(x, false);
    }
    case Architecture::CNN2D:
      return dense(conv_stack(x), false);
    case Architecture::Hybrid: {
      for (std::size_t l = 0; l < spec.dense_widths.size(); ++l) x = dense(x, true);
      const std::size_t n = x.value().dim(0);
      x = reshape(x, {n, spec.dense_widths.back() / kFlat, kGridH, kGridW});
      return dense(conv_stack(x), false);
    }
    case Architecture::LSTM: {
      const std::size_t n = x.value().dim(0);
      const std::size_t h = spec.lstm_hidden;
      const Var wx = param(next++);
      const Var wh = param(next++);
      const Var b = param(next++);
      Var hidden = tape.constant(Tensor({n, h}));
      Var cell = tape.constant(Tensor({n, h}));
      for (std::size_t t = 0; t < kGridH; ++t) {
        const Var z = add(linear(timestep(x, t), wx, b), matmul_nt(hidden, wh));
        const Var i = sigmoid(slice_cols(z, 0, h));
        const Var f = sigmoid(slice_cols(z, h, h));
        const Var g = tanh(slice_cols(z, 2 * h, h));
        const Var o = sigmoid(slice_cols(z, 3 * h, h));
        cell = add(mul(f, cell), mul(i, g));
        hidden = mul(o, tanh(cell));
      }
      return dense(hidden, false);
    }
  }
  throw InvalidArgument("unknown architecture");
}

void check_input(const Network& net, const Tensor& input) {
  if (input.rank() == 0) throw ShapeError("network input must not be a scalar");
  const Shape expected = net.input_shape(input.dim(0));
  if (input.shape() != expected) {
    throw ShapeError(architecture_tag(net.spec().kind) + " expects input " +
                     shape_string(expected) + ", got " + shape_string(input.shape()));
  }
}

}  // namespace

std::string architecture_tag(Architecture arch) {
  switch (arch) {
    case Architecture::DNN: return "dnn";
    case Architecture::CNN2D: return "cnn2d";
    case Architecture::LSTM: return "lstm";
    case Architecture::Hybrid: return "hybrid";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view tag) {
  for (const Architecture a : kAllArchitectures) {
    if (architecture_tag(a) == tag) return a;
  }
  throw ParseError("unknown architecture '" + std::string(tag) + "'", std::string(tag));
}

ArchitectureSpec ArchitectureSpec::defaults(Architecture kind, std::uint64_t seed) {
  ArchitectureSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  switch (kind) {
    case Architecture::DNN:
      spec.dense_widths = {256, 128, 64};
      break;
    case Architecture::CNN2D:
      spec.conv_channels = {32, 64, 128, 16};
      break;
    case Architecture::LSTM:
      spec.lstm_hidden = 128;
      break;
    case Architecture::Hybrid:
      spec.dense_widths = {512, 256, 256, 128, 128, kFlat};
      spec.conv_channels = {32, 64, 128, 16};
      break;
  }
  return spec;
}

ArchitectureSpec ArchitectureSpec::compact(Architecture kind, std::uint64_t seed) {
  ArchitectureSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  switch (kind) {
    case Architecture::DNN:
      spec.dense_widths = {8, 6, 4};
      break;
    case Architecture::CNN2D:
      spec.conv_channels = {3, 4, 3, 2};
      break;
    case Architecture::LSTM:
      spec.lstm_hidden = 5;
      break;
    case Architecture::Hybrid:
      spec.dense_widths = {12, 10, 8, 8, 6, kFlat};
      spec.conv_channels = {2, 3, 3, 2};
      break;
  }
  return spec;
}

void ArchitectureSpec::validate() const {
  const bool zero_width = std::any_of(dense_widths.begin(), dense_widths.end(),
                                      [](std::size_t w) { return w == 0; }) ||
                          std::any_of(conv_channels.begin(), conv_channels.end(),
                                      [](std::size_t c) { return c == 0; });
  if (zero_width) throw InvalidArgument("layer widths must be >= 1");
  switch (kind) {
    case Architecture::DNN:
      if (dense_widths.size() != 3 || !conv_channels.empty() || lstm_hidden != 0) {
        throw InvalidArgument("dnn needs exactly 3 hidden dense widths");
      }
      break;
    case Architecture::CNN2D:
      if (conv_channels.size() != 4 || !dense_widths.empty() || lstm_hidden != 0) {
        throw InvalidArgument("cnn2d needs exactly 4 convolution widths");
      }
      break;
    case Architecture::LSTM:
      if (lstm_hidden == 0 || !dense_widths.empty() || !conv_channels.empty()) {
        throw InvalidArgument("lstm needs a hidden size and no other layers");
      }
      break;
    case Architecture::Hybrid:
      if (dense_widths.size() != 6 || conv_channels.size() != 4 || lstm_hidden != 0) {
        throw InvalidArgument("hybrid needs 6 dense widths and 4 convolution widths");
      }
      if (dense_widths.back() % kFlat != 0) {
        throw InvalidArgument("hybrid's last dense width must be a multiple of 198");
      }
      break;
  }
}

Network Network::build(const ArchitectureSpec& spec) {
  spec.validate();
  Network net;
  net.spec_ = spec;
  Rng rng(derive_seed(spec.seed, 0x1417));
  auto& p = net.params_;
  switch (spec.kind) {
    case Architecture::DNN: {
      std::size_t in = kFlat;
      for (std::size_t l = 0; l < spec.dense_widths.size(); ++l) {
        add_dense(p, "dense" + std::to_string(l), in, spec.dense_widths[l], rng);
        in = spec.dense_widths[l];
      }
      add_dense(p, "output", in, 1, rng);
      break;
    }
    case Architecture::CNN2D:
    case Architecture::Hybrid: {
      std::size_t channels = 1;
      if (spec.kind == Architecture::Hybrid) {
        std::size_t in = kFlat;
        for (std::size_t l = 0; l < spec.dense_widths.size(); ++l) {
          add_dense(p, "dense" + std::to_string(l), in, spec.dense_widths[l], rng);
          in = spec.dense_widths[l];
        }
        channels = in / kFlat;
      }
      for (std::size_t l = 0; l < spec.conv_channels.size(); ++l) {
        add_conv(p, "conv" + std::to_string(l), channels, spec.conv_channels[l], rng);
        channels = spec.conv_channels[l];
      }
      add_dense(p, "output", channels * kFlat, 1, rng);
      break;
    }
    case Architecture::LSTM: {
      const std::size_t h = spec.lstm_hidden;
      const std::size_t fan_in = kGridW + h;
      p.push_back(make_param("lstm.input_weight", {4 * h, kGridW}, fan_in, &rng));
      p.push_back(make_param("lstm.hidden_weight", {4 * h, h}, fan_in, &rng));
      p.push_back(make_param("lstm.bias", {4 * h}, fan_in, nullptr));
      add_dense(p, "output", h, 1, rng);
      break;
    }
  }
  return net;
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t total = 0;
  for (const Parameter& p : params_) total += p.value.size();
  return total;
}

Shape Network::input_shape(std::size_t n) const {
  switch (spec_.kind) {
    case Architecture::DNN:
    case Architecture::Hybrid:
      return {n, kFlat};
    case Architecture::CNN2D:
      return {n, 1, kGridH, kGridW};
    case Architecture::LSTM:
      return {n, kGridH, kGridW};
  }
  return {};
}

Tensor Network::make_input(std::span<const Route> routes) const {
  std::vector<double> flat(routes.size() * kFlat, 0.0);
  for (std::size_t i = 0; i < routes.size(); ++i) {
    encode_dense(routes[i], std::span<double>(flat).subspan(i * kFlat, kFlat));
  }
  return Tensor(input_shape(routes.size()), std::move(flat));
}

Tensor Network::make_input(std::span<const double> flat_rows, std::size_t n) const {
  if (flat_rows.size() != n * kFlat) {
    throw ShapeError("expected " + std::to_string(n) + " rows of 198 features");
  }
  return Tensor(input_shape(n), std::vector<double>(flat_rows.begin(), flat_rows.end()));
}

Var Network::forward(Tape& tape, Var input) {
  check_input(*this, input.value());
  return run_layers(spec_, tape, input,
                    [&](std::size_t i) { return tape.parameter(params_.at(i)); });
}

Var Network::forward_frozen(Tape& tape, Var input) const {
  check_input(*this, input.value());
  return run_layers(spec_, tape, input,
                    [&](std::size_t i) { return tape.constant(params_.at(i).value); });
}

std::vector<double> Network::predict(const Tensor& input, Exec exec) const {
  check_input(*this, input);
  const std::size_t n = input.dim(0);
  const std::size_t row = n == 0 ? 0 : input.size() / n;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t start = 0; start < n; start += kPredictChunk) {
    const std::size_t count = std::min(kPredictChunk, n - start);
    Shape shape = input.shape();
    shape[0] = count;
    const auto first = input.values().begin() + static_cast<std::ptrdiff_t>(start * row);
    Tensor chunk(std::move(shape),
                 std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * row)));
    Tape tape(exec);
    const Var y = forward_frozen(tape, tape.constant(std::move(chunk)));
    const auto values = y.value().values();
    out.insert(out.end(), values.begin(), values.end());
  }
  return out;
}

std::vector<double> Network::predict(std::span<const Route> routes, Exec exec) const {
  return predict(make_input(routes), exec);
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const Parameter& p : params_) {
    out.insert(out.end(), p.value.values().begin(), p.value.values().end());
  }
  return out;
}

void Network::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw ShapeError("expected " + std::to_string(parameter_count()) + " parameter values, got " +
                     std::to_string(values.size()));
  }
  std::size_t offset = 0;
  for (Parameter& p : params_) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), p.value.size(),
                p.value.values().begin());
    offset += p.value.size();
  }
}

}  // namespace gradecraft::nn
