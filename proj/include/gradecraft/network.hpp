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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradecraft/autodiff.hpp"
#include "gradecraft/board.hpp"

namespace gradecraft::nn {

enum class Architecture { DNN, CNN2D, LSTM, Hybrid };

inline constexpr std::array<Architecture, 4> kAllArchitectures = {
    Architecture::DNN, Architecture::CNN2D, Architecture::LSTM, Architecture::Hybrid};

/// "dnn", "cnn2d", "lstm", "hybrid".
std::string architecture_tag(Architecture arch);
/// Throws ParseError for unknown tags.
Architecture parse_architecture(std::string_view tag);

struct ArchitectureSpec {
  Architecture kind = Architecture::DNN;
  // Hidden dense widths. DNN: 3 entries ahead of the output unit.
  // Hybrid: 6 entries, the last a multiple of 198 that becomes the grid
  // channels of the convolution stack.
  std::vector<std::size_t> dense_widths;
  // Output channels of the 4 convolution layers (CNN2D and Hybrid).
  std::vector<std::size_t> conv_channels;
  std::size_t lstm_hidden = 0;
  std::uint64_t seed = 0;

  static ArchitectureSpec defaults(Architecture kind, std::uint64_t seed = 0);
  /// Reduced widths with the same layer structure, for gradient checks.
  static ArchitectureSpec compact(Architecture kind, std::uint64_t seed = 0);

  /// Throws InvalidArgument when the layer structure is wrong.
  void validate() const;

  bool operator==(const ArchitectureSpec&) const = default;
};

class Network {
 public:
  /// Parameters drawn from spec.seed: weights uniform in
  /// [-sqrt(6/fan_in), sqrt(6/fan_in)], biases zero.
  static Network build(const ArchitectureSpec& spec);

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept;

  /// Input shape for a batch of n: [n, 198] for DNN and Hybrid,
  /// [n, 1, 18, 11] for CNN2D, [n, 18, 11] for LSTM. Grid rows run
  /// bottom to top, so LSTM step t reads board row t.
  Shape input_shape(std::size_t n) const;
  Tensor make_input(std::span<const Route> routes) const;
  /// One-hot rows of length 198, concatenated.
  Tensor make_input(std::span<const double> flat_rows, std::size_t n) const;

  /// Records the forward pass with trainable parameters. Output [N, 1].
  /// Throws ShapeError when the input does not match input_shape.
  Var forward(Tape& tape, Var input);
  /// Forward pass with parameters recorded as constants.
  Var forward_frozen(Tape& tape, Var input) const;

  std::vector<double> predict(const Tensor& input, Exec exec = Exec::serial) const;
  std::vector<double> predict(std::span<const Route> routes, Exec exec = Exec::serial) const;

  /// All parameter values concatenated in declaration order.
  std::vector<double> flat_parameters() const;
  /// Throws ShapeError when the length differs from parameter_count().
  void set_flat_parameters(std::span<const double> values);

 private:
  ArchitectureSpec spec_;
  std::vector<Parameter> params_;
};

}  // namespace gradecraft::nn
