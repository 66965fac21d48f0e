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

// Tape-based reverse-mode differentiation over whole tensors.
//
// Each op evaluates eagerly, appends its result to the tape and registers
// a closure that pushes the output gradient back into its inputs. Calling
// Tape::backward on a scalar walks the tape in reverse once and adds the
// resulting gradients into every Parameter that took part.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gradecraft/kernels.hpp"
#include "gradecraft/tensor.hpp"

namespace gradecraft::nn {

using kernels::Exec;

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad = Tensor(value.shape(), 0.0); }
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(Exec exec = Exec::serial) : exec_(exec) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Exec exec() const noexcept { return exec_; }

  Var constant(Tensor value);
  Var parameter(Parameter& param);

  /// Records an op result. Throws NonFiniteError when `value` contains
  /// NaN or infinity.
  Var push(const char* op, Tensor value, std::vector<std::size_t> inputs, Backward backward);

  /// Reverse sweep from a single-element tensor.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  /// Op name given to push; "constant" or "parameter" for leaves.
  const char* op(std::size_t id) const { return nodes_[id].op; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  /// Gradient slot of `id`, zero-initialized on first use.
  Tensor& grad(std::size_t id);
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    Parameter* param = nullptr;
    const char* op = "constant";
    bool needs_grad = false;
  };

  Exec exec_;
  std::vector<Node> nodes_;
};

// x [N, in], w [out, in], b [out] -> [N, out]
Var linear(Var x, Var w, Var b);
// x [N, in], w [out, in] -> [N, out]
Var matmul_nt(Var x, Var w);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var relu(Var x);
Var sigmoid(Var x);
Var tanh(Var x);
// Same-padding 3x3 convolution: x [N, C, H, W], w [Co, C, 3, 3], b [Co].
Var conv2d_same(Var x, Var w, Var b);
Var reshape(Var x, Shape shape);
// Columns [start, start + count) of a rank-2 value.
Var slice_cols(Var x, std::size_t start, std::size_t count);
// x [N, T, F] -> [N, F] at step t.
Var timestep(Var x, std::size_t t);
// Sum_i w_i (p_i - t_i)^2 / Sum_i w_i over a flat prediction vector.
Var weighted_mse(Var predictions, std::span<const double> targets,
                 std::span<const double> weights);

/// Plain-value form of the weighted squared error. Throws InvalidArgument
/// for negative or all-zero weights, ShapeError for length mismatches.
double weighted_mse_loss(std::span<const double> predictions, std::span<const double> targets,
                         std::span<const double> weights);

}  // namespace gradecraft::nn
