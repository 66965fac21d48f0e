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

#include "gradecraft/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "gradecraft/error.hpp"

namespace gradecraft::nn {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw InvalidArgument("vars belong to different tapes");
}

template <typename Fn, typename Deriv>
Var elementwise(const char* op, Var x, Fn fn, Deriv deriv_from_output) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
  const std::size_t xi = x.id;
  return x.tape->push(op, std::move(out), {xi}, [xi, deriv_from_output](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    const Tensor& y = t.value(self);
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * deriv_from_output(y[i]);
  });
}

}  // namespace

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& param) {
  Node node;
  node.value = param.value;
  node.param = &param;
  node.op = "parameter";
  node.needs_grad = true;
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::push(const char* op, Tensor value, std::vector<std::size_t> inputs, Backward backward) {
  if (!value.all_finite()) {
    throw NonFiniteError(std::string("non-finite value produced by ") + op);
  }
  Node node;
  node.value = std::move(value);
  node.op = op;
  for (const std::size_t in : inputs) node.needs_grad = node.needs_grad || nodes_[in].needs_grad;
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.size() != node.value.size() || node.grad.shape() != node.value.shape()) {
    node.grad = Tensor(node.value.shape(), 0.0);
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw InvalidArgument("loss belongs to a different tape");
  if (nodes_[loss.id].value.size() != 1) throw ShapeError("backward needs a scalar loss");
  grad(loss.id).fill(1.0);
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.needs_grad || node.grad.size() == 0) continue;
    if (node.backward) node.backward(*this, id);
    if (!node.grad.all_finite()) throw NonFiniteError("non-finite gradient during backward");
    if (node.param != nullptr) {
      Parameter& p = *node.param;
      if (p.grad.shape() != p.value.shape()) p.zero_grad();
      for (std::size_t i = 0; i < node.grad.size(); ++i) p.grad[i] += node.grad[i];
    }
  }
}

Var matmul_nt(Var x, Var w) {
  require_same_tape(x, w);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  require(xv.rank() == 2 && wv.rank() == 2 && xv.dim(1) == wv.dim(1),
          "matmul_nt shapes " + shape_string(xv.shape()) + " x " + shape_string(wv.shape()));
  const std::size_t n = xv.dim(0), in = xv.dim(1), out = wv.dim(0);
  Tape& tape = *x.tape;
  Tensor y({n, out});
  kernels::gemm_nt(tape.exec(), xv.values(), wv.values(), y.values(), n, out, in);
  const std::size_t xi = x.id, wi = w.id;
  auto backward = [xi, wi, n, in, out](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    if (t.needs_grad(xi)) {
      kernels::gemm_nn(t.exec(), dy.values(), t.value(wi).values(), t.grad(xi).values(), n, in,
                       out, true);
    }
    if (t.needs_grad(wi)) {
      kernels::gemm_tn(t.exec(), dy.values(), t.value(xi).values(), t.grad(wi).values(), out,
                       in, n, true);
    }
  };
  return tape.push("matmul", std::move(y), {xi, wi}, std::move(backward));
}

Var linear(Var x, Var w, Var b) {
  require_same_tape(x, b);
  {
    const Tensor& bv = b.value();
    const Tensor& wv = w.value();
    require(wv.rank() == 2 && bv.rank() == 1 && bv.dim(0) == wv.dim(0),
            "linear bias " + shape_string(bv.shape()) + " for weight " + shape_string(wv.shape()));
  }
  const Var xw = matmul_nt(x, w);
  // Fetch after the push above; it may move node storage.
  const Tensor& bv = b.value();
  Tensor y = xw.value();
  const std::size_t n = y.dim(0), out = y.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < out; ++j) y[i * out + j] += bv[j];
  }
  const std::size_t pi = xw.id, bi = b.id;
  auto backward = [pi, bi, n, out](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    if (t.needs_grad(pi)) {
      Tensor& dp = t.grad(pi);
      for (std::size_t i = 0; i < dy.size(); ++i) dp[i] += dy[i];
    }
    if (t.needs_grad(bi)) {
      Tensor& db = t.grad(bi);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < out; ++j) db[j] += dy[i * out + j];
      }
    }
  };
  return x.tape->push("linear", std::move(y), {pi, bi}, std::move(backward));
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.shape() == bv.shape(),
          "add shapes " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  const std::size_t ai = a.id, bi = b.id;
  return a.tape->push("add", std::move(y), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    for (const std::size_t in : {ai, bi}) {
      if (!t.needs_grad(in)) continue;
      Tensor& d = t.grad(in);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.shape() == bv.shape(),
          "mul shapes " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const std::size_t ai = a.id, bi = b.id;
  return a.tape->push("mul", std::move(y), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    if (t.needs_grad(ai)) {
      Tensor& da = t.grad(ai);
      const Tensor& bv = t.value(bi);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bv[i];
    }
    if (t.needs_grad(bi)) {
      Tensor& db = t.grad(bi);
      const Tensor& av = t.value(ai);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * av[i];
    }
  });
}

Var relu(Var x) {
  return elementwise(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var x) {
  return elementwise(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return elementwise(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double y) { return 1.0 - y * y; });
}

Var conv2d_same(Var x, Var w, Var b) {
  require_same_tape(x, w);
  require_same_tape(x, b);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  require(xv.rank() == 4, "conv2d input must be [N, C, H, W], got " + shape_string(xv.shape()));
  require(wv.rank() == 4 && wv.dim(1) == xv.dim(1) && wv.dim(2) == 3 && wv.dim(3) == 3,
          "conv2d weight " + shape_string(wv.shape()) + " for input " + shape_string(xv.shape()));
  require(bv.rank() == 1 && bv.dim(0) == wv.dim(0), "conv2d bias shape");
  const std::size_t n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const std::size_t co = wv.dim(0);
  const std::size_t pixels = n * h * wd;
  const std::size_t patch = c * 9;
  Tape& tape = *x.tape;

  std::vector<double> cols(pixels * patch);
  kernels::im2col3x3(tape.exec(), xv.values(), cols, n, c, h, wd);
  std::vector<double> prod(pixels * co);
  kernels::gemm_nt(tape.exec(), cols, wv.values(), prod, pixels, co, patch);

  Tensor y({n, co, h, wd});
  const std::size_t plane = h * wd;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t p = 0; p < plane; ++p) {
      const double* row = prod.data() + (s * plane + p) * co;
      for (std::size_t o = 0; o < co; ++o) y[(s * co + o) * plane + p] = row[o] + bv[o];
    }
  }

  const std::size_t xi = x.id, wi = w.id, bi = b.id;
  return tape.push(
      "conv2d", std::move(y), {xi, wi, bi},
      [xi, wi, bi, n, c, h, wd, co, plane, pixels, patch, cols = std::move(cols)](
          Tape& t, std::size_t self) {
        const Tensor& dy = t.grad(self);
        std::vector<double> dyt(pixels * co);  // [N*H*W, Co]
        for (std::size_t s = 0; s < n; ++s) {
          for (std::size_t o = 0; o < co; ++o) {
            const double* src = dy.values().data() + (s * co + o) * plane;
            for (std::size_t p = 0; p < plane; ++p) dyt[(s * plane + p) * co + o] = src[p];
          }
        }
        if (t.needs_grad(wi)) {
          kernels::gemm_tn(t.exec(), dyt, cols, t.grad(wi).values(), co, patch, pixels, true);
        }
        if (t.needs_grad(bi)) {
          Tensor& db = t.grad(bi);
          for (std::size_t q = 0; q < pixels; ++q) {
            for (std::size_t o = 0; o < co; ++o) db[o] += dyt[q * co + o];
          }
        }
        if (t.needs_grad(xi)) {
          std::vector<double> dcols(pixels * patch);
          kernels::gemm_nn(t.exec(), dyt, t.value(wi).values(), dcols, pixels, patch, co);
          kernels::col2im3x3(t.exec(), dcols, t.grad(xi).values(), n, c, h, wd);
        }
      });
}

Var reshape(Var x, Shape shape) {
  Tensor y = x.value().reshaped(std::move(shape));
  const std::size_t xi = x.id;
  return x.tape->push("reshape", std::move(y), {xi}, [xi](Tape& t, std::size_t self) {
    if (!t.needs_grad(xi)) return;
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
  const Tensor& xv = x.value();
  require(xv.rank() == 2 && start + count <= xv.dim(1),
          "slice_cols out of range for " + shape_string(xv.shape()));
  const std::size_t n = xv.dim(0), d = xv.dim(1);
  Tensor y({n, count});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(xv.values().begin() + static_cast<std::ptrdiff_t>(i * d + start), count,
                y.values().begin() + static_cast<std::ptrdiff_t>(i * count));
  }
  const std::size_t xi = x.id;
  return x.tape->push("slice_cols", std::move(y), {xi},
                      [xi, n, d, start, count](Tape& t, std::size_t self) {
                        if (!t.needs_grad(xi)) return;
                        const Tensor& dy = t.grad(self);
                        Tensor& dx = t.grad(xi);
                        for (std::size_t i = 0; i < n; ++i) {
                          for (std::size_t j = 0; j < count; ++j) {
                            dx[i * d + start + j] += dy[i * count + j];
                          }
                        }
                      });
}

Var timestep(Var x, std::size_t step) {
  const Tensor& xv = x.value();
  require(xv.rank() == 3 && step < xv.dim(1),
          "timestep " + std::to_string(step) + " out of range for " + shape_string(xv.shape()));
  const std::size_t n = xv.dim(0), steps = xv.dim(1), f = xv.dim(2);
  Tensor y({n, f});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) y[i * f + j] = xv[(i * steps + step) * f + j];
  }
  const std::size_t xi = x.id;
  return x.tape->push("timestep", std::move(y), {xi},
                      [xi, n, steps, f, step](Tape& t, std::size_t self) {
                        if (!t.needs_grad(xi)) return;
                        const Tensor& dy = t.grad(self);
                        Tensor& dx = t.grad(xi);
                        for (std::size_t i = 0; i < n; ++i) {
                          for (std::size_t j = 0; j < f; ++j) {
                            dx[(i * steps + step) * f + j] += dy[i * f + j];
                          }
                        }
                      });
}

double weighted_mse_loss(std::span<const double> predictions, std::span<const double> targets,
                         std::span<const double> weights) {
  if (predictions.size() != targets.size() || predictions.size() != weights.size()) {
    throw ShapeError("predictions, targets and weights must have equal length");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw InvalidArgument("sample weights must be >= 0");
    const double r = predictions[i] - targets[i];
    num += weights[i] * r * r;
    den += weights[i];
  }
  if (den <= 0.0) throw InvalidArgument("sample weights sum to zero");
  return num / den;
}

Var weighted_mse(Var predictions, std::span<const double> targets,
                 std::span<const double> weights) {
  const Tensor& pv = predictions.value();
  const double loss = weighted_mse_loss(pv.values(), targets, weights);
  double den = 0.0;
  for (const double w : weights) den += w;
  const std::size_t pi = predictions.id;
  std::vector<double> t(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  return predictions.tape->push(
      "weighted_mse", Tensor({1}, std::vector<double>{loss}), {pi},
      [pi, den, t = std::move(t), w = std::move(w)](Tape& tape, std::size_t self) {
        if (!tape.needs_grad(pi)) return;
        const double g = tape.grad(self)[0];
        const Tensor& p = tape.value(pi);
        Tensor& dp = tape.grad(pi);
        for (std::size_t i = 0; i < p.size(); ++i) dp[i] += g * 2.0 * w[i] * (p[i] - t[i]) / den;
      });
}

}  // namespace gradecraft::nn
