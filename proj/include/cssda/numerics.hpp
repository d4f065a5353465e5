// Copyright 2026 The CSSDA Authors
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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cssda {

using Vector = std::vector<double>;

// Trainable tensor with a gradient buffer of identical shape. Matrices are
// row-major with shape {rows, cols}; vectors have shape {n}.
struct ParamTensor {
  std::vector<std::size_t> shape;
  Vector values;
  Vector grad;

  ParamTensor() = default;
  explicit ParamTensor(std::vector<std::size_t> dims);

  static ParamTensor matrix(std::size_t rows, std::size_t cols) {
    return ParamTensor({rows, cols});
  }
  static ParamTensor vector(std::size_t n) { return ParamTensor({n}); }

  std::size_t size() const { return values.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  void zero_grad();
  bool all_finite() const;
};

struct Affine {
  ParamTensor weight;  // out x in
  ParamTensor bias;    // out

  Affine() = default;
  Affine(std::size_t in, std::size_t out)
      : weight(ParamTensor::matrix(out, in)), bias(ParamTensor::vector(out)) {}

  std::size_t in() const { return weight.cols(); }
  std::size_t out() const { return weight.rows(); }
};

// log(sum(exp(logits))) with max-shift. Throws ArgumentError on empty input
// and NumericError on non-finite input.
double lse(std::span<const double> logits);

// log(1 + e^x) evaluated as max(x, 0) + log1p(e^-|x|).
double softplus(double x);

// 1 / (1 + e^-x) without overflow in either tail.
double sigmoid(double x);

Vector softmax(std::span<const double> logits);

double leaky_relu(double x, double slope);
// Derivative of leaky_relu; at exactly 0 this returns slope.
double leaky_relu_derivative(double x, double slope);

Vector hadamard(std::span<const double> a, std::span<const double> b);

Vector affine_forward(const ParamTensor& weight, const ParamTensor& bias,
                      std::span<const double> x);
inline Vector affine_forward(const Affine& layer, std::span<const double> x) {
  return affine_forward(layer.weight, layer.bias, x);
}

// Accumulates dL/dW = upstream (outer) x and dL/db = upstream into the grad
// buffers and returns W^T upstream.
Vector affine_backward(ParamTensor& weight, ParamTensor& bias,
                       std::span<const double> x,
                       std::span<const double> upstream);
inline Vector affine_backward(Affine& layer, std::span<const double> x,
                              std::span<const double> upstream) {
  return affine_backward(layer.weight, layer.bias, x, upstream);
}

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  std::uint64_t step_count = 0;
  Vector first_moment;
  Vector second_moment;
  AdamConfig config;

  OptimizerState() = default;
  OptimizerState(std::size_t size, const AdamConfig& cfg);
};

// Bias-corrected Adam update; zeroes param.grad afterwards. A non-finite
// gradient raises NumericError and leaves param and state untouched.
void adam_step(ParamTensor& param, OptimizerState& state);

// Central-difference estimate of d loss / d param.values. The closure must
// read the current contents of param; values are restored on return.
Vector finite_diff_grad(const std::function<double()>& loss, ParamTensor& param,
                        double h = 1e-5);

}  // namespace cssda
