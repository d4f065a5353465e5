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

#include "cssda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cssda/errors.hpp"

namespace cssda {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw NumericError(std::string(what) + ": non-finite input");
  }
}

void require_slope(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ArgumentError("leaky_relu: slope must lie in (0, 1)");
  }
}

}  // namespace

ParamTensor::ParamTensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
  std::size_t n = shape.empty() ? 0 : 1;
  for (const std::size_t d : shape) {
    if (d == 0) throw ArgumentError("ParamTensor: dimensions must be positive");
    n *= d;
  }
  values.assign(n, 0.0);
  grad.assign(n, 0.0);
}

void ParamTensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

bool ParamTensor::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(values.begin(), values.end(), finite) &&
         std::all_of(grad.begin(), grad.end(), finite);
}

double lse(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("lse: empty input");
  double peak = logits[0];
  for (const double l : logits) {
    require_finite(l, "lse");
    peak = std::max(peak, l);
  }
  double sum = 0.0;
  for (const double l : logits) sum += std::exp(l - peak);
  return peak + std::log(sum);
}

double softplus(double x) {
  require_finite(x, "softplus");
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  require_finite(x, "sigmoid");
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector softmax(std::span<const double> logits) {
  const double log_z = lse(logits);
  Vector out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - log_z);
  }
  return out;
}

double leaky_relu(double x, double slope) {
  require_slope(slope);
  require_finite(x, "leaky_relu");
  return x >= 0.0 ? x : slope * x;
}

double leaky_relu_derivative(double x, double slope) {
  require_slope(slope);
  require_finite(x, "leaky_relu_derivative");
  return x > 0.0 ? 1.0 : slope;
}

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("hadamard: dimension mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector affine_forward(const ParamTensor& weight, const ParamTensor& bias,
                      std::span<const double> x) {
  if (weight.shape.size() != 2 || bias.shape.size() != 1 ||
      bias.size() != weight.rows() || x.size() != weight.cols()) {
    throw ArgumentError("affine_forward: dimension mismatch");
  }
  const std::size_t in = weight.cols();
  Vector y(bias.values);
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    const double* row = weight.values.data() + r * in;
    double acc = 0.0;
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
  return y;
}

Vector affine_backward(ParamTensor& weight, ParamTensor& bias,
                       std::span<const double> x,
                       std::span<const double> upstream) {
  if (weight.shape.size() != 2 || bias.size() != weight.rows() ||
      x.size() != weight.cols() || upstream.size() != weight.rows()) {
    throw ArgumentError("affine_backward: dimension mismatch");
  }
  const std::size_t in = weight.cols();
  Vector input_grad(in, 0.0);
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    const double g = upstream[r];
    bias.grad[r] += g;
    if (g == 0.0) continue;
    double* grad_row = weight.grad.data() + r * in;
    const double* row = weight.values.data() + r * in;
    for (std::size_t c = 0; c < in; ++c) {
      grad_row[c] += g * x[c];
      input_grad[c] += row[c] * g;
    }
  }
  return input_grad;
}

OptimizerState::OptimizerState(std::size_t size, const AdamConfig& cfg)
    : first_moment(size, 0.0), second_moment(size, 0.0), config(cfg) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) || !(cfg.epsilon > 0.0)) {
    throw ArgumentError("OptimizerState: invalid Adam hyperparameters");
  }
}

void adam_step(ParamTensor& param, OptimizerState& state) {
  if (state.first_moment.size() != param.size() ||
      state.second_moment.size() != param.size()) {
    throw ArgumentError("adam_step: optimizer state shape mismatch");
  }
  for (const double g : param.grad) {
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
  }
  const AdamConfig& cfg = state.config;
  const auto t = static_cast<double>(state.step_count + 1);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = param.grad[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    param.values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
  ++state.step_count;
  param.zero_grad();
}

Vector finite_diff_grad(const std::function<double()>& loss, ParamTensor& param,
                        double h) {
  Vector estimate(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param.values[i];
    param.values[i] = saved + h;
    const double up = loss();
    param.values[i] = saved - h;
    const double down = loss();
    param.values[i] = saved;
    estimate[i] = (up - down) / (2.0 * h);
  }
  return estimate;
}

}  // namespace cssda
