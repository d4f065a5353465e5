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

#include "cssda/losses.hpp"

#include <cmath>
#include <string>

#include "cssda/errors.hpp"

namespace cssda {

namespace {

// Z = sum(exp(l)) with no shift. Overflow (Z = inf) and total underflow
// (Z = 0) are both unrecoverable for the naive form.
double naive_partition(const Vector& logits) {
  if (logits.empty()) throw ArgumentError("naive loss: empty logit vector");
  double z = 0.0;
  for (const double l : logits) z += std::exp(l);
  if (!std::isfinite(z)) throw NumericError("naive loss: Z = sum(exp(l)) overflowed");
  if (z == 0.0) throw NumericError("naive loss: Z = sum(exp(l)) underflowed to 0");
  return z;
}

// -log(Z / (Z + 1)), written as log1p(1/Z).
double naive_real_term(const Vector& logits) {
  return std::log1p(1.0 / naive_partition(logits));
}

// -log(1 - Z / (Z + 1)) = log(Z + 1).
double naive_fake_term(const Vector& logits) {
  return std::log1p(naive_partition(logits));
}

// -lse + softplus(lse) collapses to softplus(-lse), which avoids the
// cancellation between two large terms.
double derived_real_term(const Vector& logits) { return softplus(-lse(logits)); }

double derived_fake_term(const Vector& logits) { return softplus(lse(logits)); }

template <typename Term>
double batch_mean(VectorBatch batch, Term term) {
  double sum = 0.0;
  for (const auto& l : batch) sum += term(l);
  return sum / static_cast<double>(batch.size());
}

void require_finite_result(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericError(std::string(what) + ": non-finite result");
}

// Gradient of softplus(s * lse(l)) for s = +1 (fake) or -1 (real), scaled.
Vector derived_side_grad(const Vector& logits, double sign, double scale) {
  const double log_z = lse(logits);
  const double outer = sign * sigmoid(sign * log_z) * scale;
  Vector g(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    g[i] = outer * std::exp(logits[i] - log_z);
  }
  return g;
}

Vector naive_real_grad(const Vector& logits, double scale) {
  const double z = naive_partition(logits);
  Vector g(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    g[i] = -(std::exp(logits[i]) / z) / (z + 1.0) * scale;
  }
  return g;
}

Vector naive_fake_grad(const Vector& logits, double scale) {
  const double z = naive_partition(logits);
  Vector g(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    g[i] = std::exp(logits[i]) / (z + 1.0) * scale;
  }
  return g;
}

void require_some_side(VectorBatch real, VectorBatch fake) {
  if (real.empty() && fake.empty()) {
    throw ConfigError("unsupervised loss: both real and fake batches are empty");
  }
}

}  // namespace

std::string_view to_string(LossForm form) {
  return form == LossForm::derived ? "derived" : "naive";
}

SupervisedLoss supervised_loss(VectorBatch logits, std::span<const std::size_t> labels) {
  if (logits.size() != labels.size()) {
    throw ArgumentError("supervised_loss: logits/labels length mismatch");
  }
  if (logits.empty()) return {0.0, true};
  double sum = 0.0;
  for (std::size_t n = 0; n < logits.size(); ++n) {
    if (labels[n] >= logits[n].size()) throw ArgumentError("supervised_loss: label out of range");
    sum += lse(logits[n]) - logits[n][labels[n]];
  }
  return {sum / static_cast<double>(logits.size()), false};
}

std::vector<Vector> supervised_loss_grad(VectorBatch logits,
                                         std::span<const std::size_t> labels) {
  if (logits.size() != labels.size()) {
    throw ArgumentError("supervised_loss_grad: logits/labels length mismatch");
  }
  std::vector<Vector> grads;
  grads.reserve(logits.size());
  const double scale = 1.0 / static_cast<double>(logits.size());
  for (std::size_t n = 0; n < logits.size(); ++n) {
    if (labels[n] >= logits[n].size()) {
      throw ArgumentError("supervised_loss_grad: label out of range");
    }
    Vector g = softmax(logits[n]);
    g[labels[n]] -= 1.0;
    for (auto& v : g) v *= scale;
    grads.push_back(std::move(g));
  }
  return grads;
}

double d_unsup_derived(VectorBatch real_logits, VectorBatch fake_logits) {
  require_some_side(real_logits, fake_logits);
  double value = 0.0;
  if (!real_logits.empty()) value += batch_mean(real_logits, derived_real_term);
  if (!fake_logits.empty()) value += batch_mean(fake_logits, derived_fake_term);
  require_finite_result(value, "d_unsup_derived");
  return value;
}

double d_unsup_naive(VectorBatch real_logits, VectorBatch fake_logits) {
  require_some_side(real_logits, fake_logits);
  double value = 0.0;
  if (!real_logits.empty()) value += batch_mean(real_logits, naive_real_term);
  if (!fake_logits.empty()) value += batch_mean(fake_logits, naive_fake_term);
  require_finite_result(value, "d_unsup_naive");
  return value;
}

double d_unsup(VectorBatch real_logits, VectorBatch fake_logits, LossForm form) {
  return form == LossForm::derived ? d_unsup_derived(real_logits, fake_logits)
                                   : d_unsup_naive(real_logits, fake_logits);
}

UnsupGrad d_unsup_grad(VectorBatch real_logits, VectorBatch fake_logits, LossForm form) {
  require_some_side(real_logits, fake_logits);
  UnsupGrad grad;
  const double real_scale = real_logits.empty() ? 0.0 : 1.0 / static_cast<double>(real_logits.size());
  const double fake_scale = fake_logits.empty() ? 0.0 : 1.0 / static_cast<double>(fake_logits.size());
  for (const auto& l : real_logits) {
    grad.real.push_back(form == LossForm::derived ? derived_side_grad(l, -1.0, real_scale)
                                                  : naive_real_grad(l, real_scale));
  }
  for (const auto& l : fake_logits) {
    grad.fake.push_back(form == LossForm::derived ? derived_side_grad(l, 1.0, fake_scale)
                                                  : naive_fake_grad(l, fake_scale));
  }
  return grad;
}

namespace {

Vector batch_feature_mean(VectorBatch features, std::size_t width) {
  Vector mean(width, 0.0);
  for (const auto& f : features) {
    if (f.size() != width) throw ArgumentError("feature matching: width mismatch");
    for (std::size_t j = 0; j < width; ++j) mean[j] += f[j];
  }
  for (auto& m : mean) m /= static_cast<double>(features.size());
  return mean;
}

}  // namespace

double g_feature_match(VectorBatch real_features, VectorBatch fake_features) {
  if (real_features.empty() || fake_features.empty()) {
    throw ArgumentError("g_feature_match: both batches must be non-empty");
  }
  const std::size_t width = real_features[0].size();
  if (width == 0) throw ArgumentError("g_feature_match: zero feature width");
  const Vector mu_real = batch_feature_mean(real_features, width);
  const Vector mu_fake = batch_feature_mean(fake_features, width);
  double sum = 0.0;
  for (std::size_t j = 0; j < width; ++j) {
    const double d = mu_real[j] - mu_fake[j];
    sum += d * d;
  }
  return sum / static_cast<double>(width);
}

std::vector<Vector> g_feature_match_grad(VectorBatch real_features,
                                         VectorBatch fake_features) {
  if (real_features.empty() || fake_features.empty()) {
    throw ArgumentError("g_feature_match_grad: both batches must be non-empty");
  }
  const std::size_t width = real_features[0].size();
  const Vector mu_real = batch_feature_mean(real_features, width);
  const Vector mu_fake = batch_feature_mean(fake_features, width);
  const double scale = 2.0 / (static_cast<double>(width) *
                              static_cast<double>(fake_features.size()));
  Vector g(width);
  for (std::size_t j = 0; j < width; ++j) g[j] = scale * (mu_fake[j] - mu_real[j]);
  return std::vector<Vector>(fake_features.size(), g);
}

double g_unsup_derived(VectorBatch fake_logits) {
  if (fake_logits.empty()) throw ConfigError("g_unsup: empty fake batch");
  const double value = batch_mean(fake_logits, derived_real_term);
  require_finite_result(value, "g_unsup_derived");
  return value;
}

double g_unsup_naive(VectorBatch fake_logits) {
  if (fake_logits.empty()) throw ConfigError("g_unsup: empty fake batch");
  const double value = batch_mean(fake_logits, naive_real_term);
  require_finite_result(value, "g_unsup_naive");
  return value;
}

double g_unsup(VectorBatch fake_logits, LossForm form) {
  return form == LossForm::derived ? g_unsup_derived(fake_logits) : g_unsup_naive(fake_logits);
}

std::vector<Vector> g_unsup_grad(VectorBatch fake_logits, LossForm form) {
  if (fake_logits.empty()) throw ConfigError("g_unsup_grad: empty fake batch");
  const double scale = 1.0 / static_cast<double>(fake_logits.size());
  std::vector<Vector> grads;
  grads.reserve(fake_logits.size());
  for (const auto& l : fake_logits) {
    grads.push_back(form == LossForm::derived ? derived_side_grad(l, -1.0, scale)
                                              : naive_real_grad(l, scale));
  }
  return grads;
}

}  // namespace cssda
