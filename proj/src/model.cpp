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

#include "cssda/model.hpp"

#include <cmath>
#include <string>

#include "cssda/errors.hpp"

namespace cssda {

namespace {

constexpr double kInitSd = 0.02;

void fill_normal(ParamTensor& t, double mean, double sd, Rng& rng) {
  for (auto& v : t.values) v = rng.normal(mean, sd);
}

}  // namespace

std::string_view to_string(Wiring wiring) {
  switch (wiring) {
    case Wiring::conditional: return "conditional";
    case Wiring::non_conditional: return "non-conditional";
    case Wiring::classifier_only: return "classifier-only";
  }
  return "unknown";
}

std::string_view to_string(InferMode mode) {
  return mode == InferMode::generator ? "generator" : "per-label";
}

InferMode parse_infer_mode(std::string_view text) {
  if (text == "generator") return InferMode::generator;
  if (text == "per-label") return InferMode::per_label;
  throw ArgumentError("unknown inference mode '" + std::string(text) + "'");
}

std::span<const double> LabelEmbeddingTable::row(std::size_t label) const {
  if (label >= k()) {
    throw ArgumentError("label " + std::to_string(label) + " out of range for k=" +
                        std::to_string(k()));
  }
  return std::span<const double>(rows.values).subspan(label * dim(), dim());
}

DropoutMask sample_dropout_mask(std::size_t width, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
  DropoutMask mask;
  mask.scale.resize(width);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& s : mask.scale) s = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mask;
}

GeneratorTrace generator_trace(const GeneratorParams& params,
                               std::span<const double> input,
                               const DropoutMask* mask) {
  GeneratorTrace trace;
  trace.input.assign(input.begin(), input.end());
  trace.hidden_pre = affine_forward(params.hidden, input);
  trace.hidden_post.resize(trace.hidden_pre.size());
  if (mask && mask->scale.size() != trace.hidden_pre.size()) {
    throw ArgumentError("generator: dropout mask width mismatch");
  }
  for (std::size_t j = 0; j < trace.hidden_pre.size(); ++j) {
    const double a = leaky_relu(trace.hidden_pre[j], params.leaky_slope);
    trace.hidden_post[j] = mask ? a * mask->scale[j] : a;
  }
  trace.output = affine_forward(params.output, trace.hidden_post);
  return trace;
}

Vector generator_backward(GeneratorParams& params, const GeneratorTrace& trace,
                          const DropoutMask* mask, std::span<const double> upstream) {
  Vector grad_hidden = affine_backward(params.output, trace.hidden_post, upstream);
  for (std::size_t j = 0; j < grad_hidden.size(); ++j) {
    double g = grad_hidden[j] * leaky_relu_derivative(trace.hidden_pre[j], params.leaky_slope);
    if (mask) g *= mask->scale[j];
    grad_hidden[j] = g;
  }
  return affine_backward(params.hidden, trace.input, grad_hidden);
}

LatentVariable form_fake_latent(std::span<const double> h_cls,
                                std::span<const double> y_fake) {
  return {hadamard(h_cls, y_fake), Provenance::fake};
}

LatentVariable form_real_latent(std::span<const double> h_cls, std::size_t label,
                                const LabelEmbeddingTable& table) {
  return {hadamard(h_cls, table.row(label)), Provenance::real};
}

void accumulate_table_grad(LabelEmbeddingTable& table, std::size_t label,
                           std::span<const double> h_cls,
                           std::span<const double> upstream) {
  if (label >= table.k()) throw ArgumentError("table gradient: label out of range");
  if (h_cls.size() != table.dim() || upstream.size() != table.dim()) {
    throw ArgumentError("table gradient: dimension mismatch");
  }
  double* g = table.rows.grad.data() + label * table.dim();
  for (std::size_t d = 0; d < table.dim(); ++d) g[d] += h_cls[d] * upstream[d];
}

DiscriminatorTrace discriminator_trace(const DiscriminatorParams& params,
                                       std::span<const double> v) {
  DiscriminatorTrace trace;
  trace.input.assign(v.begin(), v.end());
  trace.hidden_pre = affine_forward(params.hidden, v);
  trace.out.hidden_features.resize(trace.hidden_pre.size());
  for (std::size_t j = 0; j < trace.hidden_pre.size(); ++j) {
    trace.out.hidden_features[j] = leaky_relu(trace.hidden_pre[j], params.leaky_slope);
  }
  trace.out.logits = affine_forward(params.output, trace.out.hidden_features);
  return trace;
}

Vector discriminator_backward(DiscriminatorParams& params,
                              const DiscriminatorTrace& trace,
                              std::span<const double> logits_grad,
                              std::span<const double> features_grad) {
  Vector grad_hidden = affine_backward(params.output, trace.out.hidden_features, logits_grad);
  if (!features_grad.empty()) {
    if (features_grad.size() != grad_hidden.size()) {
      throw ArgumentError("discriminator_backward: feature gradient width mismatch");
    }
    for (std::size_t j = 0; j < grad_hidden.size(); ++j) grad_hidden[j] += features_grad[j];
  }
  for (std::size_t j = 0; j < grad_hidden.size(); ++j) {
    grad_hidden[j] *= leaky_relu_derivative(trace.hidden_pre[j], params.leaky_slope);
  }
  return affine_backward(params.hidden, trace.input, grad_hidden);
}

double fake_probability(std::span<const double> logits) {
  return std::exp(-softplus(lse(logits)));
}

Prediction prediction_from_scores(std::span<const double> scores) {
  Prediction p;
  p.probabilities = softmax(scores);
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[p.label]) p.label = j;
  }
  return p;
}

CssdaModel::CssdaModel(ModelShape shape, Wiring wiring, double leaky_slope,
                       double dropout_rate)
    : shape_(shape), wiring_(wiring) {
  if (shape.dim == 0 || shape.hidden == 0 || shape.k == 0 || shape.generator_input == 0) {
    throw ArgumentError("model shape entries must be positive");
  }
  if (wiring == Wiring::conditional && shape.generator_input != shape.dim) {
    throw ArgumentError("conditional generator input must equal the embedding dimension");
  }
  generator.hidden = Affine(shape.generator_input, shape.hidden);
  generator.output = Affine(shape.hidden, shape.dim);
  generator.leaky_slope = leaky_slope;
  generator.dropout_rate = dropout_rate;
  discriminator.hidden = Affine(shape.dim, shape.hidden);
  discriminator.output = Affine(shape.hidden, shape.k);
  discriminator.leaky_slope = leaky_slope;
  table.rows = ParamTensor::matrix(shape.k, shape.dim);

  const std::size_t d = shape.dim;
  const std::size_t h = shape.hidden;
  if (generator_parameter_count() != shape.generator_input * h + h + h * d + d ||
      discriminator_parameter_count() != d * h + h + h * shape.k + shape.k ||
      table_parameter_count() != shape.k * d) {
    throw ArgumentError("model parameter count mismatch");
  }
}

CssdaModel CssdaModel::initialize(ModelShape shape, Wiring wiring, double leaky_slope,
                                  double dropout_rate, std::uint64_t seed) {
  CssdaModel model(shape, wiring, leaky_slope, dropout_rate);
  Rng rng = Rng::derive(seed, 100);
  fill_normal(model.generator.hidden.weight, 0.0, kInitSd, rng);
  fill_normal(model.generator.output.weight, 0.0, kInitSd, rng);
  fill_normal(model.discriminator.hidden.weight, 0.0, kInitSd, rng);
  fill_normal(model.discriminator.output.weight, 0.0, kInitSd, rng);
  fill_normal(model.table.rows, 1.0, kInitSd, rng);
  return model;
}

std::size_t CssdaModel::generator_parameter_count() const {
  return generator.hidden.weight.size() + generator.hidden.bias.size() +
         generator.output.weight.size() + generator.output.bias.size();
}

std::size_t CssdaModel::discriminator_parameter_count() const {
  return discriminator.hidden.weight.size() + discriminator.hidden.bias.size() +
         discriminator.output.weight.size() + discriminator.output.bias.size();
}

std::size_t CssdaModel::table_parameter_count() const { return table.rows.size(); }

std::vector<ParamTensor*> CssdaModel::parameters() {
  return {&generator.hidden.weight,     &generator.hidden.bias,
          &generator.output.weight,     &generator.output.bias,
          &discriminator.hidden.weight, &discriminator.hidden.bias,
          &discriminator.output.weight, &discriminator.output.bias,
          &table.rows};
}

std::vector<const ParamTensor*> CssdaModel::parameters() const {
  return {&generator.hidden.weight,     &generator.hidden.bias,
          &generator.output.weight,     &generator.output.bias,
          &discriminator.hidden.weight, &discriminator.hidden.bias,
          &discriminator.output.weight, &discriminator.output.bias,
          &table.rows};
}

void CssdaModel::zero_grad() {
  for (ParamTensor* p : parameters()) p->zero_grad();
}

Prediction predict_class(const CssdaModel& model, std::span<const double> h_cls,
                         InferMode mode) {
  if (h_cls.size() != model.shape().dim) {
    throw ArgumentError("predict_class: embedding dimension mismatch");
  }
  if (model.wiring() != Wiring::conditional) {
    return prediction_from_scores(discriminator_forward(model.discriminator, h_cls).logits);
  }
  if (mode == InferMode::generator) {
    const Vector y = generator_forward(model.generator, h_cls);
    const LatentVariable v = form_fake_latent(h_cls, y);
    return prediction_from_scores(discriminator_forward(model.discriminator, v).logits);
  }
  Vector scores(model.shape().k);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    const LatentVariable v = form_real_latent(h_cls, j, model.table);
    scores[j] = discriminator_forward(model.discriminator, v).logits[j];
  }
  return prediction_from_scores(scores);
}

}  // namespace cssda
