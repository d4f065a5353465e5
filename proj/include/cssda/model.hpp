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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cssda/numerics.hpp"
#include "cssda/rng.hpp"

namespace cssda {

// How generated data reaches the discriminator.
enum class Wiring : std::uint32_t {
  // v_fake = h ⊙ G(h), v_real = h ⊙ table[label]
  conditional = 0,
  // G maps a noise vector straight to a feature vector; real side is h.
  non_conditional = 1,
  // Discriminator-shaped classifier on h; generator and table unused.
  classifier_only = 2,
};

std::string_view to_string(Wiring wiring);

enum class Provenance { real, fake };

enum class InferMode { generator, per_label };

std::string_view to_string(InferMode mode);
InferMode parse_infer_mode(std::string_view text);

struct ModelShape {
  std::size_t dim = 768;
  std::size_t hidden = 768;
  std::size_t k = 3;
  std::size_t generator_input = 768;  // dim, or the noise width

  bool operator==(const ModelShape&) const = default;
};

inline constexpr std::size_t kNoiseDim = 100;

struct GeneratorParams {
  Affine hidden;
  Affine output;
  double leaky_slope = 0.2;
  double dropout_rate = 0.1;
};

struct DiscriminatorParams {
  Affine hidden;
  Affine output;  // exactly k outputs; the fake logit is an implicit zero
  double leaky_slope = 0.2;
};

struct LabelEmbeddingTable {
  ParamTensor rows;  // k x dim

  std::size_t k() const { return rows.rows(); }
  std::size_t dim() const { return rows.cols(); }
  std::span<const double> row(std::size_t label) const;
};

struct LatentVariable {
  Vector values;
  Provenance provenance = Provenance::real;
};

struct DiscriminatorOutput {
  Vector hidden_features;  // post-activation intermediate layer
  Vector logits;           // k real-class logits
};

// Inverted-dropout scale per hidden unit: 0 or 1 / (1 - rate).
struct DropoutMask {
  Vector scale;
};

DropoutMask sample_dropout_mask(std::size_t width, double rate, Rng& rng);

struct GeneratorTrace {
  Vector input;
  Vector hidden_pre;
  Vector hidden_post;  // after activation and dropout
  Vector output;
};

struct DiscriminatorTrace {
  Vector input;
  Vector hidden_pre;
  DiscriminatorOutput out;
};

GeneratorTrace generator_trace(const GeneratorParams& params,
                               std::span<const double> input,
                               const DropoutMask* mask = nullptr);

// y_fake = output(dropout(leaky_relu(hidden(input)))). No mask = inference.
inline Vector generator_forward(const GeneratorParams& params,
                                std::span<const double> input,
                                const DropoutMask* mask = nullptr) {
  return generator_trace(params, input, mask).output;
}

// Accumulates parameter gradients and returns d loss / d input.
Vector generator_backward(GeneratorParams& params, const GeneratorTrace& trace,
                          const DropoutMask* mask, std::span<const double> upstream);

LatentVariable form_fake_latent(std::span<const double> h_cls,
                                std::span<const double> y_fake);
LatentVariable form_real_latent(std::span<const double> h_cls, std::size_t label,
                                const LabelEmbeddingTable& table);

// Adds h_cls ⊙ upstream into table.rows.grad for the given label.
void accumulate_table_grad(LabelEmbeddingTable& table, std::size_t label,
                           std::span<const double> h_cls,
                           std::span<const double> upstream);

DiscriminatorTrace discriminator_trace(const DiscriminatorParams& params,
                                       std::span<const double> v);

inline DiscriminatorOutput discriminator_forward(const DiscriminatorParams& params,
                                                 std::span<const double> v) {
  return discriminator_trace(params, v).out;
}
inline DiscriminatorOutput discriminator_forward(const DiscriminatorParams& params,
                                                 const LatentVariable& v) {
  return discriminator_forward(params, v.values);
}

// Gradients may arrive at the logits, the hidden features, or both.
Vector discriminator_backward(DiscriminatorParams& params,
                              const DiscriminatorTrace& trace,
                              std::span<const double> logits_grad,
                              std::span<const double> features_grad = {});

// 1 / (Z + 1) with Z = sum(exp(logits)): the implicit fake-class probability.
// D(v) = 1 - fake_probability(logits).
double fake_probability(std::span<const double> logits);

struct Prediction {
  std::size_t label = 0;
  Vector probabilities;  // softmax over the k real-class scores
};

// Argmax with ties broken toward the lowest index.
Prediction prediction_from_scores(std::span<const double> scores);

class CssdaModel {
 public:
  CssdaModel() = default;
  CssdaModel(ModelShape shape, Wiring wiring, double leaky_slope,
             double dropout_rate);

  // Seeded N(0, 0.02) weights, zero biases; table rows N(1, 0.02).
  static CssdaModel initialize(ModelShape shape, Wiring wiring,
                               double leaky_slope, double dropout_rate,
                               std::uint64_t seed);

  const ModelShape& shape() const { return shape_; }
  Wiring wiring() const { return wiring_; }

  GeneratorParams generator;
  DiscriminatorParams discriminator;
  LabelEmbeddingTable table;

  std::size_t generator_parameter_count() const;
  std::size_t discriminator_parameter_count() const;
  std::size_t table_parameter_count() const;

  // Fixed serialization order shared with the checkpoint format.
  std::vector<ParamTensor*> parameters();
  std::vector<const ParamTensor*> parameters() const;

  void zero_grad();

 private:
  ModelShape shape_;
  Wiring wiring_ = Wiring::conditional;
};

// Inference path (no dropout). Conditional models use v = h ⊙ G(h) in
// generator mode, or score h ⊙ table[j] with logit j in per-label mode.
// Other wirings classify h directly.
Prediction predict_class(const CssdaModel& model, std::span<const double> h_cls,
                         InferMode mode = InferMode::generator);

}  // namespace cssda
