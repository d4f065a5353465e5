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
#include <span>
#include <string_view>
#include <vector>

#include "cssda/numerics.hpp"

namespace cssda {

// A batch of logit (or feature) vectors, one per sample.
using VectorBatch = std::span<const Vector>;

enum class LossForm {
  derived,  // log-sum-exp / Softplus composition
  naive,    // direct evaluation of Z = sum(exp(l)); overflows on large logits
};

std::string_view to_string(LossForm form);

struct LossBreakdown {
  double d_supervised = 0.0;
  double d_unsupervised = 0.0;
  double d_total = 0.0;
  double g_feature_match = 0.0;
  double g_unsupervised = 0.0;
  double g_total = 0.0;
  // Set when a batch had no labeled (real) or no unlabeled (fake) samples
  // and the corresponding terms were taken as 0.
  bool missing_labeled = false;
  bool missing_unlabeled = false;
  // A naive-form update hit overflow/underflow and was skipped.
  bool numeric_error = false;
};

struct SupervisedLoss {
  double value = 0.0;
  bool empty = false;  // batch had no labeled samples; value is 0
};

// Mean cross-entropy over the k real classes: lse(l) - l[label].
SupervisedLoss supervised_loss(VectorBatch logits, std::span<const std::size_t> labels);
std::vector<Vector> supervised_loss_grad(VectorBatch logits,
                                         std::span<const std::size_t> labels);

// Discriminator unsupervised loss. Per real sample -lse(l) + softplus(lse(l)),
// per fake sample softplus(lse(l)); each side averaged over its own batch.
// An empty side contributes 0; both empty raises ConfigError.
double d_unsup_derived(VectorBatch real_logits, VectorBatch fake_logits);

// -mean log(Z/(Z+1)) over real minus mean log(1/(Z+1)) over fake, with Z
// summed directly. Raises NumericError when Z or the result is not finite.
double d_unsup_naive(VectorBatch real_logits, VectorBatch fake_logits);

struct UnsupGrad {
  std::vector<Vector> real;
  std::vector<Vector> fake;
};

UnsupGrad d_unsup_grad(VectorBatch real_logits, VectorBatch fake_logits,
                       LossForm form = LossForm::derived);

double d_unsup(VectorBatch real_logits, VectorBatch fake_logits, LossForm form);

// Feature matching: (1/H) * sum_j (mean_real_j - mean_fake_j)^2. Both
// batches must be non-empty.
double g_feature_match(VectorBatch real_features, VectorBatch fake_features);
// Gradient with respect to the fake features only; the real mean is constant.
std::vector<Vector> g_feature_match_grad(VectorBatch real_features,
                                         VectorBatch fake_features);

// -mean log D(v_fake), as -lse(l) + softplus(lse(l)).
double g_unsup_derived(VectorBatch fake_logits);
double g_unsup_naive(VectorBatch fake_logits);
std::vector<Vector> g_unsup_grad(VectorBatch fake_logits,
                                 LossForm form = LossForm::derived);

double g_unsup(VectorBatch fake_logits, LossForm form);

}  // namespace cssda
