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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cssda/data.hpp"
#include "cssda/losses.hpp"
#include "cssda/model.hpp"
#include "cssda/numerics.hpp"
#include "cssda/rng.hpp"

namespace cssda {

enum class Mode { full, non_conditional, naive_loss, no_augment };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct TrainingConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 5;
  std::size_t k = 3;
  std::size_t dim = 768;
  std::size_t hidden = 0;  // 0 means "same as dim"
  double labeled_fraction = 0.5;
  double lr_d = 1e-3;
  double lr_g = 1e-3;
  double leaky_slope = 0.2;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  Mode mode = Mode::full;
  InferMode infer = InferMode::generator;

  std::size_t hidden_width() const { return hidden == 0 ? dim : hidden; }
  // Throws ConfigError on any out-of-range field.
  void validate() const;
};

// Flat JSON object with TrainingConfig field names; absent keys keep the
// values of `base`. Unknown keys and wrong types raise ConfigError.
TrainingConfig load_training_config(const std::filesystem::path& path,
                                    TrainingConfig base = {});
TrainingConfig parse_training_config(std::string_view json_text,
                                     TrainingConfig base = {});

// What a mode trains and how data flows through it.
struct ModeWiring {
  Mode mode = Mode::full;
  Wiring wiring = Wiring::conditional;
  LossForm loss_form = LossForm::derived;
  bool uses_generator = true;
  bool uses_label_table = true;
  bool uses_unlabeled = true;
  std::string description;
};

ModeWiring ablation_mode_behavior(Mode mode);

ModelShape model_shape_for(const TrainingConfig& config);

// Everything one optimization step consumes, with the stochastic parts
// (dropout masks, generator noise) already drawn.
struct StepInputs {
  std::vector<Vector> labeled_h;
  std::vector<std::size_t> labels;
  std::vector<Vector> unlabeled_h;
  std::vector<Vector> generator_inputs;  // one per unlabeled sample
  std::vector<DropoutMask> masks;        // one per unlabeled sample
};

struct LossWeights {
  double supervised = 1.0;
  double d_unsup = 1.0;
  double g_feature_match = 1.0;
  double g_unsup = 1.0;
};

// L_D on fixed inputs. With accumulate set, backpropagates the weighted loss
// into the discriminator and (conditional wiring) the label table. Fake
// latents are constants here: the generator receives no gradient.
LossBreakdown discriminator_pass(CssdaModel& model, const StepInputs& inputs,
                                 LossForm form, const LossWeights& weights = {},
                                 bool accumulate = true);

// L_G on fixed inputs. With accumulate set, backpropagates into the generator.
// Discriminator grads are also written (the chain passes through it) and must
// be discarded by the caller. The real branch is treated as constant.
LossBreakdown generator_pass(CssdaModel& model, const StepInputs& inputs,
                             LossForm form, const LossWeights& weights = {},
                             bool accumulate = true);

double weighted_d_loss(const LossBreakdown& b, const LossWeights& w);
double weighted_g_loss(const LossBreakdown& b, const LossWeights& w);

class Trainer {
 public:
  Trainer(CssdaModel model, const TrainingConfig& config);

  // One D step then one G step on fresh forward passes. In naive-loss mode a
  // NumericError skips the failing update and is counted; in other modes it
  // propagates.
  LossBreakdown train_step(const Dataset& dataset, const Batch& batch);

  StepInputs gather(const Dataset& dataset, const Batch& batch);

  const CssdaModel& model() const { return model_; }
  CssdaModel& model() { return model_; }
  CssdaModel release() && { return std::move(model_); }
  std::size_t numeric_error_count() const { return numeric_errors_; }
  std::size_t completed_steps() const { return completed_steps_; }
  const ModeWiring& wiring() const { return wiring_; }

 private:
  void apply_discriminator_update();
  void apply_generator_update();

  TrainingConfig config_;
  ModeWiring wiring_;
  CssdaModel model_;
  std::vector<OptimizerState> optimizers_;
  Rng rng_;
  std::size_t numeric_errors_ = 0;
  std::size_t completed_steps_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown mean;     // over completed steps
  std::size_t numeric_error_count = 0;
  double wall_time = 0.0;  // seconds
  std::size_t steps = 0;
};

std::string epoch_log_json(const EpochLog& log);

struct TrainResult {
  CssdaModel model;
  std::vector<EpochLog> logs;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Runs config.epochs epochs of seeded mini-batches. The dataset is used as
// given (labeled fraction is applied by the caller via split_scheme).
TrainResult train_run(const Dataset& dataset, const TrainingConfig& config,
                      const EpochCallback& on_epoch = {});

// Checkpoint: "CSSDACKP", u32 version, u32 dim, u32 H, u32 k, then float32
// tensors in CssdaModel::parameters() order. Version 1 is the conditional
// wiring; version 2 adds u32 wiring and u32 generator-input width after k.
void save_checkpoint(const CssdaModel& model, const std::filesystem::path& path);
CssdaModel load_checkpoint(const std::filesystem::path& path,
                           double leaky_slope = 0.2, double dropout = 0.1);
// ConfigError when the checkpoint's class count disagrees with `k`.
CssdaModel load_checkpoint(const std::filesystem::path& path, std::size_t expected_k,
                           double leaky_slope = 0.2, double dropout = 0.1);

std::string checkpoint_bytes(const CssdaModel& model);
CssdaModel checkpoint_from_bytes(std::string_view bytes, double leaky_slope = 0.2,
                                 double dropout = 0.1);

}  // namespace cssda
