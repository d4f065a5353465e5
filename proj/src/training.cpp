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

#include "cssda/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "cssda/errors.hpp"

namespace cssda {

namespace {

constexpr std::size_t kGeneratorParams = 4;  // leading entries of parameters()
constexpr std::size_t kTableParam = 8;

bool has_fake_side(const CssdaModel& model) {
  return model.wiring() != Wiring::classifier_only;
}

Vector real_input(const CssdaModel& model, const StepInputs& in, std::size_t i) {
  if (model.wiring() == Wiring::conditional) {
    return form_real_latent(in.labeled_h[i], in.labels[i], model.table).values;
  }
  return in.labeled_h[i];
}

const DropoutMask* mask_for(const StepInputs& in, std::size_t j) {
  return in.masks.empty() ? nullptr : &in.masks[j];
}

struct FakeForward {
  GeneratorTrace generator;
  DiscriminatorTrace discriminator;
};

FakeForward fake_forward(const CssdaModel& model, const StepInputs& in, std::size_t j) {
  FakeForward f;
  f.generator = generator_trace(model.generator, in.generator_inputs[j], mask_for(in, j));
  if (model.wiring() == Wiring::conditional) {
    const LatentVariable v = form_fake_latent(in.unlabeled_h[j], f.generator.output);
    f.discriminator = discriminator_trace(model.discriminator, v.values);
  } else {
    f.discriminator = discriminator_trace(model.discriminator, f.generator.output);
  }
  return f;
}

void check_inputs(const StepInputs& in) {
  if (in.labeled_h.size() != in.labels.size() ||
      in.generator_inputs.size() != in.unlabeled_h.size() ||
      (!in.masks.empty() && in.masks.size() != in.unlabeled_h.size())) {
    throw ArgumentError("StepInputs: inconsistent sizes");
  }
}

void add_scaled(Vector& dst, const Vector& src, double w) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::full: return "full";
    case Mode::non_conditional: return "non-conditional";
    case Mode::naive_loss: return "naive-loss";
    case Mode::no_augment: return "no-augment";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  if (text == "full") return Mode::full;
  if (text == "non-conditional") return Mode::non_conditional;
  if (text == "naive-loss") return Mode::naive_loss;
  if (text == "no-augment") return Mode::no_augment;
  throw ArgumentError("unknown mode '" + std::string(text) + "'");
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (k < 1) fail("k must be positive");
  if (dim < 1) fail("dim must be positive");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    fail("labeled_fraction must lie in (0, 1]");
  }
  if (!(lr_d > 0.0) || !std::isfinite(lr_d)) fail("lr_d must be positive");
  if (!(lr_g > 0.0) || !std::isfinite(lr_g)) fail("lr_g must be positive");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) fail("leaky_slope must lie in (0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
}

TrainingConfig parse_training_config(std::string_view json_text, TrainingConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  TrainingConfig c = base;
  for (const auto& [key, value] : j.items()) {
    auto size_field = [&](std::size_t& field) {
      if (!value.is_number_unsigned()) throw ConfigError("config: " + key + " must be a non-negative integer");
      field = value.get<std::size_t>();
    };
    auto real_field = [&](double& field) {
      if (!value.is_number()) throw ConfigError("config: " + key + " must be a number");
      field = value.get<double>();
    };
    try {
      if (key == "batch_size") size_field(c.batch_size);
      else if (key == "epochs") size_field(c.epochs);
      else if (key == "k") size_field(c.k);
      else if (key == "dim") size_field(c.dim);
      else if (key == "hidden") size_field(c.hidden);
      else if (key == "labeled_fraction") real_field(c.labeled_fraction);
      else if (key == "lr_d") real_field(c.lr_d);
      else if (key == "lr_g") real_field(c.lr_g);
      else if (key == "leaky_slope") real_field(c.leaky_slope);
      else if (key == "dropout") real_field(c.dropout);
      else if (key == "seed") {
        if (!value.is_number_unsigned()) throw ConfigError("config: seed must be a non-negative integer");
        c.seed = value.get<std::uint64_t>();
      } else if (key == "mode") {
        if (!value.is_string()) throw ConfigError("config: mode must be a string");
        c.mode = parse_mode(value.get<std::string>());
      } else if (key == "infer") {
        if (!value.is_string()) throw ConfigError("config: infer must be a string");
        c.infer = parse_infer_mode(value.get<std::string>());
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  return c;
}

TrainingConfig load_training_config(const std::filesystem::path& path, TrainingConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_training_config(text, base);
}

ModeWiring ablation_mode_behavior(Mode mode) {
  ModeWiring w;
  w.mode = mode;
  switch (mode) {
    case Mode::full:
      w.description =
          "conditional latents: v_real = h * table[label], v_fake = h * G(h); "
          "derived unsupervised losses";
      break;
    case Mode::naive_loss:
      w.loss_form = LossForm::naive;
      w.description =
          "conditional latents as in full mode; unsupervised losses evaluated "
          "from Z = sum(exp(l)) without log-sum-exp";
      break;
    case Mode::non_conditional:
      w.wiring = Wiring::non_conditional;
      w.uses_label_table = false;
      w.description =
          "generator maps 100-d noise to a fake feature vector; real side is h; "
          "no label table";
      break;
    case Mode::no_augment:
      w.wiring = Wiring::classifier_only;
      w.uses_generator = false;
      w.uses_label_table = false;
      w.uses_unlabeled = false;
      w.description = "discriminator-shaped MLP trained with supervised loss on labeled h only";
      break;
  }
  return w;
}

ModelShape model_shape_for(const TrainingConfig& config) {
  ModelShape shape;
  shape.dim = config.dim;
  shape.hidden = config.hidden_width();
  shape.k = config.k;
  shape.generator_input =
      ablation_mode_behavior(config.mode).wiring == Wiring::non_conditional ? kNoiseDim
                                                                            : config.dim;
  return shape;
}

double weighted_d_loss(const LossBreakdown& b, const LossWeights& w) {
  return w.supervised * b.d_supervised + w.d_unsup * b.d_unsupervised;
}

double weighted_g_loss(const LossBreakdown& b, const LossWeights& w) {
  return w.g_feature_match * b.g_feature_match + w.g_unsup * b.g_unsupervised;
}

LossBreakdown discriminator_pass(CssdaModel& model, const StepInputs& in, LossForm form,
                                 const LossWeights& weights, bool accumulate) {
  check_inputs(in);
  const bool fake_side = has_fake_side(model);

  std::vector<DiscriminatorTrace> real_traces;
  std::vector<Vector> real_logits;
  for (std::size_t i = 0; i < in.labeled_h.size(); ++i) {
    real_traces.push_back(discriminator_trace(model.discriminator, real_input(model, in, i)));
    real_logits.push_back(real_traces.back().out.logits);
  }
  std::vector<DiscriminatorTrace> fake_traces;
  std::vector<Vector> fake_logits;
  if (fake_side) {
    for (std::size_t j = 0; j < in.unlabeled_h.size(); ++j) {
      fake_traces.push_back(fake_forward(model, in, j).discriminator);
      fake_logits.push_back(fake_traces.back().out.logits);
    }
  }

  LossBreakdown b;
  const SupervisedLoss sup = supervised_loss(real_logits, in.labels);
  b.d_supervised = sup.value;
  b.missing_labeled = sup.empty;
  b.missing_unlabeled = fake_logits.empty();
  if (fake_side) b.d_unsupervised = d_unsup(real_logits, fake_logits, form);
  b.d_total = b.d_supervised + b.d_unsupervised;
  if (!accumulate) return b;

  std::vector<Vector> sup_grad;
  if (!sup.empty) sup_grad = supervised_loss_grad(real_logits, in.labels);
  UnsupGrad unsup_grad;
  if (fake_side) unsup_grad = d_unsup_grad(real_logits, fake_logits, form);

  for (std::size_t i = 0; i < real_traces.size(); ++i) {
    Vector g(model.shape().k, 0.0);
    add_scaled(g, sup_grad[i], weights.supervised);
    if (fake_side) add_scaled(g, unsup_grad.real[i], weights.d_unsup);
    const Vector dv = discriminator_backward(model.discriminator, real_traces[i], g);
    if (model.wiring() == Wiring::conditional) {
      accumulate_table_grad(model.table, in.labels[i], in.labeled_h[i], dv);
    }
  }
  for (std::size_t j = 0; j < fake_traces.size(); ++j) {
    Vector g(model.shape().k, 0.0);
    add_scaled(g, unsup_grad.fake[j], weights.d_unsup);
    discriminator_backward(model.discriminator, fake_traces[j], g);
  }
  return b;
}

LossBreakdown generator_pass(CssdaModel& model, const StepInputs& in, LossForm form,
                             const LossWeights& weights, bool accumulate) {
  check_inputs(in);
  LossBreakdown b;
  b.missing_labeled = in.labeled_h.empty();
  b.missing_unlabeled = in.unlabeled_h.empty();
  if (!has_fake_side(model) || in.unlabeled_h.empty()) return b;

  std::vector<Vector> real_features;
  for (std::size_t i = 0; i < in.labeled_h.size(); ++i) {
    real_features.push_back(
        discriminator_forward(model.discriminator, real_input(model, in, i)).hidden_features);
  }
  std::vector<FakeForward> fakes;
  std::vector<Vector> fake_features;
  std::vector<Vector> fake_logits;
  for (std::size_t j = 0; j < in.unlabeled_h.size(); ++j) {
    fakes.push_back(fake_forward(model, in, j));
    fake_features.push_back(fakes.back().discriminator.out.hidden_features);
    fake_logits.push_back(fakes.back().discriminator.out.logits);
  }

  if (!real_features.empty()) b.g_feature_match = g_feature_match(real_features, fake_features);
  b.g_unsupervised = g_unsup(fake_logits, form);
  b.g_total = b.g_feature_match + b.g_unsupervised;
  if (!accumulate) return b;

  std::vector<Vector> fm_grad;
  if (!real_features.empty()) fm_grad = g_feature_match_grad(real_features, fake_features);
  const std::vector<Vector> gu_grad = g_unsup_grad(fake_logits, form);

  for (std::size_t j = 0; j < fakes.size(); ++j) {
    Vector logits_grad(model.shape().k, 0.0);
    add_scaled(logits_grad, gu_grad[j], weights.g_unsup);
    Vector features_grad(model.shape().hidden, 0.0);
    if (!fm_grad.empty()) add_scaled(features_grad, fm_grad[j], weights.g_feature_match);
    const Vector dv = discriminator_backward(model.discriminator, fakes[j].discriminator,
                                             logits_grad, features_grad);
    const Vector dy = model.wiring() == Wiring::conditional ? hadamard(in.unlabeled_h[j], dv) : dv;
    generator_backward(model.generator, fakes[j].generator, mask_for(in, j), dy);
  }
  return b;
}

Trainer::Trainer(CssdaModel model, const TrainingConfig& config)
    : config_(config),
      wiring_(ablation_mode_behavior(config.mode)),
      model_(std::move(model)),
      rng_(Rng::derive(config.seed, 200)) {
  config_.validate();
  if (model_.wiring() != wiring_.wiring) {
    throw ConfigError("model wiring does not match training mode");
  }
  const auto params = model_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    AdamConfig adam;
    adam.learning_rate = i < kGeneratorParams ? config_.lr_g : config_.lr_d;
    optimizers_.emplace_back(params[i]->size(), adam);
  }
}

StepInputs Trainer::gather(const Dataset& dataset, const Batch& batch) {
  StepInputs in;
  for (const std::size_t idx : batch.indices) {
    const Sample& s = dataset[idx];
    if (s.embedding.size() != model_.shape().dim) {
      throw DataError("sample dimension does not match the model");
    }
    if (s.labeled()) {
      in.labeled_h.push_back(s.embedding);
      in.labels.push_back(*s.label);
    } else if (wiring_.uses_unlabeled) {
      in.unlabeled_h.push_back(s.embedding);
    }
  }
  for (const auto& h : in.unlabeled_h) {
    if (wiring_.wiring == Wiring::non_conditional) {
      Vector z(model_.shape().generator_input);
      for (auto& v : z) v = rng_.normal();
      in.generator_inputs.push_back(std::move(z));
    } else {
      in.generator_inputs.push_back(h);
    }
    if (config_.dropout > 0.0) {
      in.masks.push_back(sample_dropout_mask(model_.shape().hidden, config_.dropout, rng_));
    }
  }
  return in;
}

void Trainer::apply_discriminator_update() {
  const auto params = model_.parameters();
  for (std::size_t i = kGeneratorParams; i < params.size(); ++i) {
    if (i == kTableParam && !wiring_.uses_label_table) continue;
    adam_step(*params[i], optimizers_[i]);
  }
}

void Trainer::apply_generator_update() {
  const auto params = model_.parameters();
  for (std::size_t i = 0; i < kGeneratorParams; ++i) adam_step(*params[i], optimizers_[i]);
}

LossBreakdown Trainer::train_step(const Dataset& dataset, const Batch& batch) {
  const StepInputs in = gather(dataset, batch);
  if (in.labeled_h.empty() && in.unlabeled_h.empty()) {
    throw ConfigError("train_step: batch has no usable samples");
  }
  const LossForm form = wiring_.loss_form;
  LossBreakdown b;
  b.missing_labeled = in.labeled_h.empty();
  b.missing_unlabeled = in.unlabeled_h.empty();

  // The discriminator step needs a labeled sample or a fake side to act on.
  if (!in.labeled_h.empty() || (wiring_.uses_generator && !in.unlabeled_h.empty())) {
    try {
      const LossBreakdown d = discriminator_pass(model_, in, form);
      apply_discriminator_update();
      b.d_supervised = d.d_supervised;
      b.d_unsupervised = d.d_unsupervised;
      b.d_total = d.d_total;
    } catch (const NumericError&) {
      if (form != LossForm::naive) throw;
      ++numeric_errors_;
      b.numeric_error = true;
    }
    model_.zero_grad();
  }

  if (wiring_.uses_generator && !in.unlabeled_h.empty()) {
    try {
      const LossBreakdown g = generator_pass(model_, in, form);
      apply_generator_update();
      b.g_feature_match = g.g_feature_match;
      b.g_unsupervised = g.g_unsupervised;
      b.g_total = g.g_total;
    } catch (const NumericError&) {
      if (form != LossForm::naive) throw;
      ++numeric_errors_;
      b.numeric_error = true;
    }
    model_.zero_grad();
  }
  ++completed_steps_;
  return b;
}

std::string epoch_log_json(const EpochLog& log) {
  nlohmann::ordered_json mean;
  mean["d_supervised"] = log.mean.d_supervised;
  mean["d_unsupervised"] = log.mean.d_unsupervised;
  mean["d_total"] = log.mean.d_total;
  mean["g_feature_match"] = log.mean.g_feature_match;
  mean["g_unsupervised"] = log.mean.g_unsupervised;
  mean["g_total"] = log.mean.g_total;
  nlohmann::ordered_json j;
  j["epoch"] = log.epoch;
  j["mean"] = std::move(mean);
  j["numeric_error_count"] = log.numeric_error_count;
  j["wall_time"] = log.wall_time;
  j["steps"] = log.steps;
  return j.dump();
}

TrainResult train_run(const Dataset& dataset, const TrainingConfig& config,
                      const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.size() == 0 || dataset.labeled_count() == 0) {
    throw ConfigError("training requires at least one labeled sample");
  }
  if (dataset.k() != config.k) {
    throw ConfigError("dataset has " + std::to_string(dataset.k()) +
                      " classes but config.k = " + std::to_string(config.k));
  }
  if (dataset.dim() != config.dim) {
    throw ConfigError("dataset dimension " + std::to_string(dataset.dim()) +
                      " does not match config.dim = " + std::to_string(config.dim));
  }
  const ModeWiring wiring = ablation_mode_behavior(config.mode);
  const Dataset labeled_view = wiring.uses_unlabeled ? Dataset() : dataset.labeled_only();
  const Dataset& data = wiring.uses_unlabeled ? dataset : labeled_view;

  Trainer trainer(CssdaModel::initialize(model_shape_for(config), wiring.wiring,
                                         config.leaky_slope, config.dropout, config.seed),
                  config);
  std::vector<EpochLog> logs;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::size_t errors_before = trainer.numeric_error_count();
    EpochLog log;
    log.epoch = epoch + 1;
    std::size_t counted = 0;
    for (const Batch& batch : epoch_batches(data, config.batch_size, config.seed, epoch)) {
      const LossBreakdown b = trainer.train_step(data, batch);
      ++log.steps;
      if (b.numeric_error) continue;
      ++counted;
      log.mean.d_supervised += b.d_supervised;
      log.mean.d_unsupervised += b.d_unsupervised;
      log.mean.d_total += b.d_total;
      log.mean.g_feature_match += b.g_feature_match;
      log.mean.g_unsupervised += b.g_unsupervised;
      log.mean.g_total += b.g_total;
    }
    if (counted > 0) {
      const auto n = static_cast<double>(counted);
      log.mean.d_supervised /= n;
      log.mean.d_unsupervised /= n;
      log.mean.d_total /= n;
      log.mean.g_feature_match /= n;
      log.mean.g_unsupervised /= n;
      log.mean.g_total /= n;
    }
    log.numeric_error_count = trainer.numeric_error_count() - errors_before;
    log.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (on_epoch) on_epoch(log);
    logs.push_back(log);
  }
  return {std::move(trainer).release(), std::move(logs)};
}

}  // namespace cssda
