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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cssda/data.hpp"
#include "cssda/evaluation.hpp"
#include "cssda/model.hpp"
#include "cssda/training.hpp"

namespace cssda {

struct Evaluation {
  MetricsReport report;  // per_class_auc and class_names filled in
  std::vector<RocCurve> roc;
  std::vector<std::size_t> predictions;
};

// Predicts every sample of a fully labeled dataset and scores the result.
Evaluation evaluate_model(const CssdaModel& model, const Dataset& test,
                          InferMode infer = InferMode::generator);

// Fixed train/test pair: 3 clusters in 64-d, separation 10, noise sd 1;
// 500 fully labeled training samples and 600 held-out test samples (200 per
// class) drawn around the same means.
struct SyntheticBenchmark {
  Dataset train;
  Dataset test;
};

SyntheticBenchmark synthetic_benchmark(std::uint64_t data_seed = 7,
                                       std::size_t train_size = 500,
                                       std::size_t test_per_class = 200);

struct RunOutcome {
  Evaluation evaluation;
  std::size_t numeric_error_count = 0;
};

// split_scheme(train, fraction, seed) -> train_run -> evaluate_model.
RunOutcome run_once(const Dataset& fully_labeled_train, const Dataset& test,
                    TrainingConfig config, double labeled_fraction, std::uint64_t seed);

struct ExperimentRow {
  Mode mode = Mode::full;
  double labeled_fraction = 0.5;
  std::size_t seeds = 0;
  // Medians over seeds.
  double balanced_accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f_score = 0.0;
  double min_auc = 0.0;
  std::size_t numeric_error_count = 0;  // summed over seeds
};

ExperimentRow run_experiment(const Dataset& fully_labeled_train, const Dataset& test,
                             TrainingConfig config, double labeled_fraction,
                             std::span<const std::uint64_t> seeds);

std::string experiment_table_csv(std::span<const ExperimentRow> rows);

double median(std::vector<double> values);

}  // namespace cssda
