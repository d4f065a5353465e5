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

#include "cssda/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "cssda/errors.hpp"

namespace cssda {

namespace {

Dataset slice(const Dataset& source, std::size_t begin, std::size_t end) {
  std::vector<Sample> samples(source.samples().begin() + static_cast<std::ptrdiff_t>(begin),
                              source.samples().begin() + static_cast<std::ptrdiff_t>(end));
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].id = i;
  return Dataset(std::move(samples), source.vocab());
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Evaluation evaluate_model(const CssdaModel& model, const Dataset& test, InferMode infer) {
  if (test.size() == 0) throw DataError("evaluation set is empty");
  if (!test.fully_labeled()) throw DataError("evaluation requires every row to be labeled");
  if (test.k() != model.shape().k) {
    throw DataError("model has k=" + std::to_string(model.shape().k) +
                    " but evaluation labels have " + std::to_string(test.k()) + " classes");
  }
  if (test.dim() != model.shape().dim) {
    throw DataError("model dimension " + std::to_string(model.shape().dim) +
                    " does not match evaluation embeddings (" + std::to_string(test.dim()) + ")");
  }
  Evaluation e;
  std::vector<std::size_t> truth;
  std::vector<Vector> scores;
  for (const Sample& s : test.samples()) {
    Prediction p = predict_class(model, s.embedding, infer);
    e.predictions.push_back(p.label);
    truth.push_back(*s.label);
    scores.push_back(std::move(p.probabilities));
  }
  e.report = macro_metrics(confusion(truth, e.predictions, test.k()));
  e.report.class_names = test.vocab().names();
  e.roc = roc_auc(scores, truth);
  for (std::size_t c = 0; c < e.roc.size(); ++c) e.report.per_class_auc[c] = e.roc[c].auc;
  return e;
}

SyntheticBenchmark synthetic_benchmark(std::uint64_t data_seed, std::size_t train_size,
                                       std::size_t test_per_class) {
  SynthConfig cfg;
  cfg.k = 3;
  cfg.dim = 64;
  cfg.separation = 10.0;
  cfg.noise_sd = 1.0;
  cfg.seed = data_seed;
  // Samples are emitted round-robin over classes, so the tail of length
  // k * test_per_class starting at a multiple of k is exactly balanced.
  const std::size_t train_rounded = (train_size + cfg.k - 1) / cfg.k * cfg.k;
  cfg.per_class = train_rounded / cfg.k + test_per_class;
  const Dataset all = synth_clusters(cfg);
  return {slice(all, 0, train_size), slice(all, train_rounded, all.size())};
}

RunOutcome run_once(const Dataset& fully_labeled_train, const Dataset& test,
                    TrainingConfig config, double labeled_fraction, std::uint64_t seed) {
  config.seed = seed;
  config.labeled_fraction = labeled_fraction;
  config.k = fully_labeled_train.k();
  config.dim = fully_labeled_train.dim();
  const Dataset train = split_scheme(fully_labeled_train, labeled_fraction, seed);
  TrainResult trained = train_run(train, config);
  RunOutcome out;
  out.evaluation = evaluate_model(trained.model, test, config.infer);
  for (const auto& log : trained.logs) out.numeric_error_count += log.numeric_error_count;
  return out;
}

ExperimentRow run_experiment(const Dataset& fully_labeled_train, const Dataset& test,
                             TrainingConfig config, double labeled_fraction,
                             std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ArgumentError("run_experiment: at least one seed required");
  std::vector<double> ba, precision, recall, f, min_auc;
  ExperimentRow row;
  row.mode = config.mode;
  row.labeled_fraction = labeled_fraction;
  row.seeds = seeds.size();
  for (const std::uint64_t seed : seeds) {
    const RunOutcome run = run_once(fully_labeled_train, test, config, labeled_fraction, seed);
    const MetricsReport& r = run.evaluation.report;
    ba.push_back(r.balanced_accuracy);
    precision.push_back(r.macro_precision);
    recall.push_back(r.macro_recall);
    f.push_back(r.macro_f_score);
    double lowest = 1.0;
    for (const auto& a : r.per_class_auc) lowest = std::min(lowest, a.value_or(0.0));
    min_auc.push_back(lowest);
    row.numeric_error_count += run.numeric_error_count;
  }
  row.balanced_accuracy = median(ba);
  row.macro_precision = median(precision);
  row.macro_recall = median(recall);
  row.macro_f_score = median(f);
  row.min_auc = median(min_auc);
  return row;
}

std::string experiment_table_csv(std::span<const ExperimentRow> rows) {
  std::string out =
      "mode,labeled_fraction,seeds,balanced_accuracy,macro_precision,macro_recall,"
      "macro_f_score,min_auc,numeric_error_count\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.mode)) + "," + format_number(r.labeled_fraction) + "," +
           std::to_string(r.seeds) + "," + format_number(r.balanced_accuracy) + "," +
           format_number(r.macro_precision) + "," + format_number(r.macro_recall) + "," +
           format_number(r.macro_f_score) + "," + format_number(r.min_auc) + "," +
           std::to_string(r.numeric_error_count) + "\n";
  }
  return out;
}

}  // namespace cssda
