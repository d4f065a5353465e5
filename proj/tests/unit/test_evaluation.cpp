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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "cssda/errors.hpp"
#include "cssda/evaluation.hpp"
#include "cssda/pipeline.hpp"
#include "oracles.hpp"

using namespace cssda;

namespace {

using Labels = std::vector<std::size_t>;

ConfusionMatrix matrix_of(std::size_t k, std::initializer_list<std::uint64_t> counts) {
  ConfusionMatrix cm(k);
  std::size_t i = 0;
  for (const auto c : counts) {
    cm.at(i / k, i % k) = c;
    ++i;
  }
  return cm;
}

std::vector<Vector> random_probabilities(Rng& rng, std::size_t n, std::size_t k, bool coarse) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector s(k);
    // Coarse scores produce many exact ties.
    for (auto& v : s) v = coarse ? static_cast<double>(rng.below(4)) : rng.uniform(-3, 3);
    out.push_back(softmax(s));
  }
  return out;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("confusion matrix counting") {
  const Labels t = {0, 1, 2, 2, 1, 0};
  CHECK(confusion(t, t, 3) == matrix_of(3, {2, 0, 0, 0, 2, 0, 0, 0, 2}));
  const Labels zeros(6, 0);
  CHECK(confusion(t, zeros, 3) == matrix_of(3, {2, 0, 0, 2, 0, 0, 2, 0, 0}));
  const Labels p = {0, 2, 2, 1, 1, 1};
  // Hand-counted: (0,0) (1,2) (2,2) (2,1) (1,1) (0,1).
  CHECK(confusion(t, p, 3) == matrix_of(3, {1, 1, 0, 0, 1, 1, 0, 1, 1}));
  CHECK(confusion(t, p, 3).total() == 6);
  CHECK_THROWS_AS(confusion(t, Labels{0}, 3), ArgumentError);
  CHECK_THROWS_AS(confusion(Labels{3}, Labels{0}, 3), ArgumentError);
}

TEST_CASE("perfect predictions score one everywhere") {
  const MetricsReport r = macro_metrics(matrix_of(3, {4, 0, 0, 0, 5, 0, 0, 0, 6}));
  CHECK(r.balanced_accuracy == 1.0);
  CHECK(r.macro_precision == 1.0);
  CHECK(r.macro_recall == 1.0);
  CHECK(r.macro_f_score == 1.0);
  CHECK_FALSE(r.zero_division);
}

TEST_CASE("binary balanced accuracy") {
  CHECK(binary_balanced_accuracy(8, 2, 5, 5) == 0.65);
  // Same counts as a two-class confusion matrix: rows are truth (positive, negative).
  CHECK(macro_metrics(matrix_of(2, {8, 2, 5, 5})).balanced_accuracy == 0.65);
}

TEST_CASE("three-class matrix against hand-computed values") {
  const MetricsReport r = macro_metrics(matrix_of(3, {5, 1, 0, 2, 3, 0, 0, 0, 4}));
  CHECK(r.per_class[0].tp == 5);
  CHECK(r.per_class[0].fp == 2);
  CHECK(r.per_class[0].fn == 1);
  CHECK(r.per_class[0].precision == 5.0 / 7.0);
  CHECK(r.per_class[0].recall == 5.0 / 6.0);
  CHECK(r.per_class[1].precision == 3.0 / 4.0);
  CHECK(r.per_class[1].recall == 3.0 / 5.0);
  CHECK(r.per_class[2].precision == 1.0);
  CHECK(r.per_class[2].recall == 1.0);
  const double f0 = 2 * (5.0 / 7) * (5.0 / 6) / (5.0 / 7 + 5.0 / 6);
  CHECK(r.per_class[0].f_score == doctest::Approx(f0).epsilon(1e-15));
  CHECK(r.balanced_accuracy == doctest::Approx((5.0 / 6 + 3.0 / 5 + 1.0) / 3).epsilon(1e-15));
  CHECK(r.balanced_accuracy == r.macro_recall);
}

TEST_CASE("macro metrics equal the brute-force oracle exactly") {
  Rng rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + rng.below(6);
    const std::size_t n = 1 + rng.below(60);
    Labels t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.below(k);
      p[i] = rng.bernoulli(0.5) ? t[i] : rng.below(k);
    }
    const MetricsReport r = macro_metrics(confusion(t, p, k));
    const oracle::BruteMetrics b = oracle::brute_metrics(t, p, k);
    for (std::size_t c = 0; c < k; ++c) {
      const oracle::ClassCounts n_c = oracle::count_class(t, p, c);
      CHECK(r.per_class[c].tp == n_c.tp);
      CHECK(r.per_class[c].fp == n_c.fp);
      CHECK(r.per_class[c].fn == n_c.fn);
      CHECK(r.per_class[c].precision == b.precision[c]);
      CHECK(r.per_class[c].recall == b.recall[c]);
      CHECK(r.per_class[c].f_score == b.f_score[c]);
    }
    CHECK(r.macro_precision == b.macro_precision);
    CHECK(r.macro_recall == b.macro_recall);
    CHECK(r.macro_f_score == b.macro_f);
  }
}

TEST_CASE("zero divisions are flagged and F is zero without true positives") {
  const MetricsReport r = macro_metrics(matrix_of(3, {3, 0, 0, 2, 0, 0, 0, 0, 0}));
  CHECK(r.zero_division);
  CHECK(r.per_class[1].precision_undefined);
  CHECK(r.per_class[1].precision == 0.0);
  CHECK(r.per_class[1].f_score == 0.0);
  CHECK(r.per_class[2].recall_undefined);
  CHECK(r.per_class[2].f_score == 0.0);
  CHECK_THROWS_AS(macro_metrics(ConfusionMatrix(3)), DataError);
}

TEST_CASE("balanced accuracy ignores class prevalence") {
  Rng rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 3;
    Labels t, p;
    for (std::size_t i = 0; i < 40; ++i) {
      t.push_back(i % k);
      p.push_back(rng.below(k));
    }
    const double base = macro_metrics(confusion(t, p, k)).balanced_accuracy;
    Labels t2 = t, p2 = p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == 1) {
        t2.push_back(t[i]);
        p2.push_back(p[i]);
      }
    }
    CHECK(macro_metrics(confusion(t2, p2, k)).balanced_accuracy == doctest::Approx(base).epsilon(1e-15));
  }
}

TEST_CASE("roc auc fixed cases") {
  const std::vector<Vector> sep = {{0.1, 0.9}, {0.2, 0.8}, {0.9, 0.1}, {0.8, 0.2}};
  const Labels t = {1, 1, 0, 0};
  const auto curves = roc_auc(sep, t);
  CHECK(curves[1].auc == 1.0);
  CHECK(curves[0].auc == 1.0);
  CHECK(curves[1].thresholds.front() == std::numeric_limits<double>::infinity());
  CHECK(curves[1].fpr.front() == 0.0);
  CHECK(curves[1].tpr.front() == 0.0);
  CHECK(curves[1].fpr.back() == 1.0);
  CHECK(curves[1].tpr.back() == 1.0);

  const std::vector<Vector> flat(4, Vector{0.5, 0.5});
  CHECK(roc_auc(flat, t)[1].auc == 0.5);

  const std::vector<Vector> mixed = {{0.3, 0.7}, {0.6, 0.4}, {0.6, 0.4}, {0.2, 0.8}, {0.9, 0.1}};
  const Labels tm = {1, 1, 0, 0, 0};
  // Positive scores {0.7, 0.4}, negatives {0.4, 0.8, 0.1}: wins 2 + 1, one tie.
  CHECK(*roc_auc(mixed, tm)[1].auc == 3.5 / 6.0);
  CHECK(roc_auc(mixed, tm)[1].auc == oracle::pairwise_auc(mixed, tm, 1));
}

TEST_CASE("roc auc equals exhaustive pairwise counting") {
  Rng rng(53);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + rng.below(4);
    const std::size_t n = 2 + rng.below(40);
    const auto scores = random_probabilities(rng, n, k, trial % 2 == 0);
    Labels t(n);
    for (auto& v : t) v = rng.below(k);
    const auto curves = roc_auc(scores, t);
    for (std::size_t c = 0; c < k; ++c) {
      CHECK(curves[c].auc == oracle::pairwise_auc(scores, t, c));
      CHECK(curves[c].fpr.size() == curves[c].thresholds.size());
      for (std::size_t i = 1; i < curves[c].fpr.size(); ++i) {
        CHECK(curves[c].fpr[i] >= curves[c].fpr[i - 1]);
        CHECK(curves[c].tpr[i] >= curves[c].tpr[i - 1]);
        CHECK(curves[c].thresholds[i] < curves[c].thresholds[i - 1]);
      }
    }
  }
}

TEST_CASE("roc auc is invariant under a monotone transform of the scores") {
  Rng rng(54);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scores = random_probabilities(rng, 30, 3, false);
    Labels t(30);
    for (auto& v : t) v = rng.below(3);
    // Cubing the class-c column preserves its order; renormalising is not needed
    // for ranking, so feed each class through its own transformed copy.
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<Vector> transformed;
      for (const auto& s : scores) {
        Vector u(3);
        u[c] = std::pow(s[c], 3.0) / 2.0;
        const double rest = (1.0 - u[c]) / 2.0;
        for (std::size_t j = 0; j < 3; ++j) if (j != c) u[j] = rest;
        transformed.push_back(u);
      }
      CHECK(roc_auc(transformed, t)[c].auc == roc_auc(scores, t)[c].auc);
    }
  }
}

TEST_CASE("roc auc flags absent classes and validates input") {
  const std::vector<Vector> s = {{0.6, 0.4, 0.0}, {0.3, 0.7, 0.0}};
  const Labels t = {0, 1};
  const auto curves = roc_auc(s, t);
  CHECK(curves[0].auc.has_value());
  CHECK_FALSE(curves[2].auc.has_value());
  CHECK_THROWS_AS(roc_auc(std::vector<Vector>{{0.6, 0.6}}, Labels{0}), ArgumentError);
  CHECK_THROWS_AS(roc_auc(s, Labels{0}), ArgumentError);
  CHECK_THROWS_AS(roc_auc(std::vector<Vector>{}, Labels{}), ArgumentError);
}

TEST_CASE("report JSON round trip and key order") {
  MetricsReport r = macro_metrics(matrix_of(3, {5, 1, 0, 2, 3, 0, 0, 0, 4}));
  r.class_names = {"spam", "promo", "normal"};
  r.per_class_auc = {0.875, std::nullopt, 1.0 / 3.0};
  const std::string json = report_json(r);
  const auto j = nlohmann::ordered_json::parse(json);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"balanced_accuracy", "macro_precision", "macro_recall",
                                         "macro_f_score", "per_class", "auc", "confusion",
                                         "zero_division"});
  CHECK(j["auc"][1].is_null());
  CHECK(j["per_class"][0]["class"] == "spam");

  const MetricsReport back = parse_report_json(json);
  CHECK(back.balanced_accuracy == r.balanced_accuracy);
  CHECK(back.macro_precision == r.macro_precision);
  CHECK(back.macro_f_score == r.macro_f_score);
  CHECK(back.per_class_auc == r.per_class_auc);
  CHECK(back.confusion == r.confusion);
  CHECK(back.class_names == r.class_names);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(back.per_class[c].precision == r.per_class[c].precision);
    CHECK(back.per_class[c].recall == r.per_class[c].recall);
    CHECK(back.per_class[c].f_score == r.per_class[c].f_score);
    CHECK(back.per_class[c].tp == r.per_class[c].tp);
  }
  CHECK(report_json(back) == json);
  CHECK_THROWS_AS(parse_report_json("{\"balanced_accuracy\": 1}"), FormatError);
}

TEST_CASE("report CSV layout") {
  MetricsReport r = macro_metrics(matrix_of(2, {8, 2, 5, 5}));
  r.class_names = {"pos", "neg"};
  r.per_class_auc = {0.5, 0.5};
  std::istringstream in(report_csv(r));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "class,precision,recall,f_score,auc");
  CHECK(lines[1].rfind("pos,", 0) == 0);
  CHECK(lines[3].rfind("macro,", 0) == 0);
  const std::string recall_field = lines[1].substr(lines[1].find(',', 4) + 1);
  CHECK(std::stod(recall_field.substr(0, recall_field.find(','))) == r.per_class[0].recall);
  CHECK(parse_report_format("csv") == ReportFormat::csv);
  CHECK_THROWS_AS(parse_report_format("xml"), ArgumentError);
}

TEST_CASE("emit_report writes the selected format") {
  oracle::TempDir dir;
  MetricsReport r = macro_metrics(matrix_of(2, {1, 0, 0, 1}));
  r.class_names = {"a", "b"};
  r.per_class_auc = {1.0, 1.0};
  emit_report(r, dir / "r.json", ReportFormat::json);
  emit_report(r, dir / "r.csv", ReportFormat::csv);
  CHECK(oracle::read_bytes(dir / "r.json") == report_json(r));
  CHECK(oracle::read_bytes(dir / "r.csv") == report_csv(r));
  CHECK_THROWS_AS(emit_report(r, dir / "no/such/dir/r.json", ReportFormat::json), DataError);
}

TEST_CASE("evaluate_model requires a labeled, shape-compatible test set") {
  TrainingConfig c;
  c.dim = 8;
  c.hidden = 4;
  c.epochs = 1;
  c.batch_size = 8;
  const Dataset train = synth_clusters({3, 8, 10, 10.0, 1.0, 1});
  const TrainResult r = train_run(train, c);
  const Evaluation e = evaluate_model(r.model, train);
  CHECK(e.predictions.size() == 30);
  CHECK(e.report.confusion.total() == 30);
  CHECK(e.report.class_names == train.vocab().names());
  CHECK(e.roc.size() == 3);
  CHECK_THROWS_AS(evaluate_model(r.model, split_scheme(train, 0.5, 1)), DataError);
  CHECK_THROWS_AS(evaluate_model(r.model, synth_clusters({4, 8, 5, 10.0, 1.0, 1})), DataError);
  CHECK_THROWS_AS(evaluate_model(r.model, synth_clusters({3, 9, 5, 10.0, 1.0, 1})), DataError);
}

TEST_CASE("synthetic benchmark layout") {
  const SyntheticBenchmark b = synthetic_benchmark();
  CHECK(b.train.size() == 500);
  CHECK(b.test.size() == 600);
  CHECK(b.train.fully_labeled());
  std::vector<std::size_t> per_class(3, 0);
  for (const auto& s : b.test.samples()) ++per_class[*s.label];
  CHECK(per_class == std::vector<std::size_t>{200, 200, 200});
  CHECK(split_scheme(b.train, 0.1, 1).labeled_count() == 50);
}

TEST_CASE("median and experiment table") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK_THROWS_AS(median({}), ArgumentError);
  ExperimentRow row;
  row.mode = Mode::naive_loss;
  row.labeled_fraction = 0.25;
  row.seeds = 5;
  row.numeric_error_count = 3;
  const std::string csv = experiment_table_csv(std::vector<ExperimentRow>{row});
  CHECK(csv.rfind("mode,labeled_fraction,seeds,balanced_accuracy,macro_precision,macro_recall,"
                  "macro_f_score,min_auc,numeric_error_count\n", 0) == 0);
  CHECK(csv.find("naive-loss,0.25,5,") != std::string::npos);
  CHECK(csv.substr(csv.size() - 2) == "3\n");
}

}  // TEST_SUITE
