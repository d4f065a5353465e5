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

// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cssda/errors.hpp"
#include "cssda/evaluation.hpp"
#include "cssda/losses.hpp"
#include "cssda/pipeline.hpp"
#include "cssda/training.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

using namespace cssda;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

Verdict loss_equivalence() {
  Rng rng(1001);
  double worst = 0.0;
  std::size_t failures = 0;
  for (int batch = 0; batch < 1000; ++batch) {
    const std::size_t k = 2 + rng.below(9);
    const auto real = oracle::uniform_batch(rng, 1 + rng.below(32), k, -30, 30);
    const auto fake = oracle::uniform_batch(rng, 1 + rng.below(32), k, -30, 30);
    const double pairs[2][2] = {{d_unsup_derived(real, fake), d_unsup_naive(real, fake)},
                                {g_unsup_derived(fake), g_unsup_naive(fake)}};
    for (const auto& p : pairs) {
      const double e = std::abs(p[0] - p[1]) / std::max(std::abs(p[0]), std::abs(p[1]));
      worst = std::max(worst, e);
      if (!rel_close(p[0], p[1], 1e-9)) ++failures;
    }
  }
  std::ostringstream s;
  s << "1000 batches, worst relative gap " << worst << ", " << failures << " above 1e-9";
  return {failures == 0, s.str()};
}

Verdict gradient_suite() {
  std::size_t checked = 0, failures = 0;
  double worst = 0.0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& r : oracle::end_to_end_gradients(5000 + seed)) {
      ++checked;
      worst = std::max(worst, r.check.worst_rel);
      if (!r.check.ok) {
        if (failures++ == 0) {
          std::ostringstream f;
          f << "; first failure seed " << 5000 + seed << " " << r.loss << "/" << r.tensor;
          first = f.str();
        }
      }
    }
  }
  std::ostringstream s;
  s << "100 cases, " << checked << " loss/tensor pairs, worst relative error " << worst
    << ", " << failures << " failures" << first;
  return {failures == 0, s.str()};
}

Verdict stability() {
  bool derived_finite = true;
  for (const double m : {1e4, -1e4}) {
    const std::vector<Vector> uniform = {{m, m, m}};
    const std::vector<Vector> mixed = {{m, -m, 0.0}};
    for (const auto* b : {&uniform, &mixed}) {
      derived_finite = derived_finite && std::isfinite(d_unsup_derived(*b, *b)) &&
                       std::isfinite(g_unsup_derived(*b));
      for (const auto& g : d_unsup_grad(*b, *b).real) for (double v : g) derived_finite = derived_finite && std::isfinite(v);
      for (const auto& g : g_unsup_grad(*b)) for (double v : g) derived_finite = derived_finite && std::isfinite(v);
    }
  }
  auto raises = [](double logit) {
    const std::vector<Vector> b = {{logit, 0.0}};
    try {
      d_unsup_naive(b, b);
    } catch (const NumericError&) {
      return true;
    }
    return false;
  };
  const bool below_ok = !raises(700.0);
  const bool at_710 = raises(710.0);
  const bool at_1e4 = raises(1e4);
  std::ostringstream s;
  s << "derived finite at |logit|=1e4: " << (derived_finite ? "yes" : "no")
    << "; naive raises NumericError at 700/710/1e4: " << (below_ok ? "no" : "yes") << "/"
    << (at_710 ? "yes" : "no") << "/" << (at_1e4 ? "yes" : "no");
  return {derived_finite && below_ok && at_710 && at_1e4, s.str()};
}

Verdict metric_oracles() {
  Rng rng(1004);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.below(7);
    const std::size_t n = 2 + rng.below(80);
    std::vector<std::size_t> truth(n), pred(n);
    std::vector<Vector> scores;
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng.below(k);
      pred[i] = rng.bernoulli(0.6) ? truth[i] : rng.below(k);
      Vector raw(k);
      for (auto& v : raw) v = trial % 2 ? rng.uniform(-4, 4) : static_cast<double>(rng.below(3));
      scores.push_back(softmax(raw));
    }
    const MetricsReport r = macro_metrics(confusion(truth, pred, k));
    const oracle::BruteMetrics b = oracle::brute_metrics(truth, pred, k);
    bool same = r.macro_precision == b.macro_precision && r.macro_recall == b.macro_recall &&
                r.macro_f_score == b.macro_f && r.balanced_accuracy == b.macro_recall;
    for (std::size_t c = 0; c < k; ++c) {
      same = same && r.per_class[c].precision == b.precision[c] &&
             r.per_class[c].recall == b.recall[c] && r.per_class[c].f_score == b.f_score[c];
    }
    const auto curves = roc_auc(scores, truth);
    for (std::size_t c = 0; c < k; ++c) same = same && curves[c].auc == oracle::pairwise_auc(scores, truth, c);
    if (!same) ++mismatches;
  }
  const double binary = binary_balanced_accuracy(8, 2, 5, 5);
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 8;
  cm.at(0, 1) = 2;
  cm.at(1, 0) = 5;
  cm.at(1, 1) = 5;
  const double via_matrix = macro_metrics(cm).balanced_accuracy;
  std::ostringstream s;
  s << "500 random cases, " << mismatches << " mismatches; TP=8,FN=2,TN=5,FP=5 -> " << binary
    << " (matrix path " << via_matrix << ")";
  return {mismatches == 0 && binary == 0.65 && via_matrix == 0.65, s.str()};
}

struct Benchmark {
  SyntheticBenchmark data = synthetic_benchmark(7);
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainingConfig config(Mode mode) const {
    TrainingConfig c;
    c.k = 3;
    c.dim = data.train.dim();
    c.mode = mode;
    return c;
  }
};

struct SeedRuns {
  std::vector<double> balanced_accuracy;
  std::vector<double> min_auc;
};

SeedRuns run_seeds(const Benchmark& b, Mode mode, double fraction) {
  SeedRuns r;
  for (const auto seed : b.seeds) {
    const RunOutcome o = run_once(b.data.train, b.data.test, b.config(mode), fraction, seed);
    r.balanced_accuracy.push_back(o.evaluation.report.balanced_accuracy);
    double lo = 1.0;
    for (const auto& a : o.evaluation.report.per_class_auc) lo = std::min(lo, a.value_or(0.0));
    r.min_auc.push_back(lo);
  }
  return r;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream s;
  s.precision(4);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

SeedRuns g_full_runs;

Verdict synthetic_table(const Benchmark& b) {
  const double fraction = 50.0 / 500.0;
  g_full_runs = run_seeds(b, Mode::full, fraction);
  const SeedRuns baseline = run_seeds(b, Mode::no_augment, fraction);
  const double lowest = *std::min_element(g_full_runs.balanced_accuracy.begin(),
                                          g_full_runs.balanced_accuracy.end());
  const double full_median = median(g_full_runs.balanced_accuracy);
  const double base_median = median(baseline.balanced_accuracy);
  std::ostringstream s;
  s << "50 labeled + 450 unlabeled, 600 test; full BA per seed [" << join(g_full_runs.balanced_accuracy)
    << "] median " << full_median << "; no-augment [" << join(baseline.balanced_accuracy)
    << "] median " << base_median;
  return {lowest >= 0.90 && full_median >= base_median - 0.02, s.str()};
}

Verdict ratio_sweep(const Benchmark& b) {
  std::vector<double> medians;
  for (const double f : {0.25, 0.5, 0.75}) {
    medians.push_back(median(run_seeds(b, Mode::full, f).balanced_accuracy));
  }
  bool ok = true;
  for (std::size_t i = 1; i < medians.size(); ++i) ok = ok && medians[i] >= medians[i - 1] - 0.03;
  std::ostringstream s;
  s << "median BA at 0.25/0.5/0.75 = " << join(medians);
  return {ok, s.str()};
}

Verdict per_class_auc() {
  const double lowest = *std::min_element(g_full_runs.min_auc.begin(), g_full_runs.min_auc.end());
  std::ostringstream s;
  s << "lowest per-class AUC over 5 seeds x 3 classes = " << lowest;
  return {!g_full_runs.min_auc.empty() && lowest >= 0.95, s.str()};
}

Verdict determinism(const Benchmark& b) {
  bool ok = true;
  std::ostringstream s;
  for (const Mode mode : {Mode::full, Mode::non_conditional, Mode::naive_loss, Mode::no_augment}) {
    TrainingConfig c = b.config(mode);
    c.seed = 11;
    const Dataset train = split_scheme(b.data.train, 0.25, c.seed);
    const TrainResult x = train_run(train, c);
    const TrainResult y = train_run(train, c);
    const bool same_ckpt = checkpoint_bytes(x.model) == checkpoint_bytes(y.model);
    const bool same_report = report_json(evaluate_model(x.model, b.data.test).report) ==
                             report_json(evaluate_model(y.model, b.data.test).report);
    ok = ok && same_ckpt && same_report;
    s << to_string(mode) << ": checkpoint " << (same_ckpt ? "identical" : "DIFFERS") << ", report "
      << (same_report ? "identical" : "DIFFERS") << (mode == Mode::no_augment ? "" : "; ");
  }
  return {ok, s.str()};
}

struct Criterion {
  const char* name;
  double limit_seconds;  // 0 means no limit
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const Benchmark bench;
  const std::vector<Criterion> criteria = {
      {"loss-equivalence", 5.0, loss_equivalence},
      {"gradient-suite", 30.0, gradient_suite},
      {"overflow-stability", 0.0, stability},
      {"metric-oracles", 0.0, metric_oracles},
      {"synthetic-augmentation-benefit", 120.0, [&] { return synthetic_table(bench); }},
      {"labeled-ratio-sweep", 0.0, [&] { return ratio_sweep(bench); }},
      {"per-class-auc", 0.0, per_class_auc},
      {"determinism", 0.0, [&] { return determinism(bench); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0.0 || seconds < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %s: %s [%.2fs", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), seconds);
    if (c.limit_seconds > 0.0) std::printf(" / limit %.0fs", c.limit_seconds);
    std::printf("]\n");
  }
  return failed == 0 ? 0 : 1;
}
