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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cssda/numerics.hpp"

namespace cssda {

// counts[t][p]: rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  std::size_t k() const { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * k_ + predicted];
  }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts_[truth * k_ + predicted];
  }
  std::uint64_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth,
                          std::span<const std::size_t> predicted, std::size_t k);

struct ClassMetrics {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  // 0/0 occurred and the value was set to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct RocCurve {
  std::vector<double> thresholds;  // descending; first entry is +inf
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::optional<double> auc;  // absent when the class has no positives or no negatives
};

struct MetricsReport {
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f_score = 0.0;
  double balanced_accuracy = 0.0;
  bool zero_division = false;  // any per-class 0/0
  std::vector<std::optional<double>> per_class_auc;
  ConfusionMatrix confusion;
};

// One-vs-rest precision/recall/F per class, unweighted macro means, and
// balanced accuracy as the mean per-class recall. DataError if cm is empty.
MetricsReport macro_metrics(const ConfusionMatrix& cm);

// (TP/(TP+FN) + TN/(TN+FP)) / 2 for the binary case.
double binary_balanced_accuracy(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn,
                                std::uint64_t fp);

// Per-class rank-based AUC (ties count one half) with ROC points at every
// distinct threshold. Each score vector must sum to 1 within 1e-6.
std::vector<RocCurve> roc_auc(std::span<const Vector> scores,
                              std::span<const std::size_t> truth);

enum class ReportFormat { json, csv };

ReportFormat parse_report_format(std::string_view text);

std::string report_json(const MetricsReport& report);
std::string report_csv(const MetricsReport& report);
MetricsReport parse_report_json(std::string_view text);

void emit_report(const MetricsReport& report, const std::filesystem::path& path,
                 ReportFormat format);

}  // namespace cssda
