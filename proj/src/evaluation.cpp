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

#include "cssda/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cssda/errors.hpp"

namespace cssda {

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix confusion(std::span<const std::size_t> truth,
                          std::span<const std::size_t> predicted, std::size_t k) {
  if (truth.size() != predicted.size()) throw ArgumentError("confusion: length mismatch");
  if (k == 0) throw ArgumentError("confusion: k must be positive");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= k || predicted[i] >= k) throw ArgumentError("confusion: label out of range");
    ++cm.at(truth[i], predicted[i]);
  }
  return cm;
}

double binary_balanced_accuracy(std::uint64_t tp, std::uint64_t fn, std::uint64_t tn,
                                std::uint64_t fp) {
  if (tp + fn == 0 || tn + fp == 0) {
    throw DataError("balanced accuracy: a class has no samples");
  }
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(tp + fn) +
                static_cast<double>(tn) / static_cast<double>(tn + fp));
}

MetricsReport macro_metrics(const ConfusionMatrix& cm) {
  if (cm.k() == 0 || cm.total() == 0) throw DataError("macro_metrics: empty confusion matrix");
  const std::size_t k = cm.k();
  MetricsReport r;
  r.confusion = cm;
  r.per_class.resize(k);
  double sum_p = 0.0;
  double sum_r = 0.0;
  double sum_f = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics& m = r.per_class[c];
    m.tp = cm.at(c, c);
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      m.fp += cm.at(o, c);
      m.fn += cm.at(c, o);
    }
    if (m.tp + m.fp == 0) {
      m.precision_undefined = true;
    } else {
      m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    }
    if (m.tp + m.fn == 0) {
      m.recall_undefined = true;
    } else {
      m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    }
    if (m.precision + m.recall > 0.0) {
      m.f_score = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    r.zero_division = r.zero_division || m.precision_undefined || m.recall_undefined;
    sum_p += m.precision;
    sum_r += m.recall;
    sum_f += m.f_score;
  }
  const auto kd = static_cast<double>(k);
  r.macro_precision = sum_p / kd;
  r.macro_recall = sum_r / kd;
  r.macro_f_score = sum_f / kd;
  r.balanced_accuracy = r.macro_recall;
  r.per_class_auc.assign(k, std::nullopt);
  return r;
}

std::vector<RocCurve> roc_auc(std::span<const Vector> scores,
                              std::span<const std::size_t> truth) {
  if (scores.size() != truth.size()) throw ArgumentError("roc_auc: length mismatch");
  if (scores.empty()) throw ArgumentError("roc_auc: no samples");
  const std::size_t k = scores[0].size();
  for (const auto& s : scores) {
    if (s.size() != k) throw ArgumentError("roc_auc: ragged score vectors");
    double sum = 0.0;
    for (const double v : s) {
      if (!std::isfinite(v)) throw NumericError("roc_auc: non-finite score");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ArgumentError("roc_auc: scores must sum to 1");
  }
  for (const auto t : truth) {
    if (t >= k) throw ArgumentError("roc_auc: label out of range");
  }

  const std::size_t n = scores.size();
  std::vector<RocCurve> curves(k);
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a][c] > scores[b][c];
    });
    const auto positives = static_cast<std::uint64_t>(
        std::count(truth.begin(), truth.end(), c));
    const std::uint64_t negatives = n - positives;

    RocCurve& curve = curves[c];
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);

    // Walk tie groups from the highest score down. Each group occupies ranks
    // (n - end + 1 .. n - start) in ascending order; its positives get the
    // mid-rank. twice_rank_sum accumulates 2 * rank to stay integral.
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t twice_rank_sum = 0;
    for (std::size_t start = 0; start < n;) {
      std::size_t end = start;
      const double s = scores[order[start]][c];
      std::uint64_t group_pos = 0;
      while (end < n && scores[order[end]][c] == s) {
        if (truth[order[end]] == c) ++group_pos;
        ++end;
      }
      const std::uint64_t lo_rank = n - end + 1;
      const std::uint64_t hi_rank = n - start;
      twice_rank_sum += group_pos * (lo_rank + hi_rank);
      tp += group_pos;
      fp += (end - start) - group_pos;
      curve.thresholds.push_back(s);
      curve.fpr.push_back(negatives ? static_cast<double>(fp) / static_cast<double>(negatives) : 0.0);
      curve.tpr.push_back(positives ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0);
      start = end;
    }
    if (positives > 0 && negatives > 0) {
      // Mann-Whitney: AUC = (R+ - P(P+1)/2) / (P N).
      const std::uint64_t numerator = twice_rank_sum - positives * (positives + 1);
      curve.auc = static_cast<double>(numerator) /
                  (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
    }
  }
  return curves;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  throw ArgumentError("unknown report format '" + std::string(text) + "'");
}

namespace {

std::string class_name(const MetricsReport& r, std::size_t c) {
  return c < r.class_names.size() ? r.class_names[c] : std::to_string(c);
}

std::string csv_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string report_json(const MetricsReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["balanced_accuracy"] = r.balanced_accuracy;
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f_score"] = r.macro_f_score;
  ordered_json per_class = ordered_json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassMetrics& m = r.per_class[c];
    ordered_json e;
    e["class"] = class_name(r, c);
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["f_score"] = m.f_score;
    e["tp"] = m.tp;
    e["fp"] = m.fp;
    e["fn"] = m.fn;
    e["precision_undefined"] = m.precision_undefined;
    e["recall_undefined"] = m.recall_undefined;
    per_class.push_back(std::move(e));
  }
  j["per_class"] = std::move(per_class);
  ordered_json auc = ordered_json::array();
  for (const auto& a : r.per_class_auc) auc.push_back(a ? ordered_json(*a) : ordered_json());
  j["auc"] = std::move(auc);
  ordered_json rows = ordered_json::array();
  for (std::size_t t = 0; t < r.confusion.k(); ++t) {
    ordered_json row = ordered_json::array();
    for (std::size_t p = 0; p < r.confusion.k(); ++p) row.push_back(r.confusion.at(t, p));
    rows.push_back(std::move(row));
  }
  j["confusion"] = std::move(rows);
  j["zero_division"] = r.zero_division;
  return j.dump(2) + "\n";
}

MetricsReport parse_report_json(std::string_view text) {
  MetricsReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
    r.macro_precision = j.at("macro_precision").get<double>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f_score = j.at("macro_f_score").get<double>();
    r.zero_division = j.value("zero_division", false);
    for (const auto& e : j.at("per_class")) {
      ClassMetrics m;
      m.precision = e.at("precision").get<double>();
      m.recall = e.at("recall").get<double>();
      m.f_score = e.at("f_score").get<double>();
      m.tp = e.at("tp").get<std::uint64_t>();
      m.fp = e.at("fp").get<std::uint64_t>();
      m.fn = e.at("fn").get<std::uint64_t>();
      m.precision_undefined = e.at("precision_undefined").get<bool>();
      m.recall_undefined = e.at("recall_undefined").get<bool>();
      r.class_names.push_back(e.at("class").get<std::string>());
      r.per_class.push_back(m);
    }
    for (const auto& a : j.at("auc")) {
      r.per_class_auc.push_back(a.is_null() ? std::nullopt : std::optional<double>(a.get<double>()));
    }
    const auto& rows = j.at("confusion");
    r.confusion = ConfusionMatrix(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != rows.size()) throw FormatError("report: confusion matrix is not square");
      for (std::size_t p = 0; p < rows.size(); ++p) r.confusion.at(t, p) = rows[t][p].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return r;
}

std::string report_csv(const MetricsReport& r) {
  std::string out = "class,precision,recall,f_score,auc\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassMetrics& m = r.per_class[c];
    const auto& auc = c < r.per_class_auc.size() ? r.per_class_auc[c] : std::nullopt;
    out += class_name(r, c) + "," + csv_number(m.precision) + "," + csv_number(m.recall) + "," +
           csv_number(m.f_score) + "," + (auc ? csv_number(*auc) : "") + "\n";
  }
  out += "macro," + csv_number(r.macro_precision) + "," + csv_number(r.macro_recall) + "," +
         csv_number(r.macro_f_score) + ",\n";
  return out;
}

void emit_report(const MetricsReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  const std::string text = format == ReportFormat::json ? report_json(report) : report_csv(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cssda
