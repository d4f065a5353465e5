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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cssda/data.hpp"
#include "cssda/errors.hpp"
#include "cssda/evaluation.hpp"
#include "cssda/losses.hpp"
#include "cssda/model.hpp"
#include "cssda/pipeline.hpp"
#include "cssda/training.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<cssda::Vector> rows_of(const Matrix& m) {
  if (m.ndim() != 2) throw cssda::ArgumentError("expected a 2-D array");
  const auto r = m.unchecked<2>();
  std::vector<cssda::Vector> rows(static_cast<std::size_t>(r.shape(0)),
                                  cssda::Vector(static_cast<std::size_t>(r.shape(1))));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    for (py::ssize_t j = 0; j < r.shape(1); ++j) rows[i][j] = r(i, j);
  }
  return rows;
}

Matrix matrix_of(const std::vector<cssda::Vector>& rows, std::size_t cols) {
  Matrix m({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(cols)});
  auto w = m.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) w(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::size_t> labels_of(const std::vector<long long>& raw, std::size_t k) {
  std::vector<std::size_t> out;
  for (const long long v : raw) {
    if (v < 0 || static_cast<std::size_t>(v) >= k) throw cssda::ArgumentError("label out of range");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Labels use -1 for unlabeled rows.
cssda::Dataset dataset_of(const Matrix& x, const std::vector<long long>& y, std::size_t k) {
  std::vector<cssda::Vector> rows = rows_of(x);
  if (rows.size() != y.size()) throw cssda::ArgumentError("x and y lengths differ");
  std::vector<cssda::Sample> samples;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::optional<std::size_t> label;
    if (y[i] >= 0) label = static_cast<std::size_t>(y[i]);
    samples.push_back({i, std::move(rows[i]), label});
  }
  return cssda::Dataset(std::move(samples), cssda::LabelVocab::numbered(k));
}

std::pair<Matrix, std::vector<long long>> arrays_of(const cssda::Dataset& d) {
  std::vector<cssda::Vector> rows;
  std::vector<long long> y;
  for (const auto& s : d.samples()) {
    rows.push_back(s.embedding);
    y.push_back(s.label ? static_cast<long long>(*s.label) : -1);
  }
  return {matrix_of(rows, d.dim()), y};
}

py::dict breakdown_dict(const cssda::LossBreakdown& b) {
  return py::dict("d_supervised"_a = b.d_supervised, "d_unsupervised"_a = b.d_unsupervised,
                  "d_total"_a = b.d_total, "g_feature_match"_a = b.g_feature_match,
                  "g_unsupervised"_a = b.g_unsupervised, "g_total"_a = b.g_total);
}

py::dict report_dict(const cssda::MetricsReport& r) {
  py::list per_class;
  for (const auto& m : r.per_class) {
    per_class.append(py::dict("precision"_a = m.precision, "recall"_a = m.recall,
                              "f_score"_a = m.f_score, "tp"_a = m.tp, "fp"_a = m.fp,
                              "fn"_a = m.fn));
  }
  return py::dict("balanced_accuracy"_a = r.balanced_accuracy,
                  "macro_precision"_a = r.macro_precision, "macro_recall"_a = r.macro_recall,
                  "macro_f_score"_a = r.macro_f_score, "per_class"_a = per_class,
                  "auc"_a = r.per_class_auc, "zero_division"_a = r.zero_division);
}

}  // namespace

PYBIND11_MODULE(_cssda, m) {
  m.doc() = "Conditional semi-supervised adversarial augmentation core";

  auto base = py::register_exception<cssda::Error>(m, "CssdaError");
  py::register_exception<cssda::ArgumentError>(m, "ArgumentError", base);
  py::register_exception<cssda::NumericError>(m, "NumericError", base);
  py::register_exception<cssda::FormatError>(m, "FormatError", base);
  py::register_exception<cssda::DataError>(m, "DataError", base);
  py::register_exception<cssda::ConfigError>(m, "ConfigError", base);

  m.def("lse", [](const std::vector<double>& v) { return cssda::lse(v); }, "logits"_a);
  m.def("softplus", &cssda::softplus, "x"_a);
  m.def("fake_probability", [](const std::vector<double>& v) { return cssda::fake_probability(v); },
        "logits"_a);

  m.def("supervised_loss", [](const Matrix& logits, const std::vector<long long>& labels) {
    const auto rows = rows_of(logits);
    const std::size_t k = rows.empty() ? 0 : rows[0].size();
    return cssda::supervised_loss(rows, labels_of(labels, k)).value;
  }, "logits"_a, "labels"_a);
  m.def("d_unsup_derived", [](const Matrix& real, const Matrix& fake) {
    return cssda::d_unsup_derived(rows_of(real), rows_of(fake));
  }, "real_logits"_a, "fake_logits"_a);
  m.def("d_unsup_naive", [](const Matrix& real, const Matrix& fake) {
    return cssda::d_unsup_naive(rows_of(real), rows_of(fake));
  }, "real_logits"_a, "fake_logits"_a);
  m.def("g_unsup_derived", [](const Matrix& fake) { return cssda::g_unsup_derived(rows_of(fake)); },
        "fake_logits"_a);
  m.def("g_unsup_naive", [](const Matrix& fake) { return cssda::g_unsup_naive(rows_of(fake)); },
        "fake_logits"_a);
  m.def("g_feature_match", [](const Matrix& real, const Matrix& fake) {
    return cssda::g_feature_match(rows_of(real), rows_of(fake));
  }, "real_features"_a, "fake_features"_a);

  m.def("synth_clusters", [](std::size_t k, std::size_t dim, std::size_t per_class,
                             double separation, double noise_sd, std::uint64_t seed) {
    return arrays_of(cssda::synth_clusters({k, dim, per_class, separation, noise_sd, seed}));
  }, "k"_a = 3, "dim"_a = 64, "per_class"_a = 200, "separation"_a = 10.0, "noise_sd"_a = 1.0,
     "seed"_a = 7, "Returns (x, y) with x of shape (k * per_class, dim).");
  m.def("synthetic_benchmark", [](std::uint64_t seed) {
    const auto bench = cssda::synthetic_benchmark(seed);
    auto [xtr, ytr] = arrays_of(bench.train);
    auto [xte, yte] = arrays_of(bench.test);
    return py::dict("x_train"_a = xtr, "y_train"_a = ytr, "x_test"_a = xte, "y_test"_a = yte);
  }, "seed"_a = 7);
  m.def("split_scheme", [](const Matrix& x, const std::vector<long long>& y, std::size_t k,
                           double fraction, std::uint64_t seed) {
    return arrays_of(cssda::split_scheme(dataset_of(x, y, k), fraction, seed)).second;
  }, "x"_a, "y"_a, "k"_a, "labeled_fraction"_a, "seed"_a,
     "Returns labels with -1 for rows whose label was stripped.");

  m.def("load_embeddings", [](const std::string& path) {
    const auto rows = cssda::load_embeddings(path);
    return matrix_of(rows, rows.empty() ? 0 : rows[0].size());
  }, "path"_a);
  m.def("save_embeddings", [](const std::string& path, const Matrix& x) {
    cssda::save_embeddings(path, rows_of(x));
  }, "path"_a, "x"_a);

  py::class_<cssda::TrainingConfig>(m, "TrainingConfig")
      .def(py::init<>())
      .def_readwrite("batch_size", &cssda::TrainingConfig::batch_size)
      .def_readwrite("epochs", &cssda::TrainingConfig::epochs)
      .def_readwrite("hidden", &cssda::TrainingConfig::hidden)
      .def_readwrite("labeled_fraction", &cssda::TrainingConfig::labeled_fraction)
      .def_readwrite("lr_d", &cssda::TrainingConfig::lr_d)
      .def_readwrite("lr_g", &cssda::TrainingConfig::lr_g)
      .def_readwrite("leaky_slope", &cssda::TrainingConfig::leaky_slope)
      .def_readwrite("dropout", &cssda::TrainingConfig::dropout)
      .def_readwrite("seed", &cssda::TrainingConfig::seed)
      .def_property("mode", [](const cssda::TrainingConfig& c) { return std::string(cssda::to_string(c.mode)); },
                    [](cssda::TrainingConfig& c, const std::string& s) { c.mode = cssda::parse_mode(s); })
      .def_property("infer", [](const cssda::TrainingConfig& c) { return std::string(cssda::to_string(c.infer)); },
                    [](cssda::TrainingConfig& c, const std::string& s) { c.infer = cssda::parse_infer_mode(s); });

  py::class_<cssda::CssdaModel>(m, "Model")
      .def_property_readonly("dim", [](const cssda::CssdaModel& mdl) { return mdl.shape().dim; })
      .def_property_readonly("hidden", [](const cssda::CssdaModel& mdl) { return mdl.shape().hidden; })
      .def_property_readonly("k", [](const cssda::CssdaModel& mdl) { return mdl.shape().k; })
      .def_property_readonly("wiring", [](const cssda::CssdaModel& mdl) { return std::string(cssda::to_string(mdl.wiring())); })
      .def("predict", [](const cssda::CssdaModel& mdl, const Matrix& x, const std::string& infer) {
        const auto mode = cssda::parse_infer_mode(infer);
        std::vector<long long> labels;
        std::vector<cssda::Vector> probs;
        for (const auto& row : rows_of(x)) {
          auto p = cssda::predict_class(mdl, row, mode);
          labels.push_back(static_cast<long long>(p.label));
          probs.push_back(std::move(p.probabilities));
        }
        return std::make_pair(labels, matrix_of(probs, mdl.shape().k));
      }, "x"_a, "infer"_a = "generator", "Returns (labels, probabilities).")
      .def("save", [](const cssda::CssdaModel& mdl, const std::string& path) {
        cssda::save_checkpoint(mdl, path);
      }, "path"_a);

  m.def("load_checkpoint", [](const std::string& path, double leaky_slope) {
    return cssda::load_checkpoint(path, leaky_slope);
  }, "path"_a, "leaky_slope"_a = 0.2);

  m.def("train", [](const Matrix& x, const std::vector<long long>& y, std::size_t k,
                    cssda::TrainingConfig config) {
    const cssda::Dataset data = dataset_of(x, y, k);
    config.k = k;
    config.dim = data.dim();
    cssda::TrainResult result;
    {
      py::gil_scoped_release release;
      result = cssda::train_run(data, config);
    }
    py::list logs;
    for (const auto& log : result.logs) {
      logs.append(py::dict("epoch"_a = log.epoch, "mean"_a = breakdown_dict(log.mean),
                           "numeric_error_count"_a = log.numeric_error_count,
                           "wall_time"_a = log.wall_time, "steps"_a = log.steps));
    }
    return py::make_tuple(std::move(result.model), logs);
  }, "x"_a, "y"_a, "k"_a, "config"_a = cssda::TrainingConfig(),
     "Train on rows x with labels y (-1 = unlabeled). Returns (model, epoch_logs).");

  m.def("confusion_matrix", [](const std::vector<long long>& truth,
                               const std::vector<long long>& predicted, std::size_t k) {
    const auto cm = cssda::confusion(labels_of(truth, k), labels_of(predicted, k), k);
    py::array_t<std::uint64_t> out({static_cast<py::ssize_t>(k), static_cast<py::ssize_t>(k)});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t p = 0; p < k; ++p) w(t, p) = cm.at(t, p);
    }
    return out;
  }, "truth"_a, "predicted"_a, "k"_a);
  m.def("macro_metrics", [](const std::vector<long long>& truth,
                            const std::vector<long long>& predicted, std::size_t k) {
    return report_dict(cssda::macro_metrics(
        cssda::confusion(labels_of(truth, k), labels_of(predicted, k), k)));
  }, "truth"_a, "predicted"_a, "k"_a);
  m.def("roc_auc", [](const Matrix& scores, const std::vector<long long>& truth) {
    const auto rows = rows_of(scores);
    const std::size_t k = rows.empty() ? 0 : rows[0].size();
    py::list out;
    for (const auto& c : cssda::roc_auc(rows, labels_of(truth, k))) {
      out.append(py::dict("auc"_a = c.auc, "fpr"_a = c.fpr, "tpr"_a = c.tpr,
                          "thresholds"_a = c.thresholds));
    }
    return out;
  }, "scores"_a, "truth"_a);
  m.def("evaluate", [](const cssda::CssdaModel& mdl, const Matrix& x,
                       const std::vector<long long>& y, const std::string& infer) {
    const auto e = cssda::evaluate_model(mdl, dataset_of(x, y, mdl.shape().k),
                                         cssda::parse_infer_mode(infer));
    return report_dict(e.report);
  }, "model"_a, "x"_a, "y"_a, "infer"_a = "generator");
}
