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

#include "cssda/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cssda/data.hpp"
#include "cssda/errors.hpp"
#include "cssda/evaluation.hpp"
#include "cssda/pipeline.hpp"
#include "cssda/training.hpp"

namespace cssda::cli {

namespace {

struct ConfigOverrides {
  std::optional<std::string> config_path;
  std::optional<double> labeled_fraction;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> hidden;
  std::optional<double> lr_d;
  std::optional<double> lr_g;
  std::optional<double> leaky_slope;
  std::optional<double> dropout;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> infer;

  void attach(CLI::App* cmd, bool with_fraction = true) {
    cmd->add_option("--config", config_path, "Flat JSON training config; flags override it");
    if (with_fraction) {
      cmd->add_option("--labeled-fraction", labeled_fraction,
                      "Fraction of training rows that keep their label");
    }
    cmd->add_option("--epochs", epochs);
    cmd->add_option("--batch-size", batch_size);
    cmd->add_option("--hidden", hidden, "Hidden width (0 = embedding dimension)");
    cmd->add_option("--lr-d", lr_d, "Discriminator and label-table learning rate");
    cmd->add_option("--lr-g", lr_g, "Generator learning rate");
    cmd->add_option("--leaky-slope", leaky_slope);
    cmd->add_option("--dropout", dropout, "Generator dropout rate");
    cmd->add_option("--seed", seed);
    cmd->add_option("--infer", infer, "generator | per-label");
  }

  // k and dim stay 0 unless the config file names them; they are checked
  // against the data later.
  TrainingConfig resolve() const {
    TrainingConfig base;
    base.k = 0;
    base.dim = 0;
    TrainingConfig c = config_path ? load_training_config(*config_path, base) : base;
    if (labeled_fraction) c.labeled_fraction = *labeled_fraction;
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (hidden) c.hidden = *hidden;
    if (lr_d) c.lr_d = *lr_d;
    if (lr_g) c.lr_g = *lr_g;
    if (leaky_slope) c.leaky_slope = *leaky_slope;
    if (dropout) c.dropout = *dropout;
    if (seed) c.seed = *seed;
    if (infer) c.infer = parse_infer_mode(*infer);
    TrainingConfig check = c;
    check.k = check.k == 0 ? 1 : check.k;
    check.dim = check.dim == 0 ? 1 : check.dim;
    check.validate();
    return c;
  }
};

// Sets k and dim from the data, rejecting a config that disagrees.
void bind_to_data(TrainingConfig& c, const Dataset& data) {
  if (c.k != 0 && c.k != data.k()) {
    throw ConfigError("config k=" + std::to_string(c.k) + " but labels define " +
                      std::to_string(data.k()) + " classes");
  }
  if (c.dim != 0 && c.dim != data.dim()) {
    throw ConfigError("config dim=" + std::to_string(c.dim) + " but embeddings have dimension " +
                      std::to_string(data.dim()));
  }
  c.k = data.k();
  c.dim = data.dim();
  c.validate();
}

Dataset load_dataset(const std::string& embeddings, const std::string& labels) {
  std::vector<Vector> rows = load_embeddings(embeddings);
  LabelVocab vocab = infer_vocab(labels);
  const LabelMap map = load_labels(labels, vocab);
  return assemble_dataset(std::move(rows), map, std::move(vocab));
}

Dataset apply_fraction(const Dataset& data, double fraction, std::uint64_t seed) {
  if (data.fully_labeled()) return split_scheme(data, fraction, seed);
  if (fraction < 1.0) {
    throw ConfigError("--labeled-fraction below 1 needs a fully labeled labels file");
  }
  return data;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct ExperimentData {
  std::optional<std::string> embeddings;
  std::optional<std::string> labels;
  std::optional<std::string> test_embeddings;
  std::optional<std::string> test_labels;
  bool synthetic = false;
  std::uint64_t data_seed = 7;
  std::size_t seeds = 1;
  std::optional<std::string> out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--embeddings", embeddings, "Training embeddings (CSSDAEMB)");
    cmd->add_option("--labels", labels, "Fully labeled training labels CSV");
    cmd->add_option("--test-embeddings", test_embeddings, "Held-out embeddings (CSSDAEMB)");
    cmd->add_option("--test-labels", test_labels, "Held-out labels CSV");
    cmd->add_flag("--synthetic", synthetic,
                  "Use the built-in 3-cluster synthetic benchmark instead of files");
    cmd->add_option("--data-seed", data_seed, "Seed of the synthetic benchmark");
    cmd->add_option("--seeds", seeds, "Number of training seeds (medians are reported)");
    cmd->add_option("--out", out, "Comparison table CSV (standard output if omitted)");
  }

  SyntheticBenchmark load() const {
    if (synthetic) return synthetic_benchmark(data_seed);
    if (!embeddings || !labels || !test_embeddings || !test_labels) {
      throw ConfigError(
          "give --embeddings, --labels, --test-embeddings and --test-labels, or --synthetic");
    }
    SyntheticBenchmark data{load_dataset(*embeddings, *labels),
                            load_dataset(*test_embeddings, *test_labels)};
    if (!data.train.fully_labeled()) {
      throw DataError("training labels must be complete; the labeled fraction is applied here");
    }
    if (data.train.vocab() != data.test.vocab()) {
      throw DataError("training and test label sets differ");
    }
    return data;
  }
};

int run_rows(const ExperimentData& data, const TrainingConfig& base,
             const std::vector<Mode>& modes, const std::vector<double>& fractions,
             std::ostream& out, std::ostream& err) {
  if (data.seeds == 0) throw ConfigError("--seeds must be at least 1");
  const SyntheticBenchmark bench = data.load();
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < data.seeds; ++i) seeds.push_back(base.seed + i);
  std::vector<ExperimentRow> rows;
  for (const Mode mode : modes) {
    for (const double fraction : fractions) {
      TrainingConfig c = base;
      c.mode = mode;
      bind_to_data(c, bench.train);
      err << "running mode=" << to_string(mode) << " labeled_fraction=" << fraction
          << " seeds=" << seeds.size() << "\n";
      rows.push_back(run_experiment(bench.train, bench.test, c, fraction, seeds));
    }
  }
  const std::string table = experiment_table_csv(rows);
  if (data.out) {
    write_text(*data.out, table);
  } else {
    out << table;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional semi-supervised adversarial augmentation over sentence embeddings",
               "cssda"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth;
  std::string synth_out;
  std::string synth_labels_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic Gaussian-cluster dataset");
  synth_cmd->add_option("--classes", synth.k)->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
  synth_cmd->add_option("--per-class", synth.per_class)->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation)->capture_default_str();
  synth_cmd->add_option("--noise-sd", synth.noise_sd)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Embeddings output (CSSDAEMB)")->required();
  synth_cmd->add_option("--labels-out", synth_labels_out, "Labels CSV output")->required();

  // train
  std::string train_embeddings, train_labels, train_out;
  std::optional<std::string> train_log, train_mode;
  ConfigOverrides train_cfg;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--embeddings", train_embeddings)->required();
  train_cmd->add_option("--labels", train_labels)->required();
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_log,
                        "Epoch log (JSON lines); written to standard output if omitted");
  train_cmd->add_option("--mode", train_mode, "full | non-conditional | naive-loss | no-augment");
  train_cfg.attach(train_cmd);

  // eval
  std::string eval_model, eval_embeddings, eval_labels, eval_report;
  std::string eval_format = "json";
  std::string eval_infer = "generator";
  double eval_slope = 0.2;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled set");
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--embeddings", eval_embeddings)->required();
  eval_cmd->add_option("--labels", eval_labels)->required();
  eval_cmd->add_option("--report", eval_report)->required();
  eval_cmd->add_option("--format", eval_format, "json | csv")->capture_default_str();
  eval_cmd->add_option("--infer", eval_infer, "generator | per-label")->capture_default_str();
  eval_cmd->add_option("--leaky-slope", eval_slope, "Activation slope used in training")
      ->capture_default_str();

  // ablate
  std::string ablate_modes;
  ExperimentData ablate_data;
  ConfigOverrides ablate_cfg;
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare full training against ablation modes");
  ablate_cmd->add_option("--mode", ablate_modes,
                         "Comma list of no-augment, non-conditional, naive-loss")
      ->required();
  ablate_data.attach(ablate_cmd);
  ablate_cfg.attach(ablate_cmd);

  // sweep
  std::string sweep_fractions = "0.25,0.5,0.75";
  std::string sweep_mode = "full";
  ExperimentData sweep_data;
  ConfigOverrides sweep_cfg;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate across labeled fractions");
  sweep_cmd->add_option("--fractions", sweep_fractions)->capture_default_str();
  sweep_cmd->add_option("--mode", sweep_mode)->capture_default_str();
  sweep_data.attach(sweep_cmd);
  sweep_cfg.attach(sweep_cmd, false);

  std::vector<const char*> argv{"cssda"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      const Dataset data = synth_clusters(synth);
      std::vector<Vector> rows;
      for (const auto& s : data.samples()) rows.push_back(s.embedding);
      save_embeddings(synth_out, rows);
      save_labels(synth_labels_out, data);
      err << "wrote " << data.size() << " samples (k=" << data.k() << ", dim=" << data.dim()
          << ")\n";
      return kOk;
    }

    if (train_cmd->parsed()) {
      TrainingConfig cfg = train_cfg.resolve();
      if (train_mode) cfg.mode = parse_mode(*train_mode);
      const Dataset full = load_dataset(train_embeddings, train_labels);
      bind_to_data(cfg, full);
      const Dataset data = apply_fraction(full, cfg.labeled_fraction, cfg.seed);
      err << "training mode=" << to_string(cfg.mode) << " on " << data.size() << " samples ("
          << data.labeled_count() << " labeled), k=" << cfg.k << ", dim=" << cfg.dim << "\n";

      std::ofstream log_file;
      if (train_log) {
        log_file.open(*train_log, std::ios::binary | std::ios::trunc);
        if (!log_file) throw IoError("cannot open " + *train_log + " for writing");
      }
      std::ostream& log_stream = train_log ? static_cast<std::ostream&>(log_file) : out;
      const TrainResult result = train_run(data, cfg, [&](const EpochLog& log) {
        log_stream << epoch_log_json(log) << "\n";
        err << "epoch " << log.epoch << ": d_total=" << log.mean.d_total
            << " g_total=" << log.mean.g_total << " numeric_errors=" << log.numeric_error_count
            << "\n";
      });
      save_checkpoint(result.model, train_out);
      if (!result.logs.empty()) {
        const LossBreakdown& last = result.logs.back().mean;
        out << "final d_supervised=" << last.d_supervised
            << " d_unsupervised=" << last.d_unsupervised << " d_total=" << last.d_total
            << " g_feature_match=" << last.g_feature_match
            << " g_unsupervised=" << last.g_unsupervised << " g_total=" << last.g_total << "\n";
      }
      return kOk;
    }

    if (eval_cmd->parsed()) {
      const ReportFormat format = parse_report_format(eval_format);
      const InferMode infer = parse_infer_mode(eval_infer);
      if (!(eval_slope > 0.0 && eval_slope < 1.0)) {
        throw ArgumentError("--leaky-slope must lie in (0, 1)");
      }
      const CssdaModel model = load_checkpoint(eval_model, eval_slope);
      const Dataset data = load_dataset(eval_embeddings, eval_labels);
      const Evaluation e = evaluate_model(model, data, infer);
      emit_report(e.report, eval_report, format);
      out << "balanced_accuracy=" << e.report.balanced_accuracy
          << " macro_f_score=" << e.report.macro_f_score << "\n";
      return kOk;
    }

    if (ablate_cmd->parsed()) {
      TrainingConfig cfg = ablate_cfg.resolve();
      std::vector<Mode> modes{Mode::full};
      for (const auto& m : split_list(ablate_modes)) {
        const Mode mode = parse_mode(m);
        if (mode == Mode::full) continue;
        modes.push_back(mode);
      }
      return run_rows(ablate_data, cfg, modes, {cfg.labeled_fraction}, out, err);
    }

    if (sweep_cmd->parsed()) {
      TrainingConfig cfg = sweep_cfg.resolve();
      std::vector<double> fractions;
      for (const auto& f : split_list(sweep_fractions)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(f, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != f.size() || !(v > 0.0 && v <= 1.0)) {
          throw ArgumentError("invalid labeled fraction '" + f + "'");
        }
        fractions.push_back(v);
      }
      if (fractions.empty()) throw ArgumentError("--fractions is empty");
      return run_rows(sweep_data, cfg, {parse_mode(sweep_mode)}, fractions, out, err);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  return kUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cssda::cli
