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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cssda/numerics.hpp"

namespace cssda {

// Class names indexed 0..k-1. Index k is reserved for the generated ("fake")
// class and never appears in data.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(std::vector<std::string> names);

  std::size_t k() const { return names_.size(); }
  std::size_t fake_index() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Names c0..c{k-1}, zero-padded so lexicographic order equals index order.
  static LabelVocab numbered(std::size_t k);

  bool operator==(const LabelVocab&) const = default;

 private:
  std::vector<std::string> names_;
};

struct Sample {
  std::size_t id = 0;
  Vector embedding;
  std::optional<std::size_t> label;  // absent <=> unlabeled

  bool labeled() const { return label.has_value(); }
};

// Immutable collection of samples sharing one embedding dimension.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Sample> samples, LabelVocab vocab);

  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const LabelVocab& vocab() const { return vocab_; }
  std::size_t size() const { return samples_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t k() const { return vocab_.k(); }
  std::size_t labeled_count() const;
  bool fully_labeled() const { return labeled_count() == size(); }

  // Samples with a label, in original order.
  Dataset labeled_only() const;

 private:
  std::vector<Sample> samples_;
  LabelVocab vocab_;
  std::size_t dim_ = 0;
};

using LabelMap = std::map<std::size_t, std::optional<std::size_t>>;

// CSSDAEMB binary format: "CSSDAEMB", u32 version (1), u32 count, u32 dim,
// count*dim float32 values, all little-endian, row-major.
std::vector<Vector> load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path,
                     std::span<const Vector> rows);

// Labels CSV: header "id,label", empty label means unlabeled.
LabelMap load_labels(const std::filesystem::path& path, const LabelVocab& vocab);
void save_labels(const std::filesystem::path& path, const Dataset& dataset);

// Sorted distinct non-empty label strings of a labels CSV.
LabelVocab infer_vocab(const std::filesystem::path& path);

// Pairs embedding row i with label id i; every row needs exactly one label row.
Dataset assemble_dataset(std::vector<Vector> embeddings, const LabelMap& labels,
                         LabelVocab vocab);

// Keeps labels on ceil(fraction * n) samples, stratified by class, and strips
// the rest. The input must be fully labeled.
Dataset split_scheme(const Dataset& dataset, double labeled_fraction,
                     std::uint64_t seed);

struct Batch {
  std::vector<std::size_t> indices;  // positions in Dataset::samples()
};

// One epoch of shuffled mini-batches. Labeled and unlabeled samples are
// spread so every batch carries the global labeled ratio (within one sample).
std::vector<Batch> epoch_batches(const Dataset& dataset, std::size_t batch_size,
                                 std::uint64_t seed, std::size_t epoch);

struct SynthConfig {
  std::size_t k = 3;
  std::size_t dim = 64;
  std::size_t per_class = 200;
  double separation = 10.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 7;
};

// k isotropic Gaussian clusters whose means are pairwise at least
// `separation` apart. Fully labeled, deterministic per seed.
Dataset synth_clusters(const SynthConfig& config);

// Cluster means used by synth_clusters for the same config.
std::vector<Vector> synth_cluster_means(const SynthConfig& config);

}  // namespace cssda
