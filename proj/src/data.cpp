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

#include "cssda/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "cssda/errors.hpp"
#include "cssda/rng.hpp"

namespace cssda {

namespace {

constexpr std::array<char, 8> kEmbeddingMagic = {'C', 'S', 'S', 'D',
                                                 'A', 'E', 'M', 'B'};
constexpr std::uint32_t kEmbeddingVersion = 1;
constexpr std::size_t kEmbeddingHeaderBytes = 8 + 3 * 4;

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

struct CsvRow {
  std::size_t id;
  std::string label;
};

// Parsed, header-checked rows of a labels CSV. Blank trailing lines are
// ignored; anything else malformed raises FormatError.
std::vector<CsvRow> read_label_rows(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != "id,label") {
    throw FormatError(path.string() + ": expected header 'id,label'");
  }
  std::vector<CsvRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(n + 1) +
                        ": expected exactly two fields");
    }
    std::size_t id = 0;
    const char* first = line.data();
    const char* last = line.data() + comma;
    const auto [ptr, ec] = std::from_chars(first, last, id);
    if (comma == 0 || ec != std::errc() || ptr != last) {
      throw FormatError(path.string() + ":" + std::to_string(n + 1) +
                        ": malformed id");
    }
    rows.push_back({id, line.substr(comma + 1)});
  }
  return rows;
}

}  // namespace

LabelVocab::LabelVocab(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ArgumentError("LabelVocab: at least one class required");
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty() || name.find_first_of(",\n\r") != std::string::npos) {
      throw ArgumentError("LabelVocab: invalid class name '" + name + "'");
    }
    if (!seen.insert(name).second) {
      throw ArgumentError("LabelVocab: duplicate class name '" + name + "'");
    }
  }
}

std::optional<std::size_t> LabelVocab::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

LabelVocab LabelVocab::numbered(std::size_t k) {
  const std::size_t width = k <= 1 ? 1 : std::to_string(k - 1).size();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) {
    std::string digits = std::to_string(i);
    names.push_back("c" + std::string(width - digits.size(), '0') + digits);
  }
  return LabelVocab(std::move(names));
}

Dataset::Dataset(std::vector<Sample> samples, LabelVocab vocab)
    : samples_(std::move(samples)), vocab_(std::move(vocab)) {
  std::set<std::size_t> ids;
  for (const auto& s : samples_) {
    if (dim_ == 0) dim_ = s.embedding.size();
    if (s.embedding.empty() || s.embedding.size() != dim_) {
      throw DataError("Dataset: inconsistent embedding dimension at id " +
                      std::to_string(s.id));
    }
    if (!std::all_of(s.embedding.begin(), s.embedding.end(),
                     [](double v) { return std::isfinite(v); })) {
      throw DataError("Dataset: non-finite embedding at id " + std::to_string(s.id));
    }
    if (s.label && *s.label >= vocab_.k()) {
      throw DataError("Dataset: label out of range at id " + std::to_string(s.id));
    }
    if (!ids.insert(s.id).second) {
      throw DataError("Dataset: duplicate id " + std::to_string(s.id));
    }
  }
}

std::size_t Dataset::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(
      samples_.begin(), samples_.end(), [](const Sample& s) { return s.labeled(); }));
}

Dataset Dataset::labeled_only() const {
  std::vector<Sample> kept;
  std::copy_if(samples_.begin(), samples_.end(), std::back_inserter(kept),
               [](const Sample& s) { return s.labeled(); });
  return Dataset(std::move(kept), vocab_);
}

std::vector<Vector> load_embeddings(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kEmbeddingHeaderBytes) {
    throw FormatError(path.string() + ": too short for a CSSDAEMB header");
  }
  if (!std::equal(kEmbeddingMagic.begin(), kEmbeddingMagic.end(), bytes.begin())) {
    throw FormatError(path.string() + ": bad magic");
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = read_u32_le(raw + 8);
  const std::uint32_t count = read_u32_le(raw + 12);
  const std::uint32_t dim = read_u32_le(raw + 16);
  if (version != kEmbeddingVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::uint64_t payload = static_cast<std::uint64_t>(count) * dim * 4;
  if (bytes.size() - kEmbeddingHeaderBytes != payload) {
    throw FormatError(path.string() + ": payload size does not match header");
  }
  if (count > 0 && dim == 0) throw FormatError(path.string() + ": zero dimension");
  std::vector<Vector> rows(count, Vector(dim));
  const unsigned char* p = raw + kEmbeddingHeaderBytes;
  for (std::uint32_t r = 0; r < count; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c, p += 4) {
      const float v = std::bit_cast<float>(read_u32_le(p));
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": non-finite value in row " + std::to_string(r));
      }
      rows[r][c] = static_cast<double>(v);
    }
  }
  return rows;
}

void save_embeddings(const std::filesystem::path& path,
                     std::span<const Vector> rows) {
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  std::string out(kEmbeddingMagic.begin(), kEmbeddingMagic.end());
  append_u32_le(out, kEmbeddingVersion);
  append_u32_le(out, static_cast<std::uint32_t>(rows.size()));
  append_u32_le(out, static_cast<std::uint32_t>(dim));
  out.reserve(out.size() + rows.size() * dim * 4);
  for (const auto& row : rows) {
    if (row.size() != dim) throw ArgumentError("save_embeddings: ragged rows");
    for (const double v : row) {
      const auto f = static_cast<float>(v);
      if (!std::isfinite(f)) throw DataError("save_embeddings: non-finite value");
      append_u32_le(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  write_file(path, out);
}

LabelMap load_labels(const std::filesystem::path& path, const LabelVocab& vocab) {
  LabelMap labels;
  for (const auto& row : read_label_rows(path)) {
    std::optional<std::size_t> label;
    if (!row.label.empty()) {
      label = vocab.index_of(row.label);
      if (!label) {
        throw DataError(path.string() + ": unknown label '" + row.label +
                        "' at id " + std::to_string(row.id));
      }
    }
    if (!labels.emplace(row.id, label).second) {
      throw DataError(path.string() + ": duplicate id " + std::to_string(row.id));
    }
  }
  return labels;
}

void save_labels(const std::filesystem::path& path, const Dataset& dataset) {
  std::string out = "id,label\n";
  for (const auto& s : dataset.samples()) {
    out += std::to_string(s.id);
    out += ',';
    if (s.label) out += dataset.vocab().name(*s.label);
    out += '\n';
  }
  write_file(path, out);
}

LabelVocab infer_vocab(const std::filesystem::path& path) {
  std::set<std::string> names;
  for (const auto& row : read_label_rows(path)) {
    if (!row.label.empty()) names.insert(row.label);
  }
  if (names.empty()) throw DataError(path.string() + ": no labeled rows");
  return LabelVocab(std::vector<std::string>(names.begin(), names.end()));
}

Dataset assemble_dataset(std::vector<Vector> embeddings, const LabelMap& labels,
                         LabelVocab vocab) {
  if (labels.size() != embeddings.size()) {
    throw DataError("labels cover " + std::to_string(labels.size()) +
                    " rows but embeddings hold " + std::to_string(embeddings.size()));
  }
  std::vector<Sample> samples;
  samples.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto it = labels.find(i);
    if (it == labels.end()) {
      throw DataError("no label row for embedding id " + std::to_string(i));
    }
    samples.push_back({i, std::move(embeddings[i]), it->second});
  }
  return Dataset(std::move(samples), std::move(vocab));
}

Dataset split_scheme(const Dataset& dataset, double labeled_fraction,
                     std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw ArgumentError("split_scheme: labeled fraction must lie in (0, 1]");
  }
  if (!dataset.fully_labeled()) {
    throw DataError("split_scheme: input dataset must be fully labeled");
  }
  const std::size_t n = dataset.size();
  const std::size_t k = dataset.k();
  const auto target = static_cast<std::size_t>(
      std::ceil(labeled_fraction * static_cast<double>(n) - 1e-9));

  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < n; ++i) by_class[*dataset[i].label].push_back(i);

  // Largest-remainder apportionment of `target` across classes.
  std::vector<std::size_t> quota(k);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = labeled_fraction * static_cast<double>(by_class[c].size());
    quota[c] = std::min(by_class[c].size(),
                        static_cast<std::size_t>(std::floor(exact + 1e-9)));
    assigned += quota[c];
    remainders.emplace_back(exact - static_cast<double>(quota[c]), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < target && r < remainders.size(); ++r) {
    const std::size_t c = remainders[r].second;
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  std::vector<bool> keep(n, false);
  Rng rng(seed);
  for (std::size_t c = 0; c < k; ++c) {
    auto& members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t j = 0; j < quota[c]; ++j) keep[members[j]] = true;
  }

  std::vector<Sample> samples = dataset.samples();
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) samples[i].label.reset();
  }
  return Dataset(std::move(samples), dataset.vocab());
}

std::vector<Batch> epoch_batches(const Dataset& dataset, std::size_t batch_size,
                                 std::uint64_t seed, std::size_t epoch) {
  if (batch_size < 2) throw ArgumentError("epoch_batches: batch size must be >= 2");
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset[i].labeled() ? labeled : unlabeled).push_back(i);
  }
  if (labeled.empty()) throw ConfigError("dataset has no labeled samples");

  Rng rng(seed ^ static_cast<std::uint64_t>(epoch));
  rng.shuffle(std::span<std::size_t>(labeled));
  rng.shuffle(std::span<std::size_t>(unlabeled));

  const std::size_t n = dataset.size();
  const std::size_t n_labeled = labeled.size();
  // Number of labeled samples among the first `pos` positions of the epoch.
  auto labeled_before = [&](std::size_t pos) {
    return (n_labeled * pos + n / 2) / n;
  };

  std::vector<Batch> batches;
  std::size_t next_labeled = 0;
  std::size_t next_unlabeled = 0;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    const std::size_t take_labeled = labeled_before(end) - labeled_before(start);
    Batch batch;
    batch.indices.reserve(end - start);
    for (std::size_t j = 0; j < take_labeled; ++j) {
      batch.indices.push_back(labeled[next_labeled++]);
    }
    for (std::size_t j = take_labeled; j < end - start; ++j) {
      batch.indices.push_back(unlabeled[next_unlabeled++]);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

void validate_synth(const SynthConfig& config) {
  if (config.k < 2) throw ArgumentError("synth: at least 2 classes required");
  if (config.dim < 2) throw ArgumentError("synth: dimension must be >= 2");
  if (config.per_class < 1) throw ArgumentError("synth: per-class count must be >= 1");
  if (!(config.separation > 0.0) || !std::isfinite(config.separation)) {
    throw ArgumentError("synth: separation must be positive");
  }
  if (!(config.noise_sd >= 0.0) || !std::isfinite(config.noise_sd)) {
    throw ArgumentError("synth: noise sd must be non-negative");
  }
}

double distance(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace

std::vector<Vector> synth_cluster_means(const SynthConfig& config) {
  validate_synth(config);
  Rng rng = Rng::derive(config.seed, 0);
  std::vector<Vector> means(config.k, Vector(config.dim));
  for (auto& mean : means) {
    for (auto& v : mean) v = rng.normal();
  }
  double closest = INFINITY;
  for (std::size_t a = 0; a < config.k; ++a) {
    for (std::size_t b = a + 1; b < config.k; ++b) {
      closest = std::min(closest, distance(means[a], means[b]));
    }
  }
  // Uniform rescale so the closest pair sits exactly `separation` apart
  // (nudged up by one ulp-scale factor so rounding never lands below it).
  const double scale = config.separation / closest * (1.0 + 1e-12);
  for (auto& mean : means) {
    for (auto& v : mean) v *= scale;
  }
  return means;
}

Dataset synth_clusters(const SynthConfig& config) {
  const std::vector<Vector> means = synth_cluster_means(config);
  Rng rng = Rng::derive(config.seed, 1);
  std::vector<Sample> samples;
  samples.reserve(config.k * config.per_class);
  for (std::size_t i = 0; i < config.per_class; ++i) {
    for (std::size_t c = 0; c < config.k; ++c) {
      Vector x(config.dim);
      for (std::size_t d = 0; d < config.dim; ++d) {
        x[d] = means[c][d] + config.noise_sd * rng.normal();
      }
      samples.push_back({samples.size(), std::move(x), c});
    }
  }
  return Dataset(std::move(samples), LabelVocab::numbered(config.k));
}

}  // namespace cssda
