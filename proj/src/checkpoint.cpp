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

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "cssda/errors.hpp"
#include "cssda/training.hpp"

namespace cssda {

namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'C', 'S', 'S', 'D',
                                                  'A', 'C', 'K', 'P'};
constexpr std::uint32_t kConditionalVersion = 1;
constexpr std::uint32_t kWiringVersion = 2;

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t narrow(std::size_t v) {
  if (v > UINT32_MAX) throw ArgumentError("checkpoint: dimension exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string checkpoint_bytes(const CssdaModel& model) {
  const ModelShape& shape = model.shape();
  std::string out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  const bool conditional = model.wiring() == Wiring::conditional;
  put_u32(out, conditional ? kConditionalVersion : kWiringVersion);
  put_u32(out, narrow(shape.dim));
  put_u32(out, narrow(shape.hidden));
  put_u32(out, narrow(shape.k));
  if (!conditional) {
    put_u32(out, static_cast<std::uint32_t>(model.wiring()));
    put_u32(out, narrow(shape.generator_input));
  }
  for (const ParamTensor* p : model.parameters()) {
    for (const double v : p->values) {
      const auto f = static_cast<float>(v);
      if (!std::isfinite(f)) throw NumericError("checkpoint: non-finite parameter");
      put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  return out;
}

CssdaModel checkpoint_from_bytes(std::string_view bytes, double leaky_slope, double dropout) {
  Reader in(bytes);
  if (bytes.size() < kCheckpointMagic.size() ||
      in.take(kCheckpointMagic.size()) != std::string_view(kCheckpointMagic.data(), 8)) {
    throw FormatError("checkpoint: bad magic");
  }
  const std::uint32_t version = in.u32();
  if (version != kConditionalVersion && version != kWiringVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  ModelShape shape;
  shape.dim = in.u32();
  shape.hidden = in.u32();
  shape.k = in.u32();
  shape.generator_input = shape.dim;
  Wiring wiring = Wiring::conditional;
  if (version == kWiringVersion) {
    const std::uint32_t raw = in.u32();
    if (raw != static_cast<std::uint32_t>(Wiring::non_conditional) &&
        raw != static_cast<std::uint32_t>(Wiring::classifier_only)) {
      throw FormatError("checkpoint: unknown wiring " + std::to_string(raw));
    }
    wiring = static_cast<Wiring>(raw);
    shape.generator_input = in.u32();
  }
  if (shape.dim == 0 || shape.hidden == 0 || shape.k == 0 || shape.generator_input == 0) {
    throw FormatError("checkpoint: zero dimension in header");
  }
  // Reject headers whose declared payload cannot fit before allocating.
  const std::uint64_t d = shape.dim, h = shape.hidden, k = shape.k, g = shape.generator_input;
  const std::uint64_t floats = g * h + h + h * d + d + d * h + h + h * k + k + k * d;
  if (floats * 4 != bytes.size() - (version == kConditionalVersion ? 24u : 32u)) {
    throw FormatError("checkpoint: payload size does not match header");
  }
  CssdaModel model(shape, wiring, leaky_slope, dropout);
  for (ParamTensor* p : model.parameters()) {
    for (double& v : p->values) {
      const float f = std::bit_cast<float>(in.u32());
      if (!std::isfinite(f)) throw FormatError("checkpoint: non-finite parameter");
      v = static_cast<double>(f);
    }
  }
  if (!in.at_end()) throw FormatError("checkpoint: trailing bytes");
  return model;
}

void save_checkpoint(const CssdaModel& model, const std::filesystem::path& path) {
  const std::string bytes = checkpoint_bytes(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

CssdaModel load_checkpoint(const std::filesystem::path& path, double leaky_slope,
                           double dropout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return checkpoint_from_bytes(bytes, leaky_slope, dropout);
}

CssdaModel load_checkpoint(const std::filesystem::path& path, std::size_t expected_k,
                           double leaky_slope, double dropout) {
  CssdaModel model = load_checkpoint(path, leaky_slope, dropout);
  if (model.shape().k != expected_k) {
    throw ConfigError("checkpoint has k=" + std::to_string(model.shape().k) +
                      " but " + std::to_string(expected_k) + " classes were expected");
  }
  return model;
}

}  // namespace cssda
