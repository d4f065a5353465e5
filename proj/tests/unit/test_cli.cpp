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

#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cssda/cli.hpp"
#include "cssda/data.hpp"
#include "oracles.hpp"

using namespace cssda;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string str(const std::filesystem::path& p) { return p.string(); }

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (const char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

std::set<std::string> listing(const std::filesystem::path& dir) {
  std::set<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

// Small synthetic corpus shared by the train/eval cases.
struct Corpus {
  oracle::TempDir dir;
  Corpus() {
    REQUIRE(invoke({"synth", "--dim", "16", "--per-class", "40", "--out", str(dir / "e.bin"),
                 "--labels-out", str(dir / "l.csv")})
                .code == 0);
  }
  std::vector<std::string> train_args(const std::string& out) const {
    return {"train", "--embeddings", str(dir / "e.bin"), "--labels", str(dir / "l.csv"),
            "--labeled-fraction", "0.5", "--epochs", "2", "--hidden", "8", "--batch-size", "32",
            "--out", str(dir / out)};
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"fly"}).code == 1);
  CHECK(invoke({"train"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"train", "--help"}).code == 0);
  oracle::TempDir dir;
  CHECK(invoke({"synth", "--classes", "1", "--out", str(dir / "e.bin"), "--labels-out",
             str(dir / "l.csv")}).code == 1);
  CHECK(invoke({"synth", "--dim", "abc", "--out", str(dir / "e.bin"), "--labels-out",
             str(dir / "l.csv")}).code == 1);
}

TEST_CASE("synth defaults write a loadable 600 row corpus, byte stable per seed") {
  oracle::TempDir dir;
  const Outcome o = invoke({"synth", "--out", str(dir / "a.bin"), "--labels-out", str(dir / "a.csv")});
  CHECK(o.code == 0);
  CHECK(load_embeddings(dir / "a.bin").size() == 600);
  const LabelVocab vocab = infer_vocab(dir / "a.csv");
  CHECK(vocab.k() == 3);
  CHECK(load_labels(dir / "a.csv", vocab).size() == 600);
  CHECK(invoke({"synth", "--out", str(dir / "b.bin"), "--labels-out", str(dir / "b.csv")}).code == 0);
  CHECK(oracle::read_bytes(dir / "a.bin") == oracle::read_bytes(dir / "b.bin"));
  CHECK(oracle::read_bytes(dir / "a.csv") == oracle::read_bytes(dir / "b.csv"));
  CHECK(invoke({"synth", "--seed", "8", "--out", str(dir / "c.bin"), "--labels-out", str(dir / "c.csv")}).code == 0);
  CHECK(oracle::read_bytes(dir / "a.bin") != oracle::read_bytes(dir / "c.bin"));
}

TEST_CASE("train writes a checkpoint and epoch logs") {
  Corpus c;
  auto args = c.train_args("m.ckpt");
  args.insert(args.end(), {"--log", str(c.dir / "log.jsonl")});
  const Outcome o = invoke(args);
  REQUIRE(o.code == 0);
  CHECK(std::filesystem::exists(c.dir / "m.ckpt"));
  CHECK(o.out.find("final d_supervised=") != std::string::npos);
  std::istringstream log(oracle::read_bytes(c.dir / "log.jsonl"));
  std::size_t epochs = 0;
  for (std::string line; std::getline(log, line); ++epochs) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["epoch"] == epochs + 1);
    CHECK(j.contains("numeric_error_count"));
  }
  CHECK(epochs == 2);
  CHECK(listing(c.dir.path()) == std::set<std::string>{"e.bin", "l.csv", "m.ckpt", "log.jsonl"});
}

TEST_CASE("train without --log prints epoch lines on stdout") {
  Corpus c;
  const Outcome o = invoke(c.train_args("m.ckpt"));
  REQUIRE(o.code == 0);
  CHECK(o.out.rfind("{\"epoch\":1,", 0) == 0);
  CHECK(o.err.find("epoch 2") != std::string::npos);
}

TEST_CASE("train error mapping") {
  Corpus c;
  auto missing = c.train_args("m.ckpt");
  missing[2] = str(c.dir / "absent.bin");
  CHECK(invoke(missing).code == 2);

  auto zero = c.train_args("m.ckpt");
  zero[6] = "0";
  CHECK(invoke(zero).code == 1);

  oracle::write_bytes(c.dir / "bad.bin", "CSSDAEMB\x07");
  auto bad = c.train_args("m.ckpt");
  bad[2] = str(c.dir / "bad.bin");
  CHECK(invoke(bad).code == 2);

  auto mode = c.train_args("m.ckpt");
  mode.insert(mode.end(), {"--mode", "turbo"});
  CHECK(invoke(mode).code == 1);

  oracle::write_bytes(c.dir / "cfg.json", "{\"bogus\": 1}");
  auto cfg = c.train_args("m.ckpt");
  cfg.insert(cfg.end(), {"--config", str(c.dir / "cfg.json")});
  CHECK(invoke(cfg).code == 1);
  CHECK_FALSE(std::filesystem::exists(c.dir / "m.ckpt"));
}

TEST_CASE("config file values apply and flags override them") {
  Corpus c;
  oracle::write_bytes(c.dir / "cfg.json", "{\"epochs\": 1, \"hidden\": 4, \"seed\": 3}");
  auto args = c.train_args("a.ckpt");
  args.insert(args.end(), {"--config", str(c.dir / "cfg.json"), "--log", str(c.dir / "a.log")});
  REQUIRE(invoke(args).code == 0);
  CHECK(line_count(oracle::read_bytes(c.dir / "a.log")) == 2);

  oracle::write_bytes(c.dir / "one.json", "{\"epochs\": 1}");
  auto file_only = std::vector<std::string>{
      "train", "--embeddings", str(c.dir / "e.bin"), "--labels", str(c.dir / "l.csv"),
      "--hidden", "8", "--config", str(c.dir / "one.json"), "--out", str(c.dir / "b.ckpt"),
      "--log", str(c.dir / "b.log")};
  REQUIRE(invoke(file_only).code == 0);
  CHECK(line_count(oracle::read_bytes(c.dir / "b.log")) == 1);
}

TEST_CASE("train and eval are idempotent") {
  Corpus c;
  REQUIRE(invoke(c.train_args("a.ckpt")).code == 0);
  REQUIRE(invoke(c.train_args("b.ckpt")).code == 0);
  CHECK(oracle::read_bytes(c.dir / "a.ckpt") == oracle::read_bytes(c.dir / "b.ckpt"));
  for (const char* name : {"r1.json", "r2.json"}) {
    REQUIRE(invoke({"eval", "--model", str(c.dir / "a.ckpt"), "--embeddings", str(c.dir / "e.bin"),
                 "--labels", str(c.dir / "l.csv"), "--report", str(c.dir / name)}).code == 0);
  }
  CHECK(oracle::read_bytes(c.dir / "r1.json") == oracle::read_bytes(c.dir / "r2.json"));
}

TEST_CASE("eval emits JSON or CSV reports") {
  Corpus c;
  REQUIRE(invoke(c.train_args("m.ckpt")).code == 0);
  const std::vector<std::string> base = {"eval", "--model", str(c.dir / "m.ckpt"), "--embeddings",
                                         str(c.dir / "e.bin"), "--labels", str(c.dir / "l.csv")};
  auto json_args = base;
  json_args.insert(json_args.end(), {"--report", str(c.dir / "r.json")});
  const Outcome o = invoke(json_args);
  REQUIRE(o.code == 0);
  CHECK(o.out.rfind("balanced_accuracy=", 0) == 0);
  CHECK(o.out.find("macro_f_score=") != std::string::npos);
  const auto j = nlohmann::json::parse(oracle::read_bytes(c.dir / "r.json"));
  CHECK(j["balanced_accuracy"].is_number());
  CHECK(j["per_class"].size() == 3);

  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--report", str(c.dir / "r.csv"), "--format", "csv", "--infer", "per-label"});
  REQUIRE(invoke(csv_args).code == 0);
  CHECK(line_count(oracle::read_bytes(c.dir / "r.csv")) == 1 + 3 + 1);

  auto fmt = base;
  fmt.insert(fmt.end(), {"--report", str(c.dir / "r.xml"), "--format", "xml"});
  CHECK(invoke(fmt).code == 1);
}

TEST_CASE("eval data errors exit 2") {
  Corpus c;
  REQUIRE(invoke(c.train_args("m.ckpt")).code == 0);
  oracle::write_bytes(c.dir / "partial.csv", "id,label\n0,c0\n1,\n");
  std::string partial = "id,label\n";
  for (int i = 0; i < 120; ++i) partial += std::to_string(i) + (i == 5 ? "," : ",c" + std::to_string(i % 3)) + "\n";
  oracle::write_bytes(c.dir / "partial.csv", partial);
  CHECK(invoke({"eval", "--model", str(c.dir / "m.ckpt"), "--embeddings", str(c.dir / "e.bin"),
             "--labels", str(c.dir / "partial.csv"), "--report", str(c.dir / "r.json")}).code == 2);

  REQUIRE(invoke({"synth", "--classes", "4", "--dim", "16", "--per-class", "5", "--out",
               str(c.dir / "e4.bin"), "--labels-out", str(c.dir / "l4.csv")}).code == 0);
  CHECK(invoke({"eval", "--model", str(c.dir / "m.ckpt"), "--embeddings", str(c.dir / "e4.bin"),
             "--labels", str(c.dir / "l4.csv"), "--report", str(c.dir / "r.json")}).code == 2);

  oracle::write_bytes(c.dir / "broken.ckpt", "CSSDACKPxx");
  CHECK(invoke({"eval", "--model", str(c.dir / "broken.ckpt"), "--embeddings", str(c.dir / "e.bin"),
             "--labels", str(c.dir / "l.csv"), "--report", str(c.dir / "r.json")}).code == 2);
  CHECK_FALSE(std::filesystem::exists(c.dir / "r.json"));
}

TEST_CASE("ablate emits one row per mode including the full baseline") {
  oracle::TempDir dir;
  const Outcome o = invoke({"ablate", "--mode", "no-augment,naive-loss,non-conditional", "--synthetic",
                         "--seeds", "1", "--epochs", "1", "--hidden", "8", "--labeled-fraction", "0.1",
                         "--out", str(dir / "t.csv")});
  REQUIRE(o.code == 0);
  const std::string table = oracle::read_bytes(dir / "t.csv");
  CHECK(line_count(table) == 5);
  CHECK(table.find("numeric_error_count") != std::string::npos);
  CHECK(table.find("\nfull,") != std::string::npos);
  CHECK(table.find("\nnaive-loss,") != std::string::npos);
  CHECK(invoke({"ablate", "--mode", "warp", "--synthetic"}).code == 1);
  CHECK(invoke({"ablate", "--mode", "no-augment"}).code == 1);
}

TEST_CASE("sweep emits one row per fraction") {
  const Outcome o = invoke({"sweep", "--synthetic", "--seeds", "1", "--epochs", "1", "--hidden", "8"});
  REQUIRE(o.code == 0);
  CHECK(line_count(o.out) == 4);
  CHECK(o.out.find("\nfull,0.25,") != std::string::npos);
  CHECK(o.out.find("\nfull,0.75,") != std::string::npos);
  CHECK(invoke({"sweep", "--synthetic", "--fractions", "0.5,abc"}).code == 1);
  CHECK(invoke({"sweep", "--synthetic", "--fractions", "0.5,1.5"}).code == 1);
}

TEST_CASE("ablate accepts explicit train and test files") {
  Corpus c;
  REQUIRE(invoke({"synth", "--dim", "16", "--per-class", "10", "--seed", "9", "--out",
               str(c.dir / "t.bin"), "--labels-out", str(c.dir / "t.csv")}).code == 0);
  const Outcome o = invoke({"ablate", "--mode", "no-augment", "--embeddings", str(c.dir / "e.bin"),
                         "--labels", str(c.dir / "l.csv"), "--test-embeddings", str(c.dir / "t.bin"),
                         "--test-labels", str(c.dir / "t.csv"), "--epochs", "1", "--hidden", "8"});
  CHECK(o.code == 0);
  CHECK(line_count(o.out) == 3);
}

}  // TEST_SUITE
