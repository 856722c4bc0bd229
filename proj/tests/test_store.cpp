/* Copyright 2026 The AttrCert Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "attrcert/model.hpp"
#include "attrcert/rng.hpp"
#include "attrcert/store.hpp"

using namespace attrcert;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir =
      fs::temp_directory_path() / ("attrcert_store_test_" +
                                   std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

model::ModelWeights random_model(std::uint64_t seed) {
  Philox rng(seed);
  model::ModelWeights m;
  m.input_dim = 5;
  m.class_count = 3;
  m.softplus_beta = 0.75;
  Eigen::MatrixXd w1(7, 5), w2(3, 7);
  for (int i = 0; i < w1.size(); ++i) w1.data()[i] = rng.next_gaussian();
  for (int i = 0; i < w2.size(); ++i) w2.data()[i] = rng.next_gaussian();
  Eigen::VectorXd b1(7), b2(3);
  for (int i = 0; i < 7; ++i) b1[i] = rng.next_gaussian();
  for (int i = 0; i < 3; ++i) b2[i] = rng.next_gaussian();
  m.layers.push_back({w1, b1, model::Activation::kSoftplus});
  m.layers.push_back({w2, b2, model::Activation::kIdentity});
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_idx_fixture(const fs::path& images, const fs::path& labels) {
  // two 2x2 images, pixel bytes chosen to hit 0, 1, 128, 255
  const unsigned char img_bytes[] = {
      0x00, 0x00, 0x08, 0x03,              // magic 2051
      0x00, 0x00, 0x00, 0x02,              // 2 images
      0x00, 0x00, 0x00, 0x02,              // 2 rows
      0x00, 0x00, 0x00, 0x02,              // 2 cols
      0, 1, 128, 255,                      // image 0
      10, 20, 30, 40};                     // image 1
  const unsigned char lab_bytes[] = {
      0x00, 0x00, 0x08, 0x01,              // magic 2049
      0x00, 0x00, 0x00, 0x02,              // 2 labels
      7, 3};
  std::ofstream(images, std::ios::binary)
      .write(reinterpret_cast<const char*>(img_bytes), sizeof(img_bytes));
  std::ofstream(labels, std::ios::binary)
      .write(reinterpret_cast<const char*>(lab_bytes), sizeof(lab_bytes));
}

}  // namespace

TEST_CASE("model container roundtrip is forward-exact") {
  const fs::path dir = temp_dir();
  const model::ModelWeights m = random_model(4);
  const fs::path path = dir / "roundtrip.w";
  store::save_model(m, path.string());
  const model::ModelWeights loaded = store::load_model(path.string());
  CHECK(loaded.softplus_beta == m.softplus_beta);
  Philox rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = 4.0 * (rng.next_double() - 0.5);
    const auto a = model::forward(m, x);
    const auto b = model::forward(loaded, x);
    CHECK((a.logits.array() == b.logits.array()).all());
    CHECK((a.probs.array() == b.probs.array()).all());
  }
}

TEST_CASE("model container rejects corruption") {
  const fs::path dir = temp_dir();
  const fs::path path = dir / "guarded.w";
  store::save_model(random_model(5), path.string());
  const std::string text = slurp(path);

  // truncation: never a partial model
  const fs::path truncated = dir / "truncated.w";
  store::write_text_file(truncated.string(),
                         text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(store::load_model(truncated.string()), store::LoadError);

  // payload tamper: digest mismatch named in the error
  std::string tampered = text;
  const std::size_t pos = tampered.find("weights ") + 10;
  tampered[pos] = tampered[pos] == 'A' ? 'B' : 'A';
  const fs::path bad = dir / "tampered.w";
  store::write_text_file(bad.string(), tampered);
  try {
    store::load_model(bad.string());
    FAIL("expected digest mismatch");
  } catch (const store::LoadError& e) {
    CHECK(std::string(e.what()).find("digest") != std::string::npos);
  }

  // version mismatch
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find("v1"), 2, "v9");
  const fs::path versioned = dir / "versioned.w";
  store::write_text_file(versioned.string(), wrong_version);
  CHECK_THROWS_AS(store::load_model(versioned.string()), store::LoadError);
}

TEST_CASE("IDX fixture parses bit-exactly") {
  const fs::path dir = temp_dir();
  const fs::path images = dir / "fixture-images.idx";
  const fs::path labels = dir / "fixture-labels.idx";
  write_idx_fixture(images, labels);

  const model::Dataset data = store::load_idx(images.string(),
                                              labels.string(), 10);
  REQUIRE(data.size() == 2);
  CHECK(data.dimension == 4);
  CHECK(data.features[0][0] == 0.0);
  CHECK(data.features[0][1] == 1.0 / 255.0);
  CHECK(data.features[0][2] == 128.0 / 255.0);
  CHECK(data.features[0][3] == 1.0);
  CHECK(data.labels[0] == 7);
  CHECK(data.labels[1] == 3);

  CHECK(store::load_idx(images.string(), labels.string(), 0).size() == 0);
  CHECK(store::load_idx(images.string(), labels.string(), 1).size() == 1);

  // image magic in the labels slot
  try {
    store::load_idx(images.string(), images.string(), 2);
    FAIL("expected label magic error");
  } catch (const store::LoadError& e) {
    CHECK(std::string(e.what()).find("expected label magic") !=
          std::string::npos);
  }

  // truncated image payload reports the byte offset
  const std::string img_text = slurp(images);
  const fs::path cut = dir / "cut-images.idx";
  store::write_text_file(cut.string(), img_text.substr(0, 18));
  try {
    store::load_idx(cut.string(), labels.string(), 2);
    FAIL("expected truncation error");
  } catch (const store::LoadError& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("synthetic blobs: balance, determinism, separability") {
  const store::BlobsSpec spec{8, 2, 100, 0.05, 7};
  const model::Dataset a = store::synth_blobs(spec);
  const model::Dataset b = store::synth_blobs(spec);
  REQUIRE(a.size() == 200);
  int zeros = 0;
  for (int label : a.labels) zeros += label == 0 ? 1 : 0;
  CHECK(zeros == 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.features[i].array() == b.features[i].array()).all());
  }

  // noiseless blobs collapse to the centers; a linear model separates them
  const model::Dataset clean = store::synth_blobs({8, 2, 20, 0.0, 7});
  model::TrainConfig tc;
  tc.layer_sizes = {8, 2};
  tc.learning_rate = 0.5;
  tc.epochs = 40;
  tc.seed = 2;
  CHECK(model::train(clean, tc).train_accuracy == 1.0);
}

TEST_CASE("synthetic bars: square grids only, deterministic") {
  CHECK_THROWS_AS(store::synth_bars({15, 2, 5, 0.0, 1}),
                  std::invalid_argument);
  const model::Dataset a = store::synth_bars({16, 2, 10, 0.03, 3});
  const model::Dataset b = store::synth_bars({16, 2, 10, 0.03, 3});
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.features[i].array() == b.features[i].array()).all());
    CHECK(a.features[i].minCoeff() >= 0.0);
    CHECK(a.features[i].maxCoeff() <= 1.0);
  }
  // horizontal stripes for class 0: row 0 bright, row 1 dark
  const model::Dataset clean = store::synth_bars({16, 2, 1, 0.0, 3});
  CHECK(clean.features[0][0] == 1.0);
  CHECK(clean.features[0][4] == 0.0);
  // vertical stripes for class 1: column 0 bright
  CHECK(clean.features[1][0] == 1.0);
  CHECK(clean.features[1][1] == 0.0);
}

TEST_CASE("emit_results: header-only, roundtrip, null conventions") {
  const fs::path dir = temp_dir();
  const fs::path empty_csv = dir / "empty.csv";
  store::emit_results({}, store::OutputFormat::kCsv, empty_csv.string());
  std::string text = slurp(empty_csv);
  CHECK(text.find("run_id,sample_index") == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);

  store::ResultRow feasible;
  feasible.run_id = "abc";
  feasible.sample_index = 3;
  feasible.kind = "T";
  feasible.r = 0.5;
  feasible.epsilon = 0.1 + 0.2;  // a value that needs 17 digits
  feasible.value = 0.123456789012345678;
  feasible.feasible = true;
  store::ResultRow infeasible = feasible;
  infeasible.value.reset();
  infeasible.feasible = false;
  infeasible.reason = "epsilon > 2r";

  const fs::path rows_csv = dir / "rows.csv";
  store::emit_results({feasible, infeasible}, store::OutputFormat::kCsv,
                      rows_csv.string());
  text = slurp(rows_csv);
  std::stringstream lines(text);
  std::string header, line1, line2;
  std::getline(lines, header);
  std::getline(lines, line1);
  std::getline(lines, line2);

  // round-trip the epsilon column (index 6) through strtod
  std::stringstream cells(line1);
  std::string cell;
  for (int i = 0; i <= 6; ++i) std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == 0.1 + 0.2);

  // infeasible row renders value (index 8) as the empty cell
  std::stringstream cells2(line2);
  for (int i = 0; i <= 8; ++i) std::getline(cells2, cell, ',');
  CHECK(cell.empty());

  const fs::path rows_jsonl = dir / "rows.jsonl";
  store::emit_results({feasible, infeasible}, store::OutputFormat::kJsonLines,
                      rows_jsonl.string());
  text = slurp(rows_jsonl);
  CHECK(text.find("\"value\":null") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  CHECK_THROWS_AS(store::emit_results({}, store::OutputFormat::kCsv,
                                      (dir / "nodir" / "x.csv").string()),
                  std::runtime_error);
}

TEST_CASE("fnv1a64 hex digest is stable") {
  CHECK(store::fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(store::fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(store::fnv1a64_hex("hello") != store::fnv1a64_hex("hellp"));
}
