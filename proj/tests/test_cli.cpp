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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <vector>

#include "attrcert/cli.hpp"

namespace fs = std::filesystem;
using attrcert::cli::run_cli;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("attrcert_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// tiny shared fixtures: an 8-d blobs model for certify/sweep, a 16-d bars
// model for attack/validate
std::vector<std::string> blob_data_flags() {
  return {"--data", "synth:blobs", "--d",     "8",  "--classes", "2",
          "--per-class", "30",     "--noise", "0.05", "--data-seed", "7"};
}

std::vector<std::string> bars_data_flags() {
  return {"--data", "synth:bars", "--d",     "16",  "--classes", "2",
          "--per-class", "20",    "--noise", "0.05", "--data-seed", "3"};
}

std::vector<std::string> cat(std::vector<std::string> a,
                             const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

fs::path train_blob_model(const fs::path& dir) {
  const fs::path model = dir / "model.w";
  const int code = run_cli(cat(
      {"train", "--arch", "8,12,2", "--act", "softplus", "--epochs", "40",
       "--lr", "0.3", "--seed", "5", "--out", model.string()},
      blob_data_flags()));
  REQUIRE(code == 0);
  return model;
}

fs::path train_bars_model(const fs::path& dir) {
  const fs::path model = dir / "bars.w";
  const int code = run_cli(cat(
      {"train", "--arch", "16,8,2", "--act", "softplus", "--epochs", "40",
       "--lr", "0.3", "--seed", "5", "--out", model.string()},
      bars_data_flags()));
  REQUIRE(code == 0);
  return model;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream text(slurp(p));
  std::string line;
  while (std::getline(text, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(std::move(cells));
  }
  return rows;
}

int column_index(const std::vector<std::vector<std::string>>& rows,
                 const std::string& name) {
  for (std::size_t i = 0; i < rows.at(0).size(); ++i) {
    if (rows[0][i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2, load failures exit 1") {
  CHECK(run_cli({"train", "--data", "synth:blobs"}) == 2);  // missing --out
  CHECK(run_cli({"no-such-command"}) == 2);
  CHECK(run_cli({}) == 2);
  const fs::path dir = temp_dir("exitcodes");
  CHECK(run_cli({"certify", "--model", (dir / "missing.w").string(), "--out",
                 (dir / "x.csv").string()}) == 1);
  // the probabilistic interval only applies to bound-T certificates
  CHECK(run_cli(cat({"certify", "--model", (dir / "missing.w").string(),
                     "--kind", "max_eps", "--prob-interval", "0.05", "--out",
                     (dir / "y.csv").string()},
                    blob_data_flags())) == 2);
}

TEST_CASE("cli: train is deterministic and writes a sidecar first") {
  const fs::path dir = temp_dir("train");
  const fs::path model = train_blob_model(dir);
  CHECK(fs::exists(model.string() + ".resolved.cfg"));
  const std::string once = slurp(model);

  REQUIRE(run_cli(cat({"train", "--arch", "8,12,2", "--act", "softplus",
                       "--epochs", "40", "--lr", "0.3", "--seed", "5",
                       "--out", model.string()},
                      blob_data_flags())) == 0);
  CHECK(slurp(model) == once);
}

TEST_CASE("cli: certify emits sane rows and reruns byte-identically") {
  const fs::path dir = temp_dir("certify");
  const fs::path model = train_blob_model(dir);
  const fs::path out = dir / "certs.csv";
  const std::vector<std::string> args = cat(
      {"certify", "--model", model.string(), "--samples", "4", "--r", "0.5",
       "--eps", "0.25", "--n", "400", "--smooth-seed", "11", "--out",
       out.string(), "--threads", "2"},
      blob_data_flags());
  REQUIRE(run_cli(args) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 5);  // header + 4 samples
  const int value_col = column_index(rows, "value");
  const int feasible_col = column_index(rows, "feasible");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][feasible_col] == "true");
    const double t = std::stod(rows[i][value_col]);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }

  const std::string first = slurp(out);
  REQUIRE(run_cli(args) == 0);
  CHECK(slurp(out) == first);  // byte-identical rerun
}

TEST_CASE("cli: infeasible cells are rows, not failures") {
  const fs::path dir = temp_dir("infeasible");
  const fs::path model = train_blob_model(dir);
  const fs::path out = dir / "infeasible.csv";
  REQUIRE(run_cli(cat({"certify", "--model", model.string(), "--samples", "2",
                       "--r", "0.4", "--eps", "1.0", "--n", "200", "--out",
                       out.string()},
                      blob_data_flags())) == 0);
  const auto rows = csv_rows(out);
  const int feasible_col = column_index(rows, "feasible");
  const int value_col = column_index(rows, "value");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][feasible_col] == "false");
    CHECK(rows[i][value_col].empty());
  }
}

TEST_CASE("cli: max_eps certificates roundtrip through kind T") {
  const fs::path dir = temp_dir("roundtrip");
  const fs::path model = train_blob_model(dir);
  const fs::path max_out = dir / "maxeps.csv";
  REQUIRE(run_cli(cat({"certify", "--model", model.string(), "--samples", "1",
                       "--kind", "max_eps", "--r", "0.5", "--threshold",
                       "0.9", "--n", "400", "--smooth-seed", "21", "--out",
                       max_out.string()},
                      blob_data_flags())) == 0);
  auto rows = csv_rows(max_out);
  const double eps_star = std::stod(rows[1][column_index(rows, "value")]);
  REQUIRE(eps_star > 0.0);

  const fs::path t_out = dir / "t.csv";
  REQUIRE(run_cli(cat({"certify", "--model", model.string(), "--samples", "1",
                       "--kind", "T", "--r", "0.5", "--eps",
                       std::to_string(eps_star), "--n", "400",
                       "--smooth-seed", "21", "--out", t_out.string()},
                      blob_data_flags())) == 0);
  rows = csv_rows(t_out);
  const double t = std::stod(rows[1][column_index(rows, "value")]);
  CHECK(t >= 0.9 - 1e-6);  // std::to_string truncates eps to 6 digits
}

TEST_CASE("cli: certify with probabilistic interval brackets the point value") {
  const fs::path dir = temp_dir("interval");
  const fs::path model = train_blob_model(dir);
  const fs::path out = dir / "certs_pi.csv";
  REQUIRE(run_cli(cat({"certify", "--model", model.string(), "--samples", "2",
                       "--r", "0.5", "--eps", "0.25", "--n", "400",
                       "--prob-interval", "0.05", "--prob-mc", "20000",
                       "--out", out.string()},
                      blob_data_flags())) == 0);
  const auto rows = csv_rows(out);
  const int value_col = column_index(rows, "value");
  const int t1_col = column_index(rows, "t1");
  const int t2_col = column_index(rows, "t2");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][value_col]);
    const double t1 = std::stod(rows[i][t1_col]);
    const double t2 = std::stod(rows[i][t2_col]);
    CHECK(t1 <= t);
    CHECK(t <= t2);
  }
}

TEST_CASE("cli: sweep pivot matches the long format and the trend") {
  const fs::path dir = temp_dir("sweep");
  const fs::path model = train_blob_model(dir);
  const fs::path out = dir / "sweep.csv";
  const fs::path pivot = dir / "pivot.csv";
  REQUIRE(run_cli(cat({"sweep", "--model", model.string(), "--samples", "3",
                       "--kind", "T", "--r-grid", "0.5,1.0,1.5,2.0",
                       "--eps-grid", "0.5,1.2", "--n", "300", "--out",
                       out.string(), "--pivot", pivot.string(), "--threads",
                       "2"},
                      blob_data_flags())) == 0);
  const auto long_rows = csv_rows(out);
  const auto pivot_rows = csv_rows(pivot);
  REQUIRE(long_rows.size() == 9);   // header + 2x4 cells
  REQUIRE(pivot_rows.size() == 3);  // header + 2 eps rows

  const int value_col = column_index(long_rows, "value");
  // pivot row 1 (eps=0.5) equals the first four long-format cells
  for (int c = 0; c < 4; ++c) {
    const std::string& long_cell = long_rows[1 + c][value_col];
    CHECK(pivot_rows[1][1 + c] == long_cell);
  }
  // nondecreasing in r within each row; infeasible renders empty
  CHECK(pivot_rows[2][1].empty());  // r=0.5, eps=1.2 -> "/" cell
  for (int c = 2; c < 4; ++c) {
    if (pivot_rows[1][c].empty() || pivot_rows[1][c + 1].empty()) continue;
    CHECK(std::stod(pivot_rows[1][c + 1]) >= std::stod(pivot_rows[1][c]));
  }
  // eps=1.0 row lies below the eps=0.5 row cellwise
  for (int c = 2; c <= 4; ++c) {
    if (pivot_rows[2][c].empty()) continue;
    CHECK(std::stod(pivot_rows[2][c]) <= std::stod(pivot_rows[1][c]));
  }
}

TEST_CASE("cli: attack rows respect the budget and identity at eps=0") {
  const fs::path dir = temp_dir("attack");
  const fs::path model = train_bars_model(dir);
  const fs::path out = dir / "attacks.csv";
  REQUIRE(run_cli(cat({"attack", "--model", model.string(), "--samples", "2",
                       "--repeats", "3", "--eps", "0.4", "--iterations", "6",
                       "--k", "2", "--target", "plain", "--seed", "9",
                       "--out", out.string(), "--threads", "2"},
                      bars_data_flags())) == 0);
  auto rows = csv_rows(out);
  REQUIRE(rows.size() == 7);  // header + 2x3
  const int delta_col = column_index(rows, "delta_norm");
  const int preserved_col = column_index(rows, "prediction_preserved");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][delta_col]) <= 0.4 + 1e-9);
    CHECK(rows[i][preserved_col] == "true");
  }

  const fs::path out0 = dir / "attacks0.csv";
  REQUIRE(run_cli(cat({"attack", "--model", model.string(), "--samples", "1",
                       "--repeats", "2", "--eps", "0", "--iterations", "3",
                       "--k", "2", "--out", out0.string()},
                      bars_data_flags())) == 0);
  rows = csv_rows(out0);
  const int cosine_col = column_index(rows, "cosine");
  const int topk_col = column_index(rows, "topk");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][cosine_col]) == doctest::Approx(1.0));
    CHECK(std::stod(rows[i][topk_col]) == 1.0);
  }
}

TEST_CASE("cli: validate passes, reruns identically, and guards thresholds") {
  const fs::path dir = temp_dir("validate");
  const fs::path out = dir / "run";
  const std::vector<std::string> args = cat(
      {"validate", "--arch", "16,8,2", "--act", "softplus", "--epochs", "30",
       "--samples", "4", "--repeats", "2", "--r", "0.5", "--eps", "0.25",
       "--n", "400", "--nstar", "50", "--iterations", "4", "--out",
       out.string(), "--threads", "2"},
      bars_data_flags());
  REQUIRE(run_cli(args) == 0);
  CHECK(fs::exists(out / "resolved.cfg"));
  CHECK(fs::exists(out / "model.w"));

  const auto gaps = csv_rows(out / "gaps.csv");
  const int value_col = column_index(gaps, "value");
  REQUIRE(gaps.size() == 9);  // header + 4x2
  double prev = -1e9;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double gap = std::stod(gaps[i][value_col]);
    CHECK(gap >= 0.0);     // the certificate held
    CHECK(gap >= prev);    // report sorted ascending
    prev = gap;
  }

  const std::string certs = slurp(out / "certificates.csv");
  const std::string attacks = slurp(out / "attacks.csv");
  REQUIRE(run_cli(args) == 0);
  CHECK(slurp(out / "certificates.csv") == certs);
  CHECK(slurp(out / "attacks.csv") == attacks);

  // an epsilon far beyond the certified max for T=0.9 is refused
  const int refused = run_cli(cat(
      {"validate", "--model", (out / "model.w").string(), "--samples", "2",
       "--repeats", "1", "--r", "0.5", "--eps", "0.25", "--n", "200",
       "--nstar", "20", "--iterations", "2", "--threshold", "0.9", "--out",
       (dir / "guard").string()},
      bars_data_flags()));
  CHECK(refused == 2);

  // a user-supplied M far below the true attribution bound invalidates the
  // certificate; the violation must surface as exit 3, not be smoothed over
  const int violated = run_cli(cat(
      {"validate", "--model", (out / "model.w").string(), "--samples", "2",
       "--repeats", "2", "--r", "0.5", "--eps", "0.25", "--n", "200",
       "--nstar", "20", "--iterations", "3", "--m-strategy", "user",
       "--m-value", "1e-6", "--out", (dir / "violation").string()},
      bars_data_flags()));
  CHECK(violated == 3);
}

TEST_CASE("cli: empty sweep grids produce header-only outputs") {
  const fs::path dir = temp_dir("emptysweep");
  const fs::path model = train_blob_model(dir);
  const fs::path out = dir / "empty.csv";
  const fs::path pivot = dir / "empty_pivot.csv";
  REQUIRE(run_cli(cat({"sweep", "--model", model.string(), "--samples", "2",
                       "--kind", "T", "--r-grid", "", "--eps-grid", "",
                       "--n", "100", "--out", out.string(), "--pivot",
                       pivot.string()},
                      blob_data_flags())) == 0);
  CHECK(csv_rows(out).size() == 1);    // header only
  CHECK(csv_rows(pivot).size() == 1);  // header only
}

TEST_CASE("cli: a resolved sidecar feeds back through --config") {
  const fs::path dir = temp_dir("sidecar");
  const fs::path model = train_blob_model(dir);
  const fs::path out = dir / "first.csv";
  REQUIRE(run_cli(cat({"certify", "--model", model.string(), "--samples",
                       "2", "--r", "0.5", "--eps", "0.25", "--n", "200",
                       "--out", out.string()},
                      blob_data_flags())) == 0);
  const std::string rows_once = slurp(out);
  // rerun purely from the sidecar; only rewriting the same outputs
  REQUIRE(run_cli({"certify", "--config", out.string() + ".resolved.cfg"}) ==
          0);
  CHECK(slurp(out) == rows_once);
}

TEST_CASE("cli: config file drives a run and the sidecar reflects it") {
  const fs::path dir = temp_dir("config");
  const fs::path model = train_blob_model(dir);
  const fs::path cfg_path = dir / "run.cfg";
  const fs::path out = dir / "from_config.csv";
  std::ostringstream cfg;
  cfg << "model=" << model.string() << "\n"
      << "data=synth:blobs\nd=8\nclasses=2\nper-class=30\nnoise=0.05\n"
      << "data-seed=7\nsamples=2\nr=0.5\neps=0.25\nn=200\n"
      << "out=" << out.string() << "\n";
  std::ofstream(cfg_path) << cfg.str();
  REQUIRE(run_cli({"certify", "--config", cfg_path.string()}) == 0);
  const std::string sidecar = slurp(fs::path(out.string() + ".resolved.cfg"));
  CHECK(sidecar.find("command=certify") == 0);
  CHECK(sidecar.find("samples=2") != std::string::npos);
  CHECK(csv_rows(out).size() == 3);
}
