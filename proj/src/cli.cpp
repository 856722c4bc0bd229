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
#include "attrcert/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "attrcert/attack.hpp"
#include "attrcert/attribution.hpp"
#include "attrcert/certify.hpp"
#include "attrcert/metrics.hpp"
#include "attrcert/model.hpp"
#include "attrcert/rng.hpp"
#include "attrcert/store.hpp"

namespace attrcert::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSoundness = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& flag,
                                      bool allow_empty = false) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty() && !allow_empty) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& flag) {
  std::vector<int> out;
  for (double v : parse_double_list(text, flag)) {
    const int i = static_cast<int>(std::lround(v));
    if (static_cast<double>(i) != v) {
      throw UsageError(flag + ": expected integers");
    }
    out.push_back(i);
  }
  return out;
}

// Deterministic worker pool: items are indexed, results land at their index,
// so output order never depends on scheduling. The first worker exception is
// rethrown after the join.
void parallel_items(int count, int threads,
                    const std::function<void(int)>& work) {
  threads = std::max(1, threads);
  if (threads == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const int n_workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) {
    pool.emplace_back([&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        const int idx = next.fetch_add(1);
        if (idx >= count) break;
        try {
          work(idx);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Flat key=value config support. CLI11 only reads config files on the root
// app, so each subcommand's --config is expanded here into ordinary flags,
// inserted ahead of the explicit ones; every option takes the last value, so
// the command line overrides the file.
std::vector<std::string> expand_config_args(
    const CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const auto* candidate : app.get_subcommands({})) {
    if (candidate->get_name() == args[0]) {
      sub = candidate;
      break;
    }
  }
  if (sub == nullptr) return args;

  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) {
    throw UsageError("cannot open config file: " + config_path);
  }
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config file " + config_path + " line " +
                       std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
      value = value.substr(1, value.size() - 2);  // sidecar-style quoting
    }
    if (key == "config" || key == "command") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw UsageError("config file " + config_path + " line " +
                       std::to_string(line_no) + ": unknown key '" + key +
                       "'");
    }
    if (opt->get_expected_min() == 0) {  // flag
      const bool truthy =
          value == "true" || value == "1" || value == "on" || value.empty();
      injected.push_back(truthy ? "--" + key : "--no-" + key);
    } else {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }

  std::vector<std::string> expanded;
  expanded.push_back(args[0]);
  expanded.insert(expanded.end(), injected.begin(), injected.end());
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

void take_last_everywhere(CLI::App* sub) {
  for (CLI::Option* opt : sub->get_options()) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

// ---------------------------------------------------------------------------
// shared option blocks

struct DatasetArgs {
  std::string source = "synth:bars";
  int dimension = 64;
  int classes = 2;
  int per_class = 100;
  double noise = 0.05;
  std::uint64_t seed = 11;
  std::string images_path;
  std::string labels_path;
  int limit = 100;

  void add_options(CLI::App* app) {
    app->add_option("--data", source,
                    "dataset source: synth:bars | synth:blobs | idx")
        ->capture_default_str();
    app->add_option("--d", dimension, "feature dimension (synthetic)")
        ->capture_default_str();
    app->add_option("--classes", classes, "class count (synthetic)")
        ->capture_default_str();
    app->add_option("--per-class", per_class, "samples per class (synthetic)")
        ->capture_default_str();
    app->add_option("--noise", noise, "feature noise sigma (synthetic)")
        ->capture_default_str();
    app->add_option("--data-seed", seed, "dataset generator seed")
        ->capture_default_str();
    app->add_option("--images", images_path, "IDX image file (source=idx)")
        ->capture_default_str();
    app->add_option("--labels", labels_path, "IDX label file (source=idx)")
        ->capture_default_str();
    app->add_option("--limit", limit, "IDX sample cap (source=idx)")
        ->capture_default_str();
  }

  model::Dataset load() const {
    if (source == "synth:bars") {
      return store::synth_bars({dimension, classes, per_class, noise, seed});
    }
    if (source == "synth:blobs") {
      return store::synth_blobs({dimension, classes, per_class, noise, seed});
    }
    if (source == "idx") {
      if (images_path.empty() || labels_path.empty()) {
        throw UsageError("--data idx requires --images and --labels");
      }
      return store::load_idx(images_path, labels_path, limit);
    }
    throw UsageError("unknown --data source: " + source);
  }
};

struct AttributionArgs {
  std::string method = "sm";
  std::string wrt = "logit";
  int ig_steps = 32;

  void add_options(CLI::App* app) {
    app->add_option("--method", method, "attribution: sm | ig")
        ->capture_default_str();
    app->add_option("--wrt", wrt, "differentiate the logit or the prob")
        ->capture_default_str();
    app->add_option("--ig-steps", ig_steps, "integrated-gradients steps")
        ->capture_default_str();
  }

  attribution::AttributionConfig build() const {
    attribution::AttributionConfig cfg;
    cfg.method = attribution::method_from_name(method);
    cfg.ig_steps = ig_steps;
    if (wrt == "logit") {
      cfg.wrt = model::Wrt::kLogit;
    } else if (wrt == "prob") {
      cfg.wrt = model::Wrt::kProb;
    } else {
      throw UsageError("--wrt must be logit or prob");
    }
    return cfg;
  }
};

struct BoundArgs {
  std::string strategy = "lipschitz";
  double scale = 2.0;
  int probes = 10000;
  std::uint64_t seed = 0;
  double user_value = 0.0;

  void add_options(CLI::App* app) {
    app->add_option("--m-strategy", strategy,
                    "M selection: lipschitz | empirical | user")
        ->capture_default_str();
    app->add_option("--m-scale", scale, "empirical M scale factor")
        ->capture_default_str();
    app->add_option("--m-probes", probes, "empirical M probe count")
        ->capture_default_str();
    app->add_option("--m-seed", seed, "empirical M probe seed")
        ->capture_default_str();
    app->add_option("--m-value", user_value, "user-provided M")
        ->capture_default_str();
  }

  attribution::UpperBound resolve(
      const model::ModelWeights& w,
      const attribution::AttributionConfig& cfg) const {
    if (strategy == "lipschitz") {
      return attribution::attribution_upper_bound(
          w, cfg, attribution::LipschitzStrategy{});
    }
    if (strategy == "empirical") {
      return attribution::attribution_upper_bound(
          w, cfg, attribution::EmpiricalStrategy{scale, probes, seed});
    }
    if (strategy == "user") {
      return attribution::attribution_upper_bound(
          w, cfg, attribution::UserStrategy{user_value});
    }
    throw UsageError("unknown --m-strategy: " + strategy);
  }
};

// Resolved-config sidecar: written next to the results before any of them,
// and hashed into the run id so every row names its provenance.
struct RunIdentity {
  std::string resolved_text;
  std::string run_id;
};

RunIdentity write_sidecar(const CLI::App* sub, const std::string& path) {
  RunIdentity id;
  std::ostringstream text;
  text << "command=" << sub->get_name() << "\n";
  // drop the config= line: where the values came from is not a parameter,
  // and a sidecar fed back through --config must reproduce the same run_id
  std::istringstream generated(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(generated, line)) {
    if (line.rfind("config=", 0) == 0) continue;
    text << line << "\n";
  }
  id.resolved_text = text.str();
  id.run_id = store::fnv1a64_hex(id.resolved_text);
  store::write_text_file(path, id.resolved_text);
  return id;
}

// Round-robin over classes, confidently classified samples only; returns
// dataset indices. Deterministic: class lists keep dataset order.
std::vector<int> select_eval_samples(const model::ModelWeights& w,
                                     const model::Dataset& data, int count) {
  std::vector<std::vector<int>> by_class(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data.labels[i]].push_back(static_cast<int>(i));
  }
  std::vector<int> picked;
  std::vector<std::size_t> cursor(data.class_count, 0);
  bool progress = true;
  while (static_cast<int>(picked.size()) < count && progress) {
    progress = false;
    for (int c = 0; c < data.class_count &&
                    static_cast<int>(picked.size()) < count;
         ++c) {
      while (cursor[c] < by_class[c].size()) {
        const int idx = by_class[c][cursor[c]++];
        const model::ForwardResult fw = model::forward(w, data.features[idx]);
        Eigen::Index top = 0;
        fw.logits.maxCoeff(&top);
        double second = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < fw.logits.size(); ++k) {
          if (k != top) second = std::max(second, fw.logits[k]);
        }
        if (fw.logits[top] > second) {  // positive margin
          picked.push_back(idx);
          progress = true;
          break;
        }
      }
    }
  }
  if (static_cast<int>(picked.size()) < count) {
    throw std::runtime_error(
        "not enough confidently classified samples: wanted " +
        std::to_string(count) + ", found " + std::to_string(picked.size()));
  }
  return picked;
}

std::string sidecar_path_for(const std::string& out_file) {
  return out_file + ".resolved.cfg";
}

std::string result_file(const std::filesystem::path& dir,
                        const std::string& stem, const std::string& format) {
  return (dir / (stem + (format == "jsonl" ? ".jsonl" : ".csv"))).string();
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config_file;
  DatasetArgs data;
  std::string arch = "64,32,2";
  std::string activation = "relu";
  double softplus_beta = 1.0;
  double learning_rate = 0.2;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 7;
  std::string out_path;
};

int run_train(const TrainArgs& args, const CLI::App* sub) {
  const RunIdentity id = write_sidecar(sub, sidecar_path_for(args.out_path));
  const model::Dataset data = args.data.load();
  model::TrainConfig cfg;
  cfg.layer_sizes = parse_int_list(args.arch, "--arch");
  cfg.hidden_activation = model::activation_from_name(args.activation);
  cfg.softplus_beta = args.softplus_beta;
  cfg.learning_rate = args.learning_rate;
  cfg.epochs = args.epochs;
  cfg.batch_size = args.batch_size;
  cfg.seed = args.seed;
  const model::TrainResult result = model::train(data, cfg);
  store::save_model(result.weights, args.out_path);

  std::ifstream in(args.out_path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::printf("run_id=%s\n", id.run_id.c_str());
  std::printf("train_accuracy=%.6f\n", result.train_accuracy);
  std::printf("final_loss=%.6f\n", result.final_loss);
  std::printf("model_digest=%s\n", store::fnv1a64_hex(bytes).c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// certify

struct CertifyArgs {
  std::string config_file;
  DatasetArgs data;
  AttributionArgs attribution;
  BoundArgs bound;
  std::string model_path;
  std::string kind = "T";
  int samples = 10;
  double radius = 0.5;
  double epsilon = 0.25;
  double threshold = 0.9;
  int smoothing_n = 10000;
  std::uint64_t smooth_seed = 1001;
  double prob_alpha = 0.0;  // 0 disables the probabilistic interval
  std::int64_t prob_mc = 1000000;
  std::uint64_t prob_seed = 42;
  std::string format = "csv";
  std::string out_path;
  int threads = 0;
};

store::ResultRow certificate_row(const std::string& run_id, int sample_index,
                                 const certify::Certificate& cert,
                                 std::uint64_t smoothing_seed) {
  store::ResultRow row;
  row.run_id = run_id;
  row.sample_index = sample_index;
  row.kind = certify::kind_name(cert.kind);
  row.dimension = cert.inputs.dimension;
  if (cert.kind != certify::CertificateKind::kMinRadius) {
    row.r = cert.inputs.radius;
  }
  if (cert.kind != certify::CertificateKind::kMaxEpsilon) {
    row.epsilon = cert.inputs.epsilon;
  }
  if (cert.inputs.threshold) row.threshold_t = *cert.inputs.threshold;
  if (cert.value) row.value = *cert.value;
  if (cert.vu_over_vs) row.vu_over_vs = *cert.vu_over_vs;
  row.norm_h = cert.inputs.norm_h;
  row.m = cert.inputs.upper_bound_m;
  row.m_strategy = cert.m_strategy;
  row.feasible = cert.feasible;
  row.reason = cert.reason;
  row.smoothing_seed = smoothing_seed;
  return row;
}

certify::Certificate certificate_for_kind(
    const std::string& kind, int dimension, double radius, double epsilon,
    double threshold, double norm_h, const attribution::UpperBound& m) {
  if (kind == "T") {
    return certify::bound_T(dimension, radius, epsilon, norm_h, m.value,
                            m.strategy);
  }
  if (kind == "max_eps") {
    return certify::max_epsilon(dimension, radius, norm_h, m.value, threshold,
                                m.strategy);
  }
  if (kind == "min_radius") {
    return certify::min_radius(dimension, epsilon, norm_h, m.value, threshold,
                               m.strategy);
  }
  throw UsageError("unknown --kind: " + kind);
}

int run_certify(const CertifyArgs& args, const CLI::App* sub) {
  if (args.prob_alpha != 0.0 &&
      (args.kind != "T" || !(args.prob_alpha > 0.0 && args.prob_alpha < 1.0))) {
    throw UsageError(
        "--prob-interval needs --kind T and an alpha in (0,1)");
  }
  const RunIdentity id = write_sidecar(sub, sidecar_path_for(args.out_path));
  const model::ModelWeights w = store::load_model(args.model_path);
  const model::Dataset data = args.data.load();
  const attribution::AttributionConfig cfg = args.attribution.build();
  const attribution::UpperBound m = args.bound.resolve(w, cfg);
  const int n_samples =
      std::min<int>(args.samples, static_cast<int>(data.size()));

  std::vector<store::ResultRow> rows(n_samples);
  parallel_items(n_samples, resolve_threads(args.threads), [&](int i) {
    const std::uint64_t seed_i = derive_seed(args.smooth_seed, i);
    const attribution::SmoothedAttribution sa = attribution::smooth_uniform(
        w, data.features[i], cfg, {args.radius, args.smoothing_n, seed_i});
    store::ResultRow row;
    if (sa.norm2 == 0.0) {
      row.run_id = id.run_id;
      row.sample_index = i;
      row.kind = args.kind;
      row.dimension = w.input_dim;
      row.feasible = false;
      row.reason = "degenerate attribution: ||h(x)|| = 0";
      row.smoothing_seed = seed_i;
    } else {
      const certify::Certificate cert =
          certificate_for_kind(args.kind, w.input_dim, args.radius,
                               args.epsilon, args.threshold, sa.norm2, m);
      row = certificate_row(id.run_id, i, cert, seed_i);
      if (args.prob_alpha > 0.0 && cert.feasible) {
        const certify::ProbabilisticBound pb = certify::probabilistic_interval(
            sa, w.input_dim, args.radius, args.epsilon, m.value,
            args.prob_alpha, args.prob_mc, derive_seed(args.prob_seed, i));
        row.t1 = pb.t1;
        row.t2 = pb.t2;
        row.alpha = pb.alpha;
      }
    }
    rows[i] = std::move(row);
  });
  store::emit_results(rows, store::output_format_from_name(args.format),
                      args.out_path);
  std::printf("run_id=%s\nrows=%d\n", id.run_id.c_str(), n_samples);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string config_file;
  DatasetArgs data;
  AttributionArgs attribution;
  BoundArgs bound;
  std::string model_path;
  std::string kind = "T";
  int samples = 10;
  std::string r_grid = "0.5,1.0,1.5,2.0,2.5,3.0,3.5";
  std::string eps_grid = "0.5,1.0";
  std::string threshold_grid = "0.8,0.9";
  double ref_radius = 0.5;  // smoothing radius for norm_h in min_radius sweeps
  int smoothing_n = 10000;
  std::uint64_t smooth_seed = 1001;
  std::string format = "csv";
  std::string out_path;
  std::string pivot_path;
  int threads = 0;
};

int run_sweep(const SweepArgs& args, const CLI::App* sub) {
  const RunIdentity id = write_sidecar(sub, sidecar_path_for(args.out_path));
  const model::ModelWeights w = store::load_model(args.model_path);
  const model::Dataset data = args.data.load();
  const attribution::AttributionConfig cfg = args.attribution.build();
  const attribution::UpperBound m = args.bound.resolve(w, cfg);
  const int n_samples =
      std::min<int>(args.samples, static_cast<int>(data.size()));

  // Axis layout per kind: columns x rows of the pivot. Empty grids are
  // legal and yield header-only outputs.
  std::vector<double> columns, rows_axis;
  std::string column_label, row_label;
  if (args.kind == "T") {
    columns = parse_double_list(args.r_grid, "--r-grid", true);
    rows_axis = parse_double_list(args.eps_grid, "--eps-grid", true);
    column_label = "r";
    row_label = "epsilon";
  } else if (args.kind == "max_eps") {
    columns = parse_double_list(args.r_grid, "--r-grid", true);
    rows_axis = parse_double_list(args.threshold_grid, "--threshold-grid",
                                  true);
    column_label = "r";
    row_label = "threshold_T";
  } else if (args.kind == "min_radius") {
    columns = parse_double_list(args.eps_grid, "--eps-grid", true);
    rows_axis = parse_double_list(args.threshold_grid, "--threshold-grid",
                                  true);
    column_label = "epsilon";
    row_label = "threshold_T";
  } else {
    throw UsageError("unknown --kind: " + args.kind);
  }

  // norm_h per (smoothing radius, sample). For kind T and max_eps the
  // smoothing radius is the column axis; min_radius smooths at --ref-r.
  const std::vector<double> smooth_radii =
      (args.kind == "min_radius") ? std::vector<double>{args.ref_radius}
                                  : columns;
  std::vector<std::vector<double>> norm_h(smooth_radii.size(),
                                          std::vector<double>(n_samples));
  parallel_items(
      static_cast<int>(smooth_radii.size()) * n_samples,
      resolve_threads(args.threads), [&](int item) {
        const int ri = item / n_samples;
        const int si = item % n_samples;
        const attribution::SmoothedAttribution sa =
            attribution::smooth_uniform(
                w, data.features[si], cfg,
                {smooth_radii[ri], args.smoothing_n,
                 derive_seed(args.smooth_seed, ri, si)});
        norm_h[ri][si] = sa.norm2;
      });

  std::vector<store::ResultRow> long_rows;
  std::vector<std::vector<std::optional<double>>> pivot(
      rows_axis.size(),
      std::vector<std::optional<double>>(columns.size()));
  for (std::size_t row_i = 0; row_i < rows_axis.size(); ++row_i) {
    for (std::size_t col_i = 0; col_i < columns.size(); ++col_i) {
      double sum = 0.0;
      int feasible_count = 0;
      certify::Certificate last_cert{};
      for (int si = 0; si < n_samples; ++si) {
        const double nh =
            norm_h[args.kind == "min_radius" ? 0 : col_i][si];
        if (nh == 0.0) continue;
        certify::Certificate cert;
        if (args.kind == "T") {
          cert = certify::bound_T(w.input_dim, columns[col_i],
                                  rows_axis[row_i], nh, m.value, m.strategy);
        } else if (args.kind == "max_eps") {
          cert = certify::max_epsilon(w.input_dim, columns[col_i], nh,
                                      m.value, rows_axis[row_i], m.strategy);
        } else {
          cert = certify::min_radius(w.input_dim, columns[col_i], nh, m.value,
                                     rows_axis[row_i], m.strategy);
        }
        last_cert = cert;
        if (cert.feasible) {
          sum += *cert.value;
          ++feasible_count;
        }
      }
      store::ResultRow row;
      row.run_id = id.run_id;
      row.sample_index = -1;  // aggregate over the sample set
      row.kind = args.kind;
      row.dimension = w.input_dim;
      if (column_label == "r") row.r = columns[col_i];
      if (column_label == "epsilon") row.epsilon = columns[col_i];
      if (row_label == "epsilon") row.epsilon = rows_axis[row_i];
      if (row_label == "threshold_T") row.threshold_t = rows_axis[row_i];
      row.m = m.value;
      row.m_strategy = m.strategy;
      row.feasible = feasible_count > 0;
      if (feasible_count > 0) {
        row.value = sum / feasible_count;
        pivot[row_i][col_i] = sum / feasible_count;
      } else {
        row.reason = last_cert.reason.empty() ? "no feasible samples"
                                              : last_cert.reason;
      }
      long_rows.push_back(std::move(row));
    }
  }
  store::emit_results(long_rows, store::output_format_from_name(args.format),
                      args.out_path);

  if (!args.pivot_path.empty()) {
    std::ostringstream out;
    out << row_label;
    for (double c : columns) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), ",%s=%.17g", column_label.c_str(), c);
      out << buf;
    }
    out << "\n";
    for (std::size_t row_i = 0; row_i < rows_axis.size(); ++row_i) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", rows_axis[row_i]);
      out << buf;
      for (std::size_t col_i = 0; col_i < columns.size(); ++col_i) {
        out << ",";
        if (pivot[row_i][col_i]) {
          std::snprintf(buf, sizeof(buf), "%.17g", *pivot[row_i][col_i]);
          out << buf;
        }
      }
      out << "\n";
    }
    store::write_text_file(args.pivot_path, out.str());
  }
  std::printf("run_id=%s\ncells=%zu\n", id.run_id.c_str(), long_rows.size());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// attack

struct AttackArgs {
  std::string config_file;
  DatasetArgs data;
  AttributionArgs attribution;
  std::string model_path;
  int samples = 10;
  int repeats = 20;
  double epsilon = 0.5;
  int iterations = 200;
  double step_size = 0.1;
  int top_k = 0;  // 0 -> max(1, d/8)
  std::string target = "plain";
  int nstar = 300;
  double target_radius = 0.5;
  std::string grad_mode = "numeric";
  double fd_step = 1e-3;
  int directions = 8;
  bool softplus = true;
  std::string kendall_variant = "standard_tau";
  std::uint64_t seed = 2002;
  std::string format = "csv";
  std::string out_path;
  int threads = 0;
};

attack::AttackConfig build_attack_config(const AttackArgs& args,
                                         int dimension) {
  attack::AttackConfig atk;
  atk.epsilon = args.epsilon;
  atk.iterations = args.iterations;
  atk.step_size = args.step_size;
  atk.top_k = args.top_k > 0 ? args.top_k : std::max(1, dimension / 8);
  if (args.target == "plain") {
    atk.target = attack::AttackTarget::kPlain;
  } else if (args.target == "smoothed") {
    atk.target = attack::AttackTarget::kSmoothed;
  } else {
    throw UsageError("--target must be plain or smoothed");
  }
  atk.nstar = args.nstar;
  atk.target_radius = args.target_radius;
  atk.grad_mode = attack::grad_mode_from_name(args.grad_mode);
  atk.fd_step = args.fd_step;
  atk.directions_per_iter = args.directions;
  atk.softplus = args.softplus;
  atk.kendall_variant =
      metrics::kendall_variant_from_name(args.kendall_variant);
  return atk;
}

int run_attack(const AttackArgs& args, const CLI::App* sub) {
  const RunIdentity id = write_sidecar(sub, sidecar_path_for(args.out_path));
  const model::ModelWeights w = store::load_model(args.model_path);
  const model::Dataset data = args.data.load();
  const attribution::AttributionConfig cfg = args.attribution.build();
  const attack::AttackConfig base_atk = build_attack_config(args, w.input_dim);
  const std::vector<int> picked =
      select_eval_samples(w, data, std::min<int>(args.samples,
                                                 static_cast<int>(data.size())));
  const int n_items = static_cast<int>(picked.size()) * args.repeats;

  std::vector<store::ResultRow> rows(n_items);
  parallel_items(n_items, resolve_threads(args.threads), [&](int item) {
    const int si = item / args.repeats;
    const int rep = item % args.repeats;
    attack::AttackConfig atk = base_atk;
    const std::uint64_t attack_seed = derive_seed(args.seed, si, 2 * rep);
    atk.target_seed = derive_seed(args.seed, si, 2 * rep + 1);
    const attack::AttackResult res =
        attack::ifia_l2_attack(w, data.features[picked[si]], cfg, atk,
                               attack_seed);
    store::ResultRow row;
    row.run_id = id.run_id;
    row.sample_index = picked[si];
    row.repeat = rep;
    row.kind = "attack";
    row.dimension = w.input_dim;
    row.epsilon = atk.epsilon;
    if (atk.target == attack::AttackTarget::kSmoothed) {
      row.r = atk.target_radius;
      row.smoothing_seed = atk.target_seed;
    }
    row.topk = res.metrics.topk;
    row.kendall = res.metrics.kendall;
    row.kendall_variant = args.kendall_variant;
    row.cosine = res.metrics.cosine;
    row.delta_norm = res.delta_norm;
    row.prediction_preserved = res.prediction_preserved;
    row.attack_seed = attack_seed;
    row.reason = res.surrogate;
    rows[item] = std::move(row);
  });
  store::emit_results(rows, store::output_format_from_name(args.format),
                      args.out_path);
  std::printf("run_id=%s\nrows=%d\n", id.run_id.c_str(), n_items);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string config_file;
  DatasetArgs data;
  AttributionArgs attribution;
  BoundArgs bound;
  std::string profile;
  std::string model_path;
  std::string arch = "64,32,2";
  std::string activation = "softplus";
  double softplus_beta = 1.0;
  double learning_rate = 0.2;
  int epochs = 40;
  int batch_size = 32;
  std::uint64_t train_seed = 7;
  int samples = 50;
  int repeats = 20;
  std::string r_list = "0.5,1.0";
  std::string eps_list = "0.25,0.5";
  int smoothing_n = 10000;
  int nstar = 300;
  std::uint64_t smooth_seed = 1001;
  std::uint64_t attack_seed = 2002;
  int iterations = 30;
  double step_size = 0.1;
  int top_k = 0;
  std::string target = "smoothed";
  std::string grad_mode = "random_search";
  double fd_step = 1e-3;
  int directions = 8;
  bool softplus = true;
  std::string kendall_variant = "standard_tau";
  double threshold = 0.0;  // 0 disables the threshold guard
  bool gap_report = true;
  std::string format = "csv";
  std::string out_dir;
  int threads = 0;
};

int run_validate(const ValidateArgs& args, const CLI::App* sub) {
  namespace fs = std::filesystem;
  // The desk profile is exactly validate's defaults; configs/desk.cfg ships
  // the same values spelled out for --config use.
  if (!args.profile.empty() && args.profile != "desk") {
    throw UsageError("unknown profile: " + args.profile);
  }
  fs::create_directories(args.out_dir);
  const RunIdentity id =
      write_sidecar(sub, (fs::path(args.out_dir) / "resolved.cfg").string());

  // Model: load if given, otherwise train the configured one and keep it
  // next to the results.
  model::ModelWeights w;
  if (!args.model_path.empty()) {
    w = store::load_model(args.model_path);
  } else {
    const model::Dataset train_data = args.data.load();
    model::TrainConfig tc;
    tc.layer_sizes = parse_int_list(args.arch, "--arch");
    tc.hidden_activation = model::activation_from_name(args.activation);
    tc.softplus_beta = args.softplus_beta;
    tc.learning_rate = args.learning_rate;
    tc.epochs = args.epochs;
    tc.batch_size = args.batch_size;
    tc.seed = args.train_seed;
    const model::TrainResult tr = model::train(train_data, tc);
    w = tr.weights;
    store::save_model(w, (fs::path(args.out_dir) / "model.w").string());
    std::printf("train_accuracy=%.6f\n", tr.train_accuracy);
  }

  const model::Dataset data = args.data.load();
  const attribution::AttributionConfig cfg = args.attribution.build();
  const attribution::UpperBound m = args.bound.resolve(w, cfg);
  const std::vector<double> radii = parse_double_list(args.r_list, "--r");
  const std::vector<double> epsilons =
      parse_double_list(args.eps_list, "--eps");
  if (radii.size() != epsilons.size()) {
    throw UsageError("--r and --eps must be lists of equal length (paired)");
  }
  const std::vector<int> picked = select_eval_samples(
      w, data, std::min<int>(args.samples, static_cast<int>(data.size())));
  const int n_samples = static_cast<int>(picked.size());
  const int n_pairs = static_cast<int>(radii.size());
  const int threads = resolve_threads(args.threads);

  // Stage 1: certificates (and the threshold guard) per (pair, sample).
  struct CertCell {
    attribution::SmoothedAttribution sa;
    certify::Certificate cert;
    std::uint64_t seed;
  };
  std::vector<CertCell> cells(n_pairs * n_samples);
  parallel_items(n_pairs * n_samples, threads, [&](int item) {
    const int pair = item / n_samples;
    const int si = item % n_samples;
    CertCell cell;
    cell.seed = derive_seed(args.smooth_seed, pair, si);
    cell.sa = attribution::smooth_uniform(
        w, data.features[picked[si]], cfg,
        {radii[pair], args.smoothing_n, cell.seed});
    cell.cert = certify::bound_T(w.input_dim, radii[pair], epsilons[pair],
                                 cell.sa.norm2, m.value, m.strategy);
    cells[item] = std::move(cell);
  });

  if (args.threshold > 0.0) {
    for (int item = 0; item < n_pairs * n_samples; ++item) {
      const int pair = item / n_samples;
      const certify::Certificate cap = certify::max_epsilon(
          w.input_dim, radii[pair], cells[item].sa.norm2, m.value,
          args.threshold, m.strategy);
      if (!cap.feasible || epsilons[pair] > *cap.value + 1e-12) {
        throw UsageError(
            "threshold " + std::to_string(args.threshold) +
            " is not certified at epsilon=" + std::to_string(epsilons[pair]) +
            " (certified max epsilon: " +
            (cap.feasible ? std::to_string(*cap.value) : "none") +
            "); refusing mismatched validation");
      }
    }
  }

  std::vector<store::ResultRow> cert_rows(cells.size());
  for (std::size_t item = 0; item < cells.size(); ++item) {
    const int si = static_cast<int>(item) % n_samples;
    cert_rows[item] = certificate_row(id.run_id, picked[si],
                                      cells[item].cert, cells[item].seed);
  }
  store::emit_results(cert_rows, store::output_format_from_name(args.format),
                      result_file(args.out_dir, "certificates", args.format));

  // Stage 2: attacks + empirical smoothed cosine per (pair, sample, repeat).
  AttackArgs atk_args;
  atk_args.epsilon = 0.0;  // set per pair below
  atk_args.iterations = args.iterations;
  atk_args.step_size = args.step_size;
  atk_args.top_k = args.top_k;
  atk_args.target = args.target;
  atk_args.nstar = args.nstar;
  atk_args.grad_mode = args.grad_mode;
  atk_args.fd_step = args.fd_step;
  atk_args.directions = args.directions;
  atk_args.softplus = args.softplus;
  atk_args.kendall_variant = args.kendall_variant;

  const int n_items = n_pairs * n_samples * args.repeats;
  std::vector<store::ResultRow> attack_rows(n_items);
  std::vector<store::ResultRow> gap_rows(n_items);
  std::atomic<int> violations{0};
  parallel_items(n_items, threads, [&](int item) {
    const int pair = item / (n_samples * args.repeats);
    const int rest = item % (n_samples * args.repeats);
    const int si = rest / args.repeats;
    const int rep = rest % args.repeats;
    const CertCell& cell = cells[pair * n_samples + si];

    AttackArgs local = atk_args;
    local.epsilon = epsilons[pair];
    local.target_radius = radii[pair];
    attack::AttackConfig atk = build_attack_config(local, w.input_dim);
    const std::uint64_t attack_seed =
        derive_seed(args.attack_seed, pair * 100003 + si, 2 * rep);
    atk.target_seed = derive_seed(args.attack_seed, pair * 100003 + si,
                                  2 * rep + 1);
    const attack::AttackResult res = attack::ifia_l2_attack(
        w, data.features[picked[si]], cfg, atk, attack_seed);

    // Empirical smoothed cosine with the same N on both sides; the x_adv
    // side draws an independent stream so Monte Carlo mismatch stays
    // visible instead of cancelling.
    const attribution::SmoothedAttribution sa_adv =
        attribution::smooth_uniform(
            w, res.x_adv, cfg,
            {radii[pair], args.smoothing_n,
             derive_seed(cell.seed, 0xADu, rep)});
    const double emp_cos =
        metrics::cosine_similarity(cell.sa.estimate, sa_adv.estimate);
    const double bound = cell.cert.value.value_or(0.0);
    const double gap = emp_cos - bound;
    if (gap < 0.0) violations.fetch_add(1);

    store::ResultRow arow;
    arow.run_id = id.run_id;
    arow.sample_index = picked[si];
    arow.repeat = rep;
    arow.kind = "attack";
    arow.dimension = w.input_dim;
    arow.r = radii[pair];
    arow.epsilon = epsilons[pair];
    arow.topk = res.metrics.topk;
    arow.kendall = res.metrics.kendall;
    arow.kendall_variant = args.kendall_variant;
    arow.cosine = res.metrics.cosine;
    arow.delta_norm = res.delta_norm;
    arow.prediction_preserved = res.prediction_preserved;
    arow.attack_seed = attack_seed;
    arow.reason = res.surrogate;
    attack_rows[item] = std::move(arow);

    store::ResultRow grow;
    grow.run_id = id.run_id;
    grow.sample_index = picked[si];
    grow.repeat = rep;
    grow.kind = "gap";
    grow.dimension = w.input_dim;
    grow.r = radii[pair];
    grow.epsilon = epsilons[pair];
    grow.threshold_t = bound;  // the certificate being validated
    grow.value = gap;
    grow.cosine = emp_cos;
    grow.norm_h = cell.sa.norm2;
    grow.m = m.value;
    grow.m_strategy = m.strategy;
    grow.feasible = gap >= 0.0;
    grow.smoothing_seed = cell.seed;
    grow.attack_seed = attack_seed;
    gap_rows[item] = std::move(grow);
  });

  store::emit_results(attack_rows,
                      store::output_format_from_name(args.format),
                      result_file(args.out_dir, "attacks", args.format));
  if (args.gap_report) {
    std::stable_sort(gap_rows.begin(), gap_rows.end(),
                     [](const store::ResultRow& a, const store::ResultRow& b) {
                       return a.value.value_or(0.0) < b.value.value_or(0.0);
                     });
    store::emit_results(gap_rows, store::output_format_from_name(args.format),
                        result_file(args.out_dir, "gaps", args.format));
  }

  double min_gap = std::numeric_limits<double>::infinity();
  for (const store::ResultRow& g : gap_rows) {
    min_gap = std::min(min_gap, g.value.value_or(min_gap));
  }
  std::printf("run_id=%s\nattacks=%d\nviolations=%d\nmin_gap=%.17g\n",
              id.run_id.c_str(), n_items, violations.load(), min_gap);
  if (violations.load() > 0) {
    std::fprintf(stderr,
                 "certificate violation: empirical smoothed cosine fell "
                 "below the bound; reproduction config:\n%s",
                 id.resolved_text.c_str());
    return kExitSoundness;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"certified lower bounds for uniformly smoothed attributions"};
  app.require_subcommand(1);

  // ---- train ----
  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a dense classifier");
  train_cmd->add_option("--config", train_args.config_file,
                        "flat key=value config file");
  train_args.data.add_options(train_cmd);
  train_cmd->add_option("--arch", train_args.arch,
                        "layer sizes, e.g. 64,32,2")->capture_default_str();
  train_cmd->add_option("--act", train_args.activation,
                        "hidden activation: relu | softplus | identity")
      ->capture_default_str();
  train_cmd->add_option("--softplus-beta", train_args.softplus_beta,
                        "softplus sharpness")->capture_default_str();
  train_cmd->add_option("--lr", train_args.learning_rate, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_args.epochs, "training epochs")
      ->capture_default_str();
  train_cmd->add_option("--batch", train_args.batch_size, "batch size")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_args.seed, "training seed")
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out_path, "model output path")
      ->required();

  // ---- certify ----
  CertifyArgs certify_args;
  CLI::App* certify_cmd =
      app.add_subcommand("certify", "compute certificates for samples");
  certify_cmd->add_option("--config", certify_args.config_file,
                          "flat key=value config file");
  certify_args.data.add_options(certify_cmd);
  certify_args.attribution.add_options(certify_cmd);
  certify_args.bound.add_options(certify_cmd);
  certify_cmd->add_option("--model", certify_args.model_path, "model file")
      ->required();
  certify_cmd->add_option("--kind", certify_args.kind,
                          "certificate kind: T | max_eps | min_radius")
      ->capture_default_str();
  certify_cmd->add_option("--samples", certify_args.samples,
                          "number of samples (dataset prefix)")
      ->capture_default_str();
  certify_cmd->add_option("--r", certify_args.radius, "smoothing radius")
      ->capture_default_str();
  certify_cmd->add_option("--eps", certify_args.epsilon, "attack budget")
      ->capture_default_str();
  certify_cmd->add_option("--threshold", certify_args.threshold,
                          "target similarity threshold T")
      ->capture_default_str();
  certify_cmd->add_option("--n", certify_args.smoothing_n,
                          "Monte Carlo smoothing samples")
      ->capture_default_str();
  certify_cmd->add_option("--smooth-seed", certify_args.smooth_seed,
                          "base smoothing seed")->capture_default_str();
  certify_cmd->add_option("--prob-interval", certify_args.prob_alpha,
                          "alpha for the probabilistic interval (0 = off)")
      ->capture_default_str();
  certify_cmd->add_option("--prob-mc", certify_args.prob_mc,
                          "interval Monte Carlo draws")
      ->capture_default_str();
  certify_cmd->add_option("--prob-seed", certify_args.prob_seed,
                          "interval seed")->capture_default_str();
  certify_cmd->add_option("--format", certify_args.format, "csv | jsonl")
      ->capture_default_str();
  certify_cmd->add_option("--out", certify_args.out_path, "row output path")
      ->required();
  certify_cmd->add_option("--threads", certify_args.threads,
                          "worker threads (0 = hardware)")
      ->capture_default_str();

  // ---- sweep ----
  SweepArgs sweep_args;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "grid certificates, table style");
  sweep_cmd->add_option("--config", sweep_args.config_file,
                        "flat key=value config file");
  sweep_args.data.add_options(sweep_cmd);
  sweep_args.attribution.add_options(sweep_cmd);
  sweep_args.bound.add_options(sweep_cmd);
  sweep_cmd->add_option("--model", sweep_args.model_path, "model file")
      ->required();
  sweep_cmd->add_option("--kind", sweep_args.kind,
                        "certificate kind: T | max_eps | min_radius")
      ->capture_default_str();
  sweep_cmd->add_option("--samples", sweep_args.samples,
                        "samples averaged per cell")->capture_default_str();
  sweep_cmd->add_option("--r-grid", sweep_args.r_grid, "radius grid")
      ->capture_default_str();
  sweep_cmd->add_option("--eps-grid", sweep_args.eps_grid, "epsilon grid")
      ->capture_default_str();
  sweep_cmd->add_option("--threshold-grid", sweep_args.threshold_grid,
                        "threshold grid")->capture_default_str();
  sweep_cmd->add_option("--ref-r", sweep_args.ref_radius,
                        "norm_h smoothing radius for min_radius sweeps")
      ->capture_default_str();
  sweep_cmd->add_option("--n", sweep_args.smoothing_n,
                        "Monte Carlo smoothing samples")
      ->capture_default_str();
  sweep_cmd->add_option("--smooth-seed", sweep_args.smooth_seed,
                        "base smoothing seed")->capture_default_str();
  sweep_cmd->add_option("--format", sweep_args.format, "csv | jsonl")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_args.out_path, "long-format output")
      ->required();
  sweep_cmd->add_option("--pivot", sweep_args.pivot_path,
                        "optional pivot-table output");
  sweep_cmd->add_option("--threads", sweep_args.threads,
                        "worker threads (0 = hardware)")
      ->capture_default_str();

  // ---- attack ----
  AttackArgs attack_args;
  CLI::App* attack_cmd =
      app.add_subcommand("attack", "run the l2 attribution attack");
  attack_cmd->add_option("--config", attack_args.config_file,
                         "flat key=value config file");
  attack_args.data.add_options(attack_cmd);
  attack_args.attribution.add_options(attack_cmd);
  attack_cmd->add_option("--model", attack_args.model_path, "model file")
      ->required();
  attack_cmd->add_option("--samples", attack_args.samples, "samples attacked")
      ->capture_default_str();
  attack_cmd->add_option("--repeats", attack_args.repeats,
                         "attacks per sample")->capture_default_str();
  attack_cmd->add_option("--eps", attack_args.epsilon, "l2 budget")
      ->capture_default_str();
  attack_cmd->add_option("--iterations", attack_args.iterations,
                         "attack iterations")->capture_default_str();
  attack_cmd->add_option("--step-size", attack_args.step_size, "step size")
      ->capture_default_str();
  attack_cmd->add_option("--k", attack_args.top_k,
                         "top-k size (0 = max(1, d/8))")
      ->capture_default_str();
  attack_cmd->add_option("--target", attack_args.target,
                         "attacked attribution: plain | smoothed")
      ->capture_default_str();
  attack_cmd->add_option("--nstar", attack_args.nstar,
                         "smoothing samples of the attacked target")
      ->capture_default_str();
  attack_cmd->add_option("--target-r", attack_args.target_radius,
                         "smoothing radius of the attacked target")
      ->capture_default_str();
  attack_cmd->add_option("--grad-mode", attack_args.grad_mode,
                         "numeric | random_search")->capture_default_str();
  attack_cmd->add_option("--fd-step", attack_args.fd_step,
                         "finite-difference step")->capture_default_str();
  attack_cmd->add_option("--dirs", attack_args.directions,
                         "random-search directions per iteration")
      ->capture_default_str();
  attack_cmd->add_flag("--softplus,!--no-softplus", attack_args.softplus,
                       "swap relu for softplus inside the attack loss")
      ->capture_default_str();
  attack_cmd->add_option("--kendall-variant", attack_args.kendall_variant,
                         "standard_tau | paper_concordant_share")
      ->capture_default_str();
  attack_cmd->add_option("--seed", attack_args.seed, "base attack seed")
      ->capture_default_str();
  attack_cmd->add_option("--format", attack_args.format, "csv | jsonl")
      ->capture_default_str();
  attack_cmd->add_option("--out", attack_args.out_path, "row output path")
      ->required();
  attack_cmd->add_option("--threads", attack_args.threads,
                         "worker threads (0 = hardware)")
      ->capture_default_str();

  // ---- validate ----
  ValidateArgs validate_args;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "certify then attack; exit 3 on any certificate violation");
  validate_cmd->add_option("--config", validate_args.config_file,
                           "flat key=value config file");
  validate_args.data.add_options(validate_cmd);
  validate_args.attribution.add_options(validate_cmd);
  validate_args.bound.add_options(validate_cmd);
  validate_cmd->add_option("--profile", validate_args.profile,
                           "named defaults profile (desk)");
  validate_cmd->add_option("--model", validate_args.model_path,
                           "model file (otherwise trains one)");
  validate_cmd->add_option("--arch", validate_args.arch, "layer sizes")
      ->capture_default_str();
  validate_cmd->add_option("--act", validate_args.activation,
                           "hidden activation")->capture_default_str();
  validate_cmd->add_option("--softplus-beta", validate_args.softplus_beta,
                           "softplus sharpness")->capture_default_str();
  validate_cmd->add_option("--lr", validate_args.learning_rate,
                           "learning rate")->capture_default_str();
  validate_cmd->add_option("--epochs", validate_args.epochs, "epochs")
      ->capture_default_str();
  validate_cmd->add_option("--batch", validate_args.batch_size, "batch size")
      ->capture_default_str();
  validate_cmd->add_option("--train-seed", validate_args.train_seed,
                           "training seed")->capture_default_str();
  validate_cmd->add_option("--samples", validate_args.samples,
                           "evaluation samples")->capture_default_str();
  validate_cmd->add_option("--repeats", validate_args.repeats,
                           "attacks per sample")->capture_default_str();
  validate_cmd->add_option("--r", validate_args.r_list,
                           "smoothing radii list")->capture_default_str();
  validate_cmd->add_option("--eps", validate_args.eps_list,
                           "attack budgets list (paired with --r)")
      ->capture_default_str();
  validate_cmd->add_option("--n", validate_args.smoothing_n,
                           "smoothing samples on both sides")
      ->capture_default_str();
  validate_cmd->add_option("--nstar", validate_args.nstar,
                           "attacked-target smoothing samples")
      ->capture_default_str();
  validate_cmd->add_option("--smooth-seed", validate_args.smooth_seed,
                           "certification smoothing seed")
      ->capture_default_str();
  validate_cmd->add_option("--attack-seed", validate_args.attack_seed,
                           "attack seed (independent of smoothing)")
      ->capture_default_str();
  validate_cmd->add_option("--iterations", validate_args.iterations,
                           "attack iterations")->capture_default_str();
  validate_cmd->add_option("--step-size", validate_args.step_size,
                           "attack step size")->capture_default_str();
  validate_cmd->add_option("--k", validate_args.top_k,
                           "top-k size (0 = max(1, d/8))")
      ->capture_default_str();
  validate_cmd->add_option("--target", validate_args.target,
                           "attacked attribution: plain | smoothed")
      ->capture_default_str();
  validate_cmd->add_option("--grad-mode", validate_args.grad_mode,
                           "numeric | random_search")->capture_default_str();
  validate_cmd->add_option("--fd-step", validate_args.fd_step,
                           "finite-difference step")->capture_default_str();
  validate_cmd->add_option("--dirs", validate_args.directions,
                           "random-search directions per iteration")
      ->capture_default_str();
  validate_cmd->add_flag("--softplus,!--no-softplus", validate_args.softplus,
                         "swap relu for softplus inside the attack loss")
      ->capture_default_str();
  validate_cmd->add_option("--kendall-variant",
                           validate_args.kendall_variant,
                           "standard_tau | paper_concordant_share")
      ->capture_default_str();
  validate_cmd->add_option("--threshold", validate_args.threshold,
                           "refuse runs whose eps exceeds the certified "
                           "max epsilon at this threshold (0 = off)")
      ->capture_default_str();
  validate_cmd->add_flag("--gap-report,!--no-gap-report",
                         validate_args.gap_report,
                         "write the sorted (cosine - T) gap report")
      ->capture_default_str();
  validate_cmd->add_option("--format", validate_args.format, "csv | jsonl")
      ->capture_default_str();
  validate_cmd->add_option("--out", validate_args.out_dir,
                           "output directory")->required();
  validate_cmd->add_option("--threads", validate_args.threads,
                           "worker threads (0 = hardware)")
      ->capture_default_str();

  for (CLI::App* sub :
       {train_cmd, certify_cmd, sweep_cmd, attack_cmd, validate_cmd}) {
    take_last_everywhere(sub);
  }

  std::vector<std::string> effective;
  try {
    effective = expand_config_args(app, args);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  }
  std::vector<std::string> reversed(effective.rbegin(), effective.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return run_train(train_args, train_cmd);
    if (certify_cmd->parsed()) return run_certify(certify_args, certify_cmd);
    if (sweep_cmd->parsed()) return run_sweep(sweep_args, sweep_cmd);
    if (attack_cmd->parsed()) return run_attack(attack_args, attack_cmd);
    if (validate_cmd->parsed()) {
      return run_validate(validate_args, validate_cmd);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace attrcert::cli
