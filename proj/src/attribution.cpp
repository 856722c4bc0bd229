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
#include "attrcert/attribution.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>
#include <vector>

#include "attrcert/geometry.hpp"

namespace attrcert::attribution {

namespace {

constexpr int kChunkSize = 4096;

Eigen::VectorXd resolve_baseline(const AttributionConfig& cfg, int dim) {
  if (cfg.ig_baseline.size() == 0) return Eigen::VectorXd::Zero(dim);
  if (cfg.ig_baseline.size() != dim) {
    throw std::invalid_argument("attribution: ig_baseline dimension mismatch");
  }
  return cfg.ig_baseline;
}

// Welford running statistics per coordinate; mergeable in fixed chunk order.
struct RunningStats {
  std::int64_t count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit RunningStats(int dim)
      : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::VectorXd& value) {
    ++count;
    Eigen::VectorXd delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2.array() += delta.array() * (value - mean).array();
  }

  void merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double nab = na + nb;
    Eigen::VectorXd delta = other.mean - mean;
    mean += delta * (nb / nab);
    m2.array() += other.m2.array() + delta.array().square() * (na * nb / nab);
    count += other.count;
  }
};

using NoiseFiller = std::function<void(Philox&, Eigen::VectorXd&)>;

SmoothedAttribution smooth_impl(const model::ModelWeights& w,
                                const Eigen::VectorXd& x,
                                const AttributionConfig& cfg,
                                const NoiseFiller& fill_noise,
                                int sample_count, double radius_record,
                                std::uint64_t seed, int threads) {
  if (sample_count < 1) {
    throw std::invalid_argument("smoothing: sample_count must be >= 1");
  }
  const int dim = w.input_dim;
  const int target = resolve_target_class(w, x, cfg);
  const int n_chunks = (sample_count + kChunkSize - 1) / kChunkSize;

  std::vector<RunningStats> chunk_stats(n_chunks, RunningStats(dim));
  auto run_chunk = [&](int chunk) {
    Philox rng(seed, static_cast<std::uint64_t>(chunk));
    const int begin = chunk * kChunkSize;
    const int end = std::min(sample_count, begin + kChunkSize);
    Eigen::VectorXd noise(dim);
    Eigen::VectorXd sample;
    for (int i = begin; i < end; ++i) {
      fill_noise(rng, noise);
      sample = attribute_with_class(w, x + noise, cfg, target);
      chunk_stats[chunk].add(sample);
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || n_chunks == 1) {
    for (int chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::vector<std::thread> pool;
    const int n_workers = std::min(threads, n_chunks);
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&, t]() {
        for (int chunk = t; chunk < n_chunks; chunk += n_workers) {
          run_chunk(chunk);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  RunningStats total(dim);
  for (const RunningStats& s : chunk_stats) total.merge(s);

  SmoothedAttribution out;
  out.estimate = total.mean;
  if (total.count >= 2) {
    // sample variance / N: the diagonal of D in the probabilistic interval
    out.per_coord_variance = total.m2 / (static_cast<double>(total.count - 1) *
                                         static_cast<double>(total.count));
  } else {
    out.per_coord_variance = Eigen::VectorXd::Zero(dim);
  }
  out.sample_count = sample_count;
  out.radius = radius_record;
  out.seed = seed;
  out.norm2 = out.estimate.norm();
  return out;
}

}  // namespace

std::string method_name(Method m) {
  return m == Method::kSaliency ? "sm" : "ig";
}

Method method_from_name(const std::string& name) {
  if (name == "sm") return Method::kSaliency;
  if (name == "ig") return Method::kIntegratedGradients;
  throw std::invalid_argument("unknown attribution method: " + name);
}

int resolve_target_class(const model::ModelWeights& w, const Eigen::VectorXd& x,
                         const AttributionConfig& cfg) {
  if (cfg.target_class) {
    if (*cfg.target_class < 0 || *cfg.target_class >= w.class_count) {
      throw std::invalid_argument("attribution: target class out of range");
    }
    return *cfg.target_class;
  }
  return model::predicted_class(w, x);
}

Eigen::VectorXd attribute_with_class(const model::ModelWeights& w,
                                     const Eigen::VectorXd& x,
                                     const AttributionConfig& cfg,
                                     int class_index) {
  if (cfg.method == Method::kSaliency) {
    return model::input_gradient(w, x, class_index, cfg.wrt);
  }
  if (cfg.ig_steps < 1) {
    throw std::invalid_argument("attribution: ig_steps must be >= 1");
  }
  const Eigen::VectorXd baseline =
      resolve_baseline(cfg, static_cast<int>(x.size()));
  const Eigen::VectorXd path = x - baseline;
  Eigen::VectorXd mean_grad = Eigen::VectorXd::Zero(x.size());
  model::GradientWorkspace ws;
  Eigen::VectorXd grad;
  for (int k = 0; k < cfg.ig_steps; ++k) {
    const double alpha = (k + 0.5) / cfg.ig_steps;  // midpoint rule
    model::input_gradient(w, baseline + alpha * path, class_index, cfg.wrt, ws,
                          grad);
    mean_grad += grad;
  }
  mean_grad /= static_cast<double>(cfg.ig_steps);
  return path.cwiseProduct(mean_grad);
}

Eigen::VectorXd attribute(const model::ModelWeights& w,
                          const Eigen::VectorXd& x,
                          const AttributionConfig& cfg) {
  return attribute_with_class(w, x, cfg, resolve_target_class(w, x, cfg));
}

SmoothedAttribution smooth_uniform(const model::ModelWeights& w,
                                   const Eigen::VectorXd& x,
                                   const AttributionConfig& cfg,
                                   const SmoothingConfig& smoothing,
                                   int threads) {
  const geometry::BallSpec ball(w.input_dim, smoothing.radius);
  NoiseFiller fill = [&ball](Philox& rng, Eigen::VectorXd& noise) {
    noise = geometry::sample_uniform_ball(ball, rng);
  };
  return smooth_impl(w, x, cfg, fill, smoothing.sample_count, smoothing.radius,
                     smoothing.seed, threads);
}

SmoothedAttribution smooth_gaussian(const model::ModelWeights& w,
                                    const Eigen::VectorXd& x,
                                    const AttributionConfig& cfg, double sigma,
                                    int sample_count, std::uint64_t seed,
                                    int threads) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("smooth_gaussian: sigma must be > 0");
  }
  NoiseFiller fill = [sigma](Philox& rng, Eigen::VectorXd& noise) {
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
      noise[i] = sigma * rng.next_gaussian();
    }
  };
  return smooth_impl(w, x, cfg, fill, sample_count, sigma, seed, threads);
}

UpperBound attribution_upper_bound(const model::ModelWeights& w,
                                   const AttributionConfig& cfg,
                                   const BoundStrategy& strategy) {
  if (std::holds_alternative<LipschitzStrategy>(strategy)) {
    const double lip = model::lipschitz_logit_bound(w);
    if (cfg.method == Method::kSaliency) {
      return UpperBound{lip, "lipschitz"};
    }
    // ||IG(x)||_2 <= L * ||x - x'||_2 over the data domain [0,1]^d.
    const Eigen::VectorXd baseline = resolve_baseline(cfg, w.input_dim);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < baseline.size(); ++i) {
      const double reach = std::max(baseline[i], 1.0 - baseline[i]);
      sq += reach * reach;
    }
    return UpperBound{lip * std::sqrt(sq), "lipschitz"};
  }
  if (const auto* emp = std::get_if<EmpiricalStrategy>(&strategy)) {
    if (emp->probe_count < 100) {
      throw std::invalid_argument(
          "attribution_upper_bound: empirical strategy needs >= 100 probes");
    }
    if (!(emp->scale_factor > 0.0)) {
      throw std::invalid_argument(
          "attribution_upper_bound: scale_factor must be > 0");
    }
    Philox rng(emp->seed);
    Eigen::VectorXd probe(w.input_dim);
    double max_norm = 0.0;
    for (int i = 0; i < emp->probe_count; ++i) {
      for (Eigen::Index j = 0; j < probe.size(); ++j) {
        probe[j] = rng.next_double();
      }
      max_norm = std::max(max_norm, attribute(w, probe, cfg).norm());
    }
    char label[96];
    std::snprintf(label, sizeof(label),
                  "empirical(scale=%g;probes=%d;seed=%llu)", emp->scale_factor,
                  emp->probe_count,
                  static_cast<unsigned long long>(emp->seed));
    return UpperBound{emp->scale_factor * max_norm, label};
  }
  const auto& user = std::get<UserStrategy>(strategy);
  if (!(user.value > 0.0)) {
    throw std::invalid_argument("attribution_upper_bound: user M must be > 0");
  }
  char label[48];
  std::snprintf(label, sizeof(label), "user(%g)", user.value);
  return UpperBound{user.value, label};
}

}  // namespace attrcert::attribution
