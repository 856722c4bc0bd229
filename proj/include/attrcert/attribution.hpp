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
#ifndef ATTRCERT_ATTRIBUTION_HPP_
#define ATTRCERT_ATTRIBUTION_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "attrcert/model.hpp"

namespace attrcert::attribution {

enum class Method { kSaliency, kIntegratedGradients };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct AttributionConfig {
  Method method = Method::kSaliency;
  /// Class whose output is attributed; empty means the class predicted at
  /// the input being attributed.
  std::optional<int> target_class;
  int ig_steps = 32;
  /// Integrated-gradients baseline x'; empty means all-zeros.
  Eigen::VectorXd ig_baseline;
  model::Wrt wrt = model::Wrt::kLogit;
};

struct SmoothingConfig {
  double radius;
  int sample_count;
  std::uint64_t seed;
};

/// Monte Carlo estimate of the smoothed attribution, with the per-coordinate
/// empirical variance of the mean (sample variance / N) that the
/// probabilistic certificate interval consumes as its diagonal covariance.
struct SmoothedAttribution {
  Eigen::VectorXd estimate;
  Eigen::VectorXd per_coord_variance;
  int sample_count = 0;
  double radius = 0.0;
  std::uint64_t seed = 0;
  double norm2 = 0.0;
};

int resolve_target_class(const model::ModelWeights& w, const Eigen::VectorXd& x,
                         const AttributionConfig& cfg);

/// g(x): the input gradient for saliency maps, or the midpoint-rule
/// integrated gradients (x - x') .* mean_k grad f(x' + a_k (x - x')),
/// a_k = (k - 1/2)/m.
Eigen::VectorXd attribute(const model::ModelWeights& w,
                          const Eigen::VectorXd& x,
                          const AttributionConfig& cfg);

/// Same with the attributed class pinned by the caller. Smoothing and the
/// attack use this so that every noisy evaluation differentiates one fixed
/// output, keeping g a fixed function over the whole smoothing ball.
Eigen::VectorXd attribute_with_class(const model::ModelWeights& w,
                                     const Eigen::VectorXd& x,
                                     const AttributionConfig& cfg,
                                     int class_index);

/// Mean of g over x + eta with eta uniform on the l2 ball of the given
/// radius. The attributed class is resolved once at x. Samples are drawn in
/// fixed-size chunks, each from its own Philox stream, and chunk statistics
/// are merged in chunk order, so the result is identical for any thread
/// count.
SmoothedAttribution smooth_uniform(const model::ModelWeights& w,
                                   const Eigen::VectorXd& x,
                                   const AttributionConfig& cfg,
                                   const SmoothingConfig& smoothing,
                                   int threads = 1);

/// Gaussian-noise baseline (SmoothGrad-style), eta ~ N(0, sigma^2 I).
SmoothedAttribution smooth_gaussian(const model::ModelWeights& w,
                                    const Eigen::VectorXd& x,
                                    const AttributionConfig& cfg, double sigma,
                                    int sample_count, std::uint64_t seed,
                                    int threads = 1);

struct LipschitzStrategy {};

struct EmpiricalStrategy {
  double scale_factor = 2.0;
  int probe_count = 10000;
  std::uint64_t seed = 0;
};

struct UserStrategy {
  double value;
};

using BoundStrategy =
    std::variant<LipschitzStrategy, EmpiricalStrategy, UserStrategy>;

struct UpperBound {
  double value;
  std::string strategy;  // recorded verbatim in every certificate
};

/// An upper bound M on ||g||_2, per strategy:
///  - lipschitz: the product of layer spectral norms for saliency maps;
///    for integrated gradients, scaled by max_{x in [0,1]^d} ||x - x'||_2
///    (Cauchy-Schwarz on the path-mean gradient).
///  - empirical: scale_factor * max ||g|| over probe_count uniform-domain
///    probes (heuristic; flagged in the strategy string). probe_count >= 100.
///  - user: passthrough.
UpperBound attribution_upper_bound(const model::ModelWeights& w,
                                   const AttributionConfig& cfg,
                                   const BoundStrategy& strategy);

}  // namespace attrcert::attribution

#endif  // ATTRCERT_ATTRIBUTION_HPP_
