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
#ifndef ATTRCERT_ATTACK_HPP_
#define ATTRCERT_ATTACK_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "attrcert/attribution.hpp"
#include "attrcert/metrics.hpp"
#include "attrcert/model.hpp"

namespace attrcert::attack {

enum class AttackTarget { kPlain, kSmoothed };
enum class GradMode { kNumeric, kRandomSearch };

std::string grad_mode_name(GradMode m);
GradMode grad_mode_from_name(const std::string& name);

struct AttackConfig {
  double epsilon = 0.5;       // l2 budget
  int iterations = 200;       // PGD-like steps
  double step_size = 0.1;
  int top_k = 1;
  AttackTarget target = AttackTarget::kPlain;
  int nstar = 300;            // smoothing samples for the attacked target
  double target_radius = 0.5; // smoothing radius when target is smoothed
  /// Seed of the attacked target's smoothing noise. Held fixed for the whole
  /// attack so the surrogate is one deterministic function of the iterate.
  std::uint64_t target_seed = 0;
  GradMode grad_mode = GradMode::kNumeric;
  double fd_step = 1e-3;      // central-difference step (numeric mode)
  int directions_per_iter = 8;  // probes per step (random-search mode)
  /// Swap relu for softplus inside the attack's loss evaluations; the final
  /// metrics are always computed on the unmodified model.
  bool softplus = true;
  metrics::KendallVariant kendall_variant = metrics::KendallVariant::kStandardTau;
};

struct AttackMetrics {
  double topk = 0.0;
  double kendall = 0.0;
  double cosine = 0.0;
};

struct AttackResult {
  Eigen::VectorXd x_adv;
  double delta_norm = 0.0;
  bool prediction_preserved = false;
  AttackMetrics metrics;
  int iterations_used = 0;
  double final_surrogate = 0.0;
  /// Which differentiable stand-in for top-k intersection was minimized.
  std::string surrogate;
};

/// l2 attribution attack in the IFIA mold: iteratively perturbs x to push
/// attribution mass out of the clean top-k index set, projecting each step
/// back onto the epsilon ball and rejecting (halving, up to 5 retries) any
/// step that would flip the predicted label. Returns the iterate with the
/// lowest surrogate among prediction-preserving iterates; if no perturbation
/// preserves the prediction the result is x itself with identity metrics.
/// Requires x to be classified with a positive margin.
AttackResult ifia_l2_attack(const model::ModelWeights& w,
                            const Eigen::VectorXd& x,
                            const attribution::AttributionConfig& cfg,
                            const AttackConfig& atk, std::uint64_t seed);

/// Descent direction for the surrogate loss at x_current. numeric: central
/// finite differences per coordinate (O(d) loss evaluations; rejected above
/// d = 4096). random_search: the best of directions_per_iter random unit
/// probes, or zero if none improves.
Eigen::VectorXd gradient_of_attack_loss(
    const model::ModelWeights& w, const Eigen::VectorXd& x_current,
    const std::vector<int>& clean_topk_set,
    const attribution::AttributionConfig& cfg, const AttackConfig& atk,
    std::uint64_t seed);

/// Soft top-k surrogate: softmax(g / temperature) mass on the clean top-k
/// index set. Exposed for the gradient routine and its tests.
double soft_topk_mass(const Eigen::VectorXd& attribution_values,
                      const std::vector<int>& clean_topk_set,
                      double temperature);

/// Central-difference gradient of an arbitrary scalar loss; the numeric
/// grad mode is this applied to the attack surrogate.
Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const Eigen::VectorXd& x, double fd_step);

}  // namespace attrcert::attack

#endif  // ATTRCERT_ATTACK_HPP_
