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
#include "attrcert/attack.hpp"

#include <cmath>
#include <limits>

#include "attrcert/rng.hpp"

namespace attrcert::attack {

namespace {

constexpr double kTemperature = 0.1;
constexpr const char* kSurrogateLabel = "soft_topk_mass(temperature=0.1)";

using LossFn = std::function<double(const Eigen::VectorXd&)>;

// Attribution of the attacked target (plain or seeded-smoothed) on the given
// model, reduced to the soft top-k surrogate. cfg must already pin the
// attributed class for the evaluations to stay a fixed function of y.
LossFn make_surrogate(const model::ModelWeights& w,
                      const attribution::AttributionConfig& cfg,
                      const AttackConfig& atk,
                      const std::vector<int>& clean_topk_set) {
  if (atk.target == AttackTarget::kPlain) {
    return [&w, cfg, clean_topk_set](const Eigen::VectorXd& y) {
      return soft_topk_mass(attribution::attribute(w, y, cfg), clean_topk_set,
                            kTemperature);
    };
  }
  const attribution::SmoothingConfig smoothing{atk.target_radius, atk.nstar,
                                               atk.target_seed};
  return [&w, cfg, smoothing, clean_topk_set](const Eigen::VectorXd& y) {
    return soft_topk_mass(
        attribution::smooth_uniform(w, y, cfg, smoothing).estimate,
        clean_topk_set, kTemperature);
  };
}

Eigen::VectorXd random_search_direction(const LossFn& loss,
                                        const Eigen::VectorXd& y,
                                        const AttackConfig& atk, Philox& rng) {
  const double base = loss(y);
  double best = base;
  Eigen::VectorXd best_dir = Eigen::VectorXd::Zero(y.size());
  Eigen::VectorXd dir(y.size());
  for (int probe = 0; probe < atk.directions_per_iter; ++probe) {
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      dir[i] = rng.next_gaussian();
    }
    const double norm = dir.norm();
    if (norm == 0.0) continue;
    dir /= norm;
    const double value = loss(y + atk.step_size * dir);
    if (value < best) {
      best = value;
      best_dir = -dir;  // the attack steps along -direction
    }
  }
  return best_dir;
}

void project_l2(Eigen::VectorXd& delta, double epsilon) {
  const double norm = delta.norm();
  if (norm > epsilon) {
    delta *= (epsilon > 0.0 ? epsilon / norm : 0.0);
  }
}

void check_config(const AttackConfig& atk, int dimension) {
  if (!(atk.epsilon >= 0.0)) {
    throw std::invalid_argument("attack: epsilon must be >= 0");
  }
  if (atk.iterations < 1) {
    throw std::invalid_argument("attack: iterations must be >= 1");
  }
  if (!(atk.step_size > 0.0)) {
    throw std::invalid_argument("attack: step_size must be > 0");
  }
  if (atk.top_k < 1 || atk.top_k > dimension) {
    throw std::invalid_argument("attack: top_k must lie in [1, d]");
  }
  if (atk.target == AttackTarget::kSmoothed) {
    if (atk.nstar < 1) throw std::invalid_argument("attack: nstar must be >= 1");
    if (!(atk.target_radius > 0.0)) {
      throw std::invalid_argument("attack: target_radius must be > 0");
    }
  }
}

}  // namespace

std::string grad_mode_name(GradMode m) {
  return m == GradMode::kNumeric ? "numeric" : "random_search";
}

GradMode grad_mode_from_name(const std::string& name) {
  if (name == "numeric") return GradMode::kNumeric;
  if (name == "random_search") return GradMode::kRandomSearch;
  throw std::invalid_argument("unknown grad mode: " + name);
}

Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss,
    const Eigen::VectorXd& x, double fd_step) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + fd_step;
    const double up = loss(probe);
    probe[i] = x[i] - fd_step;
    const double down = loss(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * fd_step);
  }
  return grad;
}

double soft_topk_mass(const Eigen::VectorXd& attribution_values,
                      const std::vector<int>& clean_topk_set,
                      double temperature) {
  const double peak = attribution_values.maxCoeff();
  double total = 0.0;
  for (Eigen::Index i = 0; i < attribution_values.size(); ++i) {
    total += std::exp((attribution_values[i] - peak) / temperature);
  }
  double mass = 0.0;
  for (int idx : clean_topk_set) {
    mass += std::exp((attribution_values[idx] - peak) / temperature);
  }
  return mass / total;
}

Eigen::VectorXd gradient_of_attack_loss(
    const model::ModelWeights& w, const Eigen::VectorXd& x_current,
    const std::vector<int>& clean_topk_set,
    const attribution::AttributionConfig& cfg, const AttackConfig& atk,
    std::uint64_t seed) {
  const model::ModelWeights attack_model =
      atk.softplus ? model::softplus_substitute(w) : w;
  const LossFn loss = make_surrogate(attack_model, cfg, atk, clean_topk_set);
  if (atk.grad_mode == GradMode::kNumeric) {
    if (x_current.size() > 4096) {
      throw std::invalid_argument(
          "gradient_of_attack_loss: numeric mode costs O(d) loss evaluations "
          "and is rejected for d > 4096; use random_search");
    }
    return finite_difference_gradient(loss, x_current, atk.fd_step);
  }
  Philox rng(seed);
  return random_search_direction(loss, x_current, atk, rng);
}

AttackResult ifia_l2_attack(const model::ModelWeights& w,
                            const Eigen::VectorXd& x,
                            const attribution::AttributionConfig& cfg,
                            const AttackConfig& atk, std::uint64_t seed) {
  check_config(atk, static_cast<int>(x.size()));

  const model::ForwardResult clean_forward = model::forward(w, x);
  Eigen::Index clean_class_idx = 0;
  clean_forward.logits.maxCoeff(&clean_class_idx);
  const int clean_class = static_cast<int>(clean_class_idx);
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < clean_forward.logits.size(); ++i) {
    if (i != clean_class_idx) second = std::max(second, clean_forward.logits[i]);
  }
  if (!(clean_forward.logits[clean_class_idx] > second)) {
    throw std::invalid_argument(
        "ifia_l2_attack: input is not confidently classified (margin <= 0)");
  }

  // Pin the attributed class for the duration of the attack; the target
  // function must stay the same on both sides of the comparison.
  attribution::AttributionConfig pinned = cfg;
  pinned.target_class = clean_class;

  const model::ModelWeights attack_model =
      atk.softplus ? model::softplus_substitute(w) : w;

  // Clean target attribution on the real model: the metrics baseline.
  const auto eval_real = [&](const Eigen::VectorXd& y) {
    if (atk.target == AttackTarget::kPlain) {
      return attribution::attribute(w, y, pinned);
    }
    const attribution::SmoothingConfig smoothing{atk.target_radius, atk.nstar,
                                                 atk.target_seed};
    return attribution::smooth_uniform(w, y, pinned, smoothing).estimate;
  };
  const Eigen::VectorXd clean_attr = eval_real(x);
  const std::vector<int> clean_topk =
      metrics::topk_indices(clean_attr, atk.top_k);

  const LossFn loss = make_surrogate(attack_model, pinned, atk, clean_topk);

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd best_delta = delta;
  double best_loss = loss(x);
  int iterations_run = 0;

  for (int iter = 0; iter < atk.iterations; ++iter) {
    ++iterations_run;
    const Eigen::VectorXd y = x + delta;
    Eigen::VectorXd direction;
    if (atk.grad_mode == GradMode::kNumeric) {
      if (x.size() > 4096) {
        throw std::invalid_argument(
            "ifia_l2_attack: numeric grad mode rejected for d > 4096");
      }
      direction = finite_difference_gradient(loss, y, atk.fd_step);
    } else {
      Philox rng(derive_seed(seed, 0x5A3C, iter));
      direction = random_search_direction(loss, y, atk, rng);
    }
    const double dir_norm = direction.norm();
    if (dir_norm == 0.0 || !direction.allFinite()) continue;
    direction /= dir_norm;

    double step = atk.step_size;
    bool accepted = false;
    Eigen::VectorXd candidate;
    for (int attempt = 0; attempt <= 5; ++attempt) {
      candidate = delta - step * direction;
      project_l2(candidate, atk.epsilon);
      if (model::predicted_class(w, x + candidate) == clean_class) {
        accepted = true;
        break;
      }
      step *= 0.5;  // label flipped; halve and retry
    }
    if (!accepted) continue;

    delta = candidate;
    const double value = loss(x + delta);
    if (value < best_loss) {
      best_loss = value;
      best_delta = delta;
    }
  }

  AttackResult result;
  result.x_adv = x + best_delta;
  result.delta_norm = best_delta.norm();
  result.prediction_preserved =
      model::predicted_class(w, result.x_adv) == clean_class;
  result.iterations_used = iterations_run;
  result.final_surrogate = best_loss;
  result.surrogate = kSurrogateLabel;

  const Eigen::VectorXd adv_attr = eval_real(result.x_adv);
  result.metrics.topk =
      metrics::topk_intersection(clean_attr, adv_attr, atk.top_k);
  result.metrics.kendall =
      metrics::kendall_correlation(clean_attr, adv_attr, atk.kendall_variant);
  result.metrics.cosine = metrics::cosine_similarity(clean_attr, adv_attr);
  return result;
}

}  // namespace attrcert::attack
