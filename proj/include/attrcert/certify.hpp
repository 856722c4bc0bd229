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
#ifndef ATTRCERT_CERTIFY_HPP_
#define ATTRCERT_CERTIFY_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "attrcert/attribution.hpp"

namespace attrcert::certify {

enum class CertificateKind { kBoundT, kMaxEpsilon, kMinRadius };

std::string kind_name(CertificateKind k);

/// Everything that went into a certificate, so any value it reports can be
/// re-derived. `threshold` is set for the inverse formulations only.
struct CertificateInputs {
  int dimension = 0;
  double radius = 0.0;
  double epsilon = 0.0;
  double norm_h = 0.0;
  double upper_bound_m = 0.0;
  std::optional<double> threshold;
};

/// Result of one certification query. Infeasibility (epsilon > 2r, or the
/// threshold outside the curve's reachable range) is a first-class outcome,
/// never an exception: value is empty, feasible is false, and reason says
/// why - mirroring the "/" cells of the result tables.
struct Certificate {
  CertificateKind kind;
  CertificateInputs inputs;
  std::optional<double> value;
  std::optional<double> vu_over_vs;
  std::string m_strategy;
  bool feasible = false;
  std::string reason;
};

/// Lower bound on cos(h(x), h(x+delta)) for all ||delta||_2 <= epsilon:
///   T = norm_h / sqrt(norm_h^2 + (M * V_U/V_S)^2).
/// norm_h and M must be positive; norm_h = 0 is a degenerate attribution
/// (cosine undefined) and throws.
Certificate bound_T(int dimension, double radius, double epsilon,
                    double norm_h, double upper_bound_m,
                    const std::string& m_strategy = "");

/// Largest epsilon still certifying cos >= threshold at this radius:
///   epsilon = 2r * sqrt(1 - inv_I_Z((d+1)/2, 1/2)),
///   Z = 1 - (norm_h / 2M) * sqrt(1/T^2 - 1).
/// Z < 0 means the threshold holds for every epsilon <= 2r and no finite
/// maximum below the 2r cutoff is meaningful; reported infeasible.
Certificate max_epsilon(int dimension, double radius, double norm_h,
                        double upper_bound_m, double threshold,
                        const std::string& m_strategy = "");

/// Smallest smoothing radius certifying cos >= threshold at this epsilon:
///   R = (epsilon/2) * (1 - inv_I_Z((d+1)/2, 1/2))^(-1/2).
/// Z = 1 (threshold exactly 1) needs an infinite radius; Z < 0 means every
/// radius >= epsilon/2 already certifies. Both reported infeasible with the
/// reason. The returned R is cross-checked by re-running bound_T.
Certificate min_radius(int dimension, double epsilon, double norm_h,
                       double upper_bound_m, double threshold,
                       const std::string& m_strategy = "");

/// Two-sided (1 - alpha) interval for the Monte Carlo estimate of T.
/// The estimator is modeled as Normal(estimate, diag(per_coord_variance));
/// Q^2 = ||draw||^2 realizations give empirical alpha/2 and 1-alpha/2
/// quantiles q, mapped through t = sqrt(q / (c + q)), c = (M * V_U/V_S)^2.
struct ProbabilisticBound {
  double alpha = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  std::int64_t mc_samples = 0;
  double point_t = 0.0;
};

ProbabilisticBound probabilistic_interval(
    const attribution::SmoothedAttribution& sa, int dimension, double radius,
    double epsilon, double upper_bound_m, double alpha,
    std::int64_t mc_samples, std::uint64_t seed);

}  // namespace attrcert::certify

#endif  // ATTRCERT_CERTIFY_HPP_
