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
#include "attrcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "attrcert/geometry.hpp"
#include "attrcert/rng.hpp"
#include "attrcert/specfun.hpp"

namespace attrcert::certify {

namespace {

void check_common(double radius, double norm_h, double upper_bound_m) {
  if (!(radius > 0.0)) throw std::domain_error("certify: radius must be > 0");
  if (!(upper_bound_m > 0.0)) {
    throw std::domain_error("certify: attribution upper bound M must be > 0");
  }
  if (!(norm_h > 0.0)) {
    throw std::domain_error(
        "certify: degenerate attribution, ||h(x)|| = 0 (cosine undefined)");
  }
}

// s = 1 - Z = (norm_h/2M) sqrt(1/T^2 - 1), per the Corollary 1 derivation
// I_z((d+1)/2, 1/2) = Z. Working with s instead of Z keeps full precision as
// Z -> 1, and the swapped-parameter identity
//   1 - inv_I_Z((d+1)/2, 1/2) = inv_I_s(1/2, (d+1)/2)
// yields the quantity the epsilon/radius formulas actually consume without
// a near-one subtraction.
double corollary_s(double norm_h, double upper_bound_m, double threshold) {
  const double spread = std::sqrt(1.0 / (threshold * threshold) - 1.0);
  return (norm_h / (2.0 * upper_bound_m)) * spread;
}

// inv_I_s(1/2, (d+1)/2) = 1 - inv_I_{1-s}((d+1)/2, 1/2)
double one_minus_inverse_beta(double s, int dimension) {
  return specfun::reg_inc_beta_inv(
      s, specfun::BetaParams(0.5, (dimension + 1) * 0.5));
}

}  // namespace

std::string kind_name(CertificateKind k) {
  switch (k) {
    case CertificateKind::kBoundT:
      return "T";
    case CertificateKind::kMaxEpsilon:
      return "max_eps";
    case CertificateKind::kMinRadius:
      return "min_radius";
  }
  return "T";
}

Certificate bound_T(int dimension, double radius, double epsilon,
                    double norm_h, double upper_bound_m,
                    const std::string& m_strategy) {
  check_common(radius, norm_h, upper_bound_m);
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("bound_T: epsilon must be >= 0");
  }
  Certificate cert;
  cert.kind = CertificateKind::kBoundT;
  cert.inputs = {dimension, radius, epsilon, norm_h, upper_bound_m, {}};
  cert.m_strategy = m_strategy;
  if (epsilon > 2.0 * radius) {
    cert.feasible = false;
    cert.reason = "epsilon > 2r: smoothing balls disjoint; bound not applicable";
    return cert;
  }
  const geometry::VolumeRatio ratio =
      geometry::volume_ratio_vU(geometry::BallSpec(dimension, radius), epsilon);
  const double shift = upper_bound_m * ratio.vu_over_vs;
  cert.value = norm_h / std::sqrt(norm_h * norm_h + shift * shift);
  cert.vu_over_vs = ratio.vu_over_vs;
  cert.feasible = true;
  return cert;
}

Certificate max_epsilon(int dimension, double radius, double norm_h,
                        double upper_bound_m, double threshold,
                        const std::string& m_strategy) {
  check_common(radius, norm_h, upper_bound_m);
  if (!(threshold > 0.0) || !(threshold <= 1.0)) {
    throw std::domain_error("max_epsilon: threshold must lie in (0, 1]");
  }
  Certificate cert;
  cert.kind = CertificateKind::kMaxEpsilon;
  cert.inputs = {dimension, radius, 0.0, norm_h, upper_bound_m, threshold};
  cert.m_strategy = m_strategy;
  const double s = corollary_s(norm_h, upper_bound_m, threshold);
  if (s > 1.0) {
    cert.feasible = false;
    cert.reason =
        "Z < 0: the threshold already holds for every epsilon <= 2r";
    return cert;
  }
  cert.value = 2.0 * radius * std::sqrt(one_minus_inverse_beta(s, dimension));
  cert.vu_over_vs = 2.0 * s;
  cert.feasible = true;
  return cert;
}

Certificate min_radius(int dimension, double epsilon, double norm_h,
                       double upper_bound_m, double threshold,
                       const std::string& m_strategy) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("min_radius: epsilon must be > 0");
  }
  check_common(1.0, norm_h, upper_bound_m);  // radius is the unknown here
  if (!(threshold > 0.0) || !(threshold <= 1.0)) {
    throw std::domain_error("min_radius: threshold must lie in (0, 1]");
  }
  Certificate cert;
  cert.kind = CertificateKind::kMinRadius;
  cert.inputs = {dimension, 0.0, epsilon, norm_h, upper_bound_m, threshold};
  cert.m_strategy = m_strategy;
  const double s = corollary_s(norm_h, upper_bound_m, threshold);
  if (s == 0.0) {
    // threshold == 1: only epsilon = 0 certifies similarity 1, so no finite
    // radius works for epsilon > 0.
    cert.feasible = false;
    cert.reason = "Z = 1: threshold 1 requires an infinite smoothing radius";
    return cert;
  }
  if (s > 1.0) {
    cert.feasible = false;
    cert.reason =
        "Z < 0: the threshold already holds at every radius >= epsilon/2";
    return cert;
  }
  const double tail = one_minus_inverse_beta(s, dimension);
  if (tail <= 0.0) {
    cert.feasible = false;
    cert.reason = "inverse beta reached 1: infinite radius required";
    return cert;
  }
  const double r = (epsilon / 2.0) / std::sqrt(tail);
  // Cross-check the inversion before handing the radius out.
  const Certificate check =
      bound_T(dimension, r, epsilon, norm_h, upper_bound_m, m_strategy);
  if (!check.feasible || !(check.value.value() >= threshold - 1e-9)) {
    throw std::runtime_error(
        "min_radius: postcondition failed, bound_T(R) < threshold - 1e-9");
  }
  cert.value = r;
  cert.vu_over_vs = check.vu_over_vs;
  cert.feasible = true;
  return cert;
}

ProbabilisticBound probabilistic_interval(
    const attribution::SmoothedAttribution& sa, int dimension, double radius,
    double epsilon, double upper_bound_m, double alpha,
    std::int64_t mc_samples, std::uint64_t seed) {
  if (sa.sample_count < 2) {
    throw std::domain_error(
        "probabilistic_interval: need >= 2 smoothing samples for variances");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::domain_error("probabilistic_interval: alpha must be in (0,1)");
  }
  if (mc_samples < 2) {
    throw std::domain_error("probabilistic_interval: mc_samples must be >= 2");
  }
  const geometry::VolumeRatio ratio =
      geometry::volume_ratio_vU(geometry::BallSpec(dimension, radius), epsilon);
  const double c = upper_bound_m * ratio.vu_over_vs;
  const double c2 = c * c;
  if (!(c2 > 0.0)) {
    throw std::domain_error(
        "probabilistic_interval: c = (M V_U/V_S)^2 must be > 0 (epsilon > 0)");
  }

  const double q0 = sa.estimate.squaredNorm();
  ProbabilisticBound out;
  out.alpha = alpha;
  out.mc_samples = mc_samples;
  out.point_t = std::sqrt(q0 / (c2 + q0));

  if (sa.per_coord_variance.maxCoeff() == 0.0) {
    out.t1 = out.point_t;
    out.t2 = out.point_t;
    return out;
  }

  const Eigen::VectorXd stddev = sa.per_coord_variance.cwiseSqrt();
  std::vector<double> q_sq(static_cast<std::size_t>(mc_samples));
  // Fixed-size chunks, one Philox stream each: the fill is embarrassingly
  // parallel and the sort erases ordering, so any worker count reproduces
  // the same quantiles.
  constexpr std::int64_t kChunk = 65536;
  for (std::int64_t chunk = 0; chunk * kChunk < mc_samples; ++chunk) {
    Philox rng(seed, static_cast<std::uint64_t>(chunk));
    const std::int64_t begin = chunk * kChunk;
    const std::int64_t end = std::min(mc_samples, begin + kChunk);
    for (std::int64_t s = begin; s < end; ++s) {
      double acc = 0.0;
      for (int i = 0; i < dimension; ++i) {
        const double v = sa.estimate[i] + stddev[i] * rng.next_gaussian();
        acc += v * v;
      }
      q_sq[static_cast<std::size_t>(s)] = acc;
    }
  }
  std::sort(q_sq.begin(), q_sq.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(q_sq.size() - 1);
    const std::size_t k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    if (k + 1 >= q_sq.size()) return q_sq.back();
    return q_sq[k] * (1.0 - frac) + q_sq[k + 1] * frac;
  };
  const double q_lo = quantile(alpha / 2.0);
  const double q_hi = quantile(1.0 - alpha / 2.0);
  out.t1 = std::sqrt(q_lo / (c2 + q_lo));
  out.t2 = std::sqrt(q_hi / (c2 + q_hi));
  return out;
}

}  // namespace attrcert::certify
