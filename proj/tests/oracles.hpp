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
// Test-only oracles, kept independent of the library implementations they
// check: the beta CDF comes from adaptive quadrature of the density (with
// sqrt substitutions so the a,b >= 0.5 endpoint singularities integrate
// cleanly), ball volumes from rejection-sampling Monte Carlo, and the rank
// metrics from direct pair/set enumeration.
#ifndef ATTRCERT_TESTS_ORACLES_HPP_
#define ATTRCERT_TESTS_ORACLES_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "attrcert/rng.hpp"

namespace oracles {

inline double adaptive_simpson_impl(const std::function<double(double)>& f,
                                    double a, double b, double fa, double fm,
                                    double fb, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, tol * 0.5,
                               depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, tol * 0.5,
                               depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, 60);
}

/// Scaled Beta(a,b) log-density, without the normalizer.
inline double log_beta_kernel(double t, double a, double b) {
  return (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t);
}

/// integral of t^(a-1) (1-t)^(b-1) over [0, x], scaled by e^(-log_scale).
/// Split at 1/2 with substitutions t = s^2 (left) and t = 1 - u^2 (right).
inline double scaled_beta_mass(double x, double a, double b,
                               double log_scale) {
  double total = 0.0;
  const double left_end = std::min(x, 0.5);
  if (left_end > 0.0) {
    auto left = [&](double s) -> double {
      if (s <= 0.0) {
        // integrand 2 s^(2a-1) (1-s^2)^(b-1): zero unless 2a-1 == 0
        return (2.0 * a - 1.0 == 0.0) ? 2.0 * std::exp(-log_scale) : 0.0;
      }
      return 2.0 * std::exp((2.0 * a - 1.0) * std::log(s) +
                            (b - 1.0) * std::log1p(-s * s) - log_scale);
    };
    total += adaptive_simpson(left, 0.0, std::sqrt(left_end), 1e-15);
  }
  if (x > 0.5) {
    auto right = [&](double u) -> double {
      if (u <= 0.0) {
        return (2.0 * b - 1.0 == 0.0) ? 2.0 * std::exp(-log_scale) : 0.0;
      }
      return 2.0 * std::exp((a - 1.0) * std::log1p(-u * u) +
                            (2.0 * b - 1.0) * std::log(u) - log_scale);
    };
    total += adaptive_simpson(right, std::sqrt(1.0 - x), std::sqrt(0.5),
                              1e-15);
  }
  return total;
}

/// Beta(a,b) CDF at x by quadrature only; shares no code with the library's
/// continued-fraction path (not even the log-gamma normalizer).
inline double beta_cdf_quadrature(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double mode = 0.5;
  if (a + b > 2.0) {
    mode = std::clamp((a - 1.0) / (a + b - 2.0), 1e-9, 1.0 - 1e-9);
  }
  const double log_scale = log_beta_kernel(mode, a, b);
  const double denom = scaled_beta_mass(1.0, a, b, log_scale);
  const double numer = scaled_beta_mass(x, a, b, log_scale);
  return numer / denom;
}

/// Monte Carlo estimate of V_symdiff / V_S for two radius-r balls at center
/// distance eps, d in {2,3}; also reports the standard error of the ratio.
inline double mc_symdiff_ratio(int d, double r, double eps, std::int64_t n,
                               std::uint64_t seed, double* standard_error) {
  attrcert::Philox rng(seed);
  std::int64_t hits = 0;
  std::vector<double> point(d);
  double box_volume = (2.0 * r + eps) * std::pow(2.0 * r, d - 1);
  for (std::int64_t s = 0; s < n; ++s) {
    point[0] = -r + (2.0 * r + eps) * rng.next_double();
    for (int i = 1; i < d; ++i) point[i] = -r + 2.0 * r * rng.next_double();
    double sq_a = 0.0, sq_b = 0.0;
    for (int i = 0; i < d; ++i) {
      sq_a += point[i] * point[i];
      const double shifted = (i == 0) ? point[i] - eps : point[i];
      sq_b += shifted * shifted;
    }
    const bool in_a = sq_a <= r * r;
    const bool in_b = sq_b <= r * r;
    if (in_a != in_b) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double unit_ball = (d == 2) ? M_PI : 4.0 * M_PI / 3.0;
  const double ball_volume = unit_ball * std::pow(r, d);
  if (standard_error != nullptr) {
    *standard_error =
        box_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) /
        ball_volume;
  }
  return p * box_volume / ball_volume;
}

/// Top-k intersection by full stable argsort; independent of the library's
/// partial_sort route.
inline double bf_topk_intersection(const Eigen::VectorXd& g1,
                                   const Eigen::VectorXd& g2, int k) {
  auto top_set = [k](const Eigen::VectorXd& g) {
    std::vector<int> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&g](int a, int b) { return g[a] > g[b]; });
    return std::vector<int>(order.begin(), order.begin() + k);
  };
  const std::vector<int> a = top_set(g1);
  const std::vector<int> b = top_set(g2);
  int shared = 0;
  for (int ia : a) {
    for (int ib : b) {
      if (ia == ib) ++shared;
    }
  }
  return static_cast<double>(shared) / k;
}

inline double bf_kendall_standard(const Eigen::VectorXd& g1,
                                  const Eigen::VectorXd& g2) {
  const int d = static_cast<int>(g1.size());
  double concordant = 0.0, discordant = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (j <= i) continue;
      // lower index ranks higher on value ties
      const int s1 = (g1[i] > g1[j] || g1[i] == g1[j]) ? 1 : -1;
      const int s2 = (g2[i] > g2[j] || g2[i] == g2[j]) ? 1 : -1;
      if (s1 * s2 > 0) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  return (concordant - discordant) / (0.5 * d * (d - 1));
}

inline double bf_concordant_share(const Eigen::VectorXd& g1,
                                  const Eigen::VectorXd& g2) {
  const int d = static_cast<int>(g1.size());
  double hits = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (g1[i] > g1[j] && g2[i] > g2[j]) hits += 1.0;
    }
  }
  return 2.0 * hits / (static_cast<double>(d) * (d - 1));
}

}  // namespace oracles

#endif  // ATTRCERT_TESTS_ORACLES_HPP_
