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
#include "attrcert/geometry.hpp"

#include <cmath>
#include <string>

#include "attrcert/specfun.hpp"

namespace attrcert::geometry {

VolumeRatio volume_ratio_vU(const BallSpec& ball, double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("volume_ratio_vU: epsilon must be >= 0");
  }
  const double r = ball.radius;
  if (epsilon > 2.0 * r) {
    throw InfeasibleGeometry(
        "volume_ratio_vU: epsilon > 2r, the smoothing balls are disjoint "
        "(epsilon=" +
        std::to_string(epsilon) + ", r=" + std::to_string(r) + ")");
  }
  const double q = epsilon / (2.0 * r);  // in [0, 1]
  // 1 - I_z(a, b) = I_{1-z}(b, a) with 1 - z = q^2
  const specfun::BetaParams swapped(0.5, (ball.dimension + 1) * 0.5);
  const double ratio =
      2.0 * specfun::reg_inc_beta(std::min(q * q, 1.0), swapped);
  return VolumeRatio{ratio, r - epsilon / 2.0};
}

Eigen::VectorXd sample_uniform_ball(const BallSpec& ball, Philox& rng) {
  const int d = ball.dimension;
  Eigen::VectorXd direction(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) direction[i] = rng.next_gaussian();
    norm = direction.norm();
  } while (norm == 0.0);
  const double u = rng.next_double_open();
  const double radius = ball.radius * std::pow(u, 1.0 / d);
  return direction * (radius / norm);
}

}  // namespace attrcert::geometry
