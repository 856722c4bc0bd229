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
#ifndef ATTRCERT_GEOMETRY_HPP_
#define ATTRCERT_GEOMETRY_HPP_

#include <Eigen/Dense>
#include <stdexcept>

#include "attrcert/rng.hpp"

namespace attrcert::geometry {

/// An l2 ball of radius r in d dimensions, centered at the origin.
struct BallSpec {
  int dimension;
  double radius;

  BallSpec(int d, double r) : dimension(d), radius(r) {
    if (d < 1) throw std::domain_error("BallSpec: dimension must be >= 1");
    if (!(r > 0.0)) throw std::domain_error("BallSpec: radius must be > 0");
  }
};

/// V_U / V_S for two radius-r balls whose centers are epsilon apart, plus
/// the hyperspherical-cap parameter r - epsilon/2. The absolute ball volume
/// V_S is never materialized; only the ratio enters the certificate, and the
/// d-ball constant would over/underflow at image dimensions.
struct VolumeRatio {
  double vu_over_vs;  // in [0, 2]
  double cap_height;  // r - epsilon/2, >= 0
};

/// Thrown when epsilon > 2r: the two smoothing balls are disjoint beyond the
/// boundary case and the certificate does not apply (the "/" table cells).
class InfeasibleGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Ratio of the symmetric-difference volume of B(0;r) and B(eps*e1;r) to the
/// single-ball volume:
///   V_U/V_S = 2(1 - I_z((d+1)/2, 1/2)),  z = (2r*cap - cap^2)/r^2,
/// evaluated in the reflected form 2*I_{(eps/2r)^2}(1/2, (d+1)/2), which is
/// exact as eps -> 0. Requires 0 <= eps <= 2r.
VolumeRatio volume_ratio_vU(const BallSpec& ball, double epsilon);

/// One point uniform on B(0; r): direction from a normalized d-dimensional
/// standard Gaussian, radius r * u^(1/d) with u uniform on (0, 1].
/// Deterministic given the generator state; an all-zero Gaussian draw is
/// retried.
Eigen::VectorXd sample_uniform_ball(const BallSpec& ball, Philox& rng);

}  // namespace attrcert::geometry

#endif  // ATTRCERT_GEOMETRY_HPP_
