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
#ifndef ATTRCERT_METRICS_HPP_
#define ATTRCERT_METRICS_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace attrcert::metrics {

/// Indices of the k largest entries, by value with index-ascending
/// tie-break. Sorted ascending by index in the result.
std::vector<int> topk_indices(const Eigen::VectorXd& values, int k);

/// |topk(g1) ∩ topk(g2)| / k.
double topk_intersection(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                         int k);

enum class KendallVariant {
  /// (concordant - discordant) / (d(d-1)/2), value ties broken by index
  /// (lower index ranks higher, matching the top-k tie-break). Range [-1,1].
  kStandardTau,
  /// The literal concordant-pair share
  ///   (2/(d(d-1))) * sum_{i<j} 1{g1_i > g1_j} 1{g2_i > g2_j},
  /// counting only pairs strictly ordered the same way with the lower index
  /// on top. Range [0,1].
  kPaperConcordantShare,
};

std::string kendall_variant_name(KendallVariant v);
KendallVariant kendall_variant_from_name(const std::string& name);

double kendall_correlation(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                           KendallVariant variant);

/// g1 . g2 / (||g1|| ||g2||); throws on a zero vector.
double cosine_similarity(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2);

}  // namespace attrcert::metrics

#endif  // ATTRCERT_METRICS_HPP_
