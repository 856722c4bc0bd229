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
#include "attrcert/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace attrcert::metrics {

std::vector<int> topk_indices(const Eigen::VectorXd& values, int k) {
  const int d = static_cast<int>(values.size());
  if (k < 1 || k > d) {
    throw std::invalid_argument("topk: k must lie in [1, d]");
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&values](int a, int b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

double topk_intersection(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                         int k) {
  if (g1.size() != g2.size()) {
    throw std::invalid_argument("topk_intersection: length mismatch");
  }
  const std::vector<int> a = topk_indices(g1, k);
  const std::vector<int> b = topk_indices(g2, k);
  std::size_t shared = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++shared;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(k);
}

std::string kendall_variant_name(KendallVariant v) {
  return v == KendallVariant::kStandardTau ? "standard_tau"
                                           : "paper_concordant_share";
}

KendallVariant kendall_variant_from_name(const std::string& name) {
  if (name == "standard_tau") return KendallVariant::kStandardTau;
  if (name == "paper_concordant_share") {
    return KendallVariant::kPaperConcordantShare;
  }
  throw std::invalid_argument("unknown kendall variant: " + name);
}

double kendall_correlation(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                           KendallVariant variant) {
  const Eigen::Index d = g1.size();
  if (g2.size() != d) {
    throw std::invalid_argument("kendall_correlation: length mismatch");
  }
  if (d < 2) {
    throw std::invalid_argument("kendall_correlation: need length >= 2");
  }
  const double n_pairs = 0.5 * static_cast<double>(d) * (d - 1);
  if (variant == KendallVariant::kPaperConcordantShare) {
    std::int64_t hits = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) {
        if (g1[i] > g1[j] && g2[i] > g2[j]) ++hits;
      }
    }
    return static_cast<double>(hits) / n_pairs;
  }
  // standard tau; a value tie ranks the lower index higher, so every pair is
  // strictly concordant or discordant
  std::int64_t concordant = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const bool first_higher_1 = g1[i] >= g1[j];
      const bool first_higher_2 = g2[i] >= g2[j];
      if (first_higher_1 == first_higher_2) ++concordant;
    }
  }
  const double discordant = n_pairs - static_cast<double>(concordant);
  return (static_cast<double>(concordant) - discordant) / n_pairs;
}

double cosine_similarity(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2) {
  if (g1.size() != g2.size()) {
    throw std::invalid_argument("cosine_similarity: length mismatch");
  }
  const double n1 = g1.norm();
  const double n2 = g2.norm();
  if (n1 == 0.0 || n2 == 0.0) {
    throw std::domain_error("cosine_similarity: zero vector is degenerate");
  }
  return g1.dot(g2) / (n1 * n2);
}

}  // namespace attrcert::metrics
