// Copyright 2026 The cascade-hybrid Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chb/stats.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/SpecialFunctions>

namespace chb {

VectorXd cascade_click_distribution(const AttractionVector& alpha) {
  require(((alpha.array() >= 0) && (alpha.array() <= 1)).all(),
          "cascade distribution: attraction outside [0,1]");
  const auto K = alpha.size();
  VectorXd p(K + 1);
  double miss = 1.0;
  for (Eigen::Index i = 0; i < K; ++i) {
    p(i) = alpha(i) * miss;
    miss *= 1.0 - alpha(i);
  }
  p(K) = miss;
  return p;
}

std::vector<long> sample_click_histogram(const AttractionVector& alpha, long draws,
                                         Rng& rng) {
  std::vector<long> counts(alpha.size() + 1, 0);
  for (long i = 0; i < draws; ++i) ++counts[sample_click(alpha, rng).click_pos - 1];
  return counts;
}

ChiSquare chi_square_test(const std::vector<long>& observed, const VectorXd& probs) {
  require(static_cast<Eigen::Index>(observed.size()) == probs.size(),
          "chi_square_test: size mismatch");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  require(n > 0, "chi_square_test: no observations");
  ChiSquare out;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = n * probs(i);
    if (expected <= 0) {
      if (observed[i] > 0) {
        out.statistic = std::numeric_limits<double>::infinity();
        out.p_value = 0;
        return out;
      }
      continue;
    }
    const double diff = observed[i] - expected;
    out.statistic += diff * diff / expected;
    ++cells;
  }
  out.dof = std::max(cells - 1, 0);
  out.p_value = out.dof > 0 ? Eigen::numext::igammac(0.5 * out.dof, 0.5 * out.statistic)
                            : 1.0;
  return out;
}

}  // namespace chb
