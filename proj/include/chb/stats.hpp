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

#ifndef CHB_STATS_HPP_
#define CHB_STATS_HPP_

#include <vector>

#include "chb/environment.hpp"

namespace chb {

/// P(c = i) = alpha_i prod_{j<i} (1 - alpha_j) for i = 1..K, then
/// P(c = K+1) = prod_j (1 - alpha_j).
VectorXd cascade_click_distribution(const AttractionVector& alpha);

/// Counts of sampled click positions 1..K+1 over `draws` samples.
std::vector<long> sample_click_histogram(const AttractionVector& alpha, long draws,
                                         Rng& rng);

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

/// Pearson goodness of fit of observed counts against expected
/// probabilities. Cells with zero expected probability must be empty and are
/// left out of the degrees of freedom.
ChiSquare chi_square_test(const std::vector<long>& observed, const VectorXd& probs);

}  // namespace chb

#endif  // CHB_STATS_HPP_
