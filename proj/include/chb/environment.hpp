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

#ifndef CHB_ENVIRONMENT_HPP_
#define CHB_ENVIRONMENT_HPP_

// Simulated cascade user. The attraction of the item at position i mixes
// relevance and topical novelty with a weight lambda the learners never see:
//   alpha_i = lambda z_i' beta* + (1 - lambda) omega_i' theta*.

#include "chb/model.hpp"
#include "chb/policy.hpp"
#include "chb/rng.hpp"

namespace chb {

struct UserModel {
  int id = 0;
  VectorXd theta;  // topic preference
  VectorXd beta;   // relevance preference
  double lambda = 0.5;

  /// ||[theta; beta]||
  double weight_norm() const {
    return std::sqrt(theta.squaredNorm() + beta.squaredNorm());
  }
};

/// Unclamped attraction of item `a` placed under a prefix whose uncovered
/// mass is tracked by `tracker`.
double mixed_attraction(const UserModel& user, const Catalog& catalog, int a,
                        const CoverageTracker<double>& tracker);

void check_user(const UserModel& user, const Catalog& catalog);

/// Per-position attraction of a displayed list, clamped into [0,1].
/// Every truncated entry increments *clamp_count when given.
AttractionVector attraction_vector(const UserModel& user, const RankedList& list,
                                   const Catalog& catalog,
                                   int* clamp_count = nullptr);

/// Scans the list top-down and returns the first position whose Bernoulli
/// draw succeeds; K+1 when none does.
ClickFeedback sample_click(const AttractionVector& alpha, Rng& rng);

struct StepOutcome {
  RankedList list;
  AttractionVector alpha;
  ClickFeedback feedback;
  double expected_reward = 0;
  int clamp_count = 0;

  bool operator==(const StepOutcome& o) const {
    return list == o.list && alpha == o.alpha && feedback == o.feedback &&
           expected_reward == o.expected_reward && clamp_count == o.clamp_count;
  }
};

/// One interaction: select, display, sample the click, learn from it.
StepOutcome run_step(CascadePolicy& policy, const UserModel& user,
                     const Catalog& catalog, int K, Rng& rng);

}  // namespace chb

#endif  // CHB_ENVIRONMENT_HPP_
