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

#include "chb/environment.hpp"

#include <algorithm>

namespace chb {

void check_user(const UserModel& user, const Catalog& catalog) {
  require(user.theta.size() == catalog.topic_dim() &&
              user.beta.size() == catalog.rel_dim(),
          "user model does not match catalog dimensions");
  require(user.lambda >= 0 && user.lambda <= 1, "lambda must lie in [0,1]");
}

double mixed_attraction(const UserModel& user, const Catalog& catalog, int a,
                        const CoverageTracker<double>& tracker) {
  const double rel = catalog.relevance().col(a).dot(user.beta);
  const double div = tracker.gain(catalog.topics().col(a)).dot(user.theta);
  return user.lambda * rel + (1.0 - user.lambda) * div;
}

AttractionVector attraction_vector(const UserModel& user, const RankedList& list,
                                   const Catalog& catalog, int* clamp_count) {
  check_user(user, catalog);
  validate_list(list, catalog.size());
  AttractionVector alpha(list.size());
  CoverageTracker<double> tracker(catalog.topic_dim());
  int clamps = 0;
  for (int i = 0; i < list.size(); ++i) {
    const double raw = mixed_attraction(user, catalog, list[i], tracker);
    const double clamped = std::clamp(raw, 0.0, 1.0);
    if (clamped != raw) ++clamps;
    alpha(i) = clamped;
    tracker.add(catalog.topics().col(list[i]));
  }
  if (clamp_count) *clamp_count += clamps;
  return alpha;
}

ClickFeedback sample_click(const AttractionVector& alpha, Rng& rng) {
  require(((alpha.array() >= 0) && (alpha.array() <= 1)).all(),
          "sample_click: attraction outside [0,1]");
  const int K = static_cast<int>(alpha.size());
  for (int i = 0; i < K; ++i)
    if (rng.bernoulli(alpha(i))) return {i + 1};
  return {K + 1};
}

StepOutcome run_step(CascadePolicy& policy, const UserModel& user,
                     const Catalog& catalog, int K, Rng& rng) {
  StepOutcome out;
  out.list = policy.select(K);
  out.alpha = attraction_vector(user, out.list, catalog, &out.clamp_count);
  out.feedback = sample_click(out.alpha, rng);
  out.expected_reward = expected_list_reward(out.alpha);
  policy.update(out.list, out.feedback);
  return out;
}

}  // namespace chb
