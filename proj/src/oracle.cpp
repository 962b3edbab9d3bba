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

#include "chb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace chb {

RankedList greedy_benchmark(const UserModel& user, const Catalog& catalog, int K) {
  check_user(user, catalog);
  const int L = catalog.size();
  require(K >= 1 && K <= L, "greedy_benchmark: K must lie in [1, L]");
  RankedList list;
  std::vector<bool> taken(L, false);
  CoverageTracker<double> tracker(catalog.topic_dim());
  for (int k = 0; k < K; ++k) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < L; ++a) {
      if (taken[a]) continue;
      const double score = mixed_attraction(user, catalog, a, tracker);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    taken[best] = true;
    list.positions.push_back(best);
    tracker.add(catalog.topics().col(best));
  }
  return list;
}

double eta(int K, double alpha_max) {
  require(K >= 1, "eta: K must be positive");
  require(alpha_max >= 0 && alpha_max <= 1, "eta: alpha_max must lie in [0,1]");
  const double factor =
      std::max(1.0 / K, 1.0 - 0.5 * (K - 1) * alpha_max);
  return (1.0 - 1.0 / std::numbers::e) * factor;
}

double alpha_max(const UserModel& user, const Catalog& catalog) {
  check_user(user, catalog);
  const CoverageTracker<double> empty(catalog.topic_dim());
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < catalog.size(); ++a)
    best = std::max(best, mixed_attraction(user, catalog, a, empty));
  return best;
}

double list_reward(const UserModel& user, const Catalog& catalog,
                   const RankedList& list) {
  return expected_list_reward(attraction_vector(user, list, catalog));
}

OptimalList brute_force_optimal(const UserModel& user, const Catalog& catalog,
                                int K, std::uint64_t cap) {
  check_user(user, catalog);
  const int L = catalog.size();
  require(K >= 1 && K <= L, "brute_force_optimal: K must lie in [1, L]");
  std::uint64_t count = 1;
  for (int i = 0; i < K; ++i) {
    count *= static_cast<std::uint64_t>(L - i);
    require(count <= cap, "brute_force_optimal: too many permutations");
  }

  // Depth-first over K-permutations, carrying the prefix coverage so each
  // leaf costs O(d).
  OptimalList best{{}, -1.0};
  std::vector<int> prefix;
  std::vector<bool> used(L, false);
  auto recurse = [&](auto&& self, const CoverageTracker<double>& tracker,
                     double miss) -> void {
    if (static_cast<int>(prefix.size()) == K) {
      const double reward = 1.0 - miss;
      if (reward > best.reward) best = {RankedList{prefix}, reward};
      return;
    }
    for (int a = 0; a < L; ++a) {
      if (used[a]) continue;
      const double alpha =
          std::clamp(mixed_attraction(user, catalog, a, tracker), 0.0, 1.0);
      CoverageTracker<double> next = tracker;
      next.add(catalog.topics().col(a));
      used[a] = true;
      prefix.push_back(a);
      self(self, next, miss * (1.0 - alpha));
      prefix.pop_back();
      used[a] = false;
    }
  };
  recurse(recurse, CoverageTracker<double>(catalog.topic_dim()), 1.0);
  return best;
}

double per_step_regret(const UserModel& user, const Catalog& catalog, int K,
                       const RankedList& displayed) {
  const RankedList reference = greedy_benchmark(user, catalog, K);
  return list_reward(user, catalog, reference) -
         list_reward(user, catalog, displayed);
}

BenchmarkResult benchmark(const UserModel& user, const Catalog& catalog, int K,
                          bool with_optimal) {
  BenchmarkResult r;
  r.greedy_list = greedy_benchmark(user, catalog, K);
  r.greedy_reward = list_reward(user, catalog, r.greedy_list);
  r.eta = eta(K, std::clamp(alpha_max(user, catalog), 0.0, 1.0));
  if (with_optimal) {
    auto opt = brute_force_optimal(user, catalog, K);
    r.optimal_list = std::move(opt.list);
    r.optimal_reward = opt.reward;
  }
  return r;
}

}  // namespace chb
