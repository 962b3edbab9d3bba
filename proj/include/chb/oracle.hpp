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

#ifndef CHB_ORACLE_HPP_
#define CHB_ORACLE_HPP_

#include <cstdint>
#include <optional>

#include "chb/environment.hpp"

namespace chb {

/// Position-by-position argmax of the true attraction given the items
/// already placed; lowest id wins ties. This is the regret reference.
RankedList greedy_benchmark(const UserModel& user, const Catalog& catalog, int K);

/// (1 - 1/e) max{1/K, 1 - (K-1)/2 alpha_max}: the greedy benchmark's
/// guaranteed fraction of the optimal expected reward.
double eta(int K, double alpha_max);

/// max_a of the item attraction with an empty prefix.
double alpha_max(const UserModel& user, const Catalog& catalog);

/// Expected reward of the list as shown to the user.
double list_reward(const UserModel& user, const Catalog& catalog,
                   const RankedList& list);

struct OptimalList {
  RankedList list;
  double reward = 0;
};

inline constexpr std::uint64_t kDefaultPermutationCap = 1'000'000;

/// Exhaustive search over all K-permutations. Throws InvalidInput when
/// L!/(L-K)! exceeds `cap`.
OptimalList brute_force_optimal(const UserModel& user, const Catalog& catalog,
                                int K, std::uint64_t cap = kDefaultPermutationCap);

/// Expected reward of the greedy benchmark minus that of `displayed`.
/// Negative when the displayed list beats the benchmark.
double per_step_regret(const UserModel& user, const Catalog& catalog, int K,
                       const RankedList& displayed);

struct BenchmarkResult {
  RankedList greedy_list;
  double greedy_reward = 0;
  double eta = 0;
  std::optional<RankedList> optimal_list;
  std::optional<double> optimal_reward;
};

BenchmarkResult benchmark(const UserModel& user, const Catalog& catalog, int K,
                          bool with_optimal);

}  // namespace chb

#endif  // CHB_ORACLE_HPP_
