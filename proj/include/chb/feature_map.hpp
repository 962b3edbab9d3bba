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

#ifndef CHB_FEATURE_MAP_HPP_
#define CHB_FEATURE_MAP_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "chb/model.hpp"

namespace chb {

/// How a learner sees an item. Each kind turns the catalog's (x, z) into a
/// coverage part (gains recomputed per prefix) and a linear part.
enum class FeatureKind {
  kHybrid,      // coverage on x, linear on z (CascadeHybrid)
  kLinearZ,     // linear on z (CascadeLinUCB)
  kLinearXZ,    // linear on [x; z] (CascadeLinUCBFull)
  kCoverageX,   // coverage on x (CascadeLSB)
  kCoverageXZ,  // coverage on [x; z] squashed into [0,1] (CascadeLSBFull)
};

/// How [x; z] is mapped into [0,1] for kCoverageXZ.
enum class UnitRangeMode { kClamp, kMinMax };

std::string_view policy_name(FeatureKind kind);
FeatureKind parse_policy(std::string_view name);
UnitRangeMode parse_unit_range_mode(std::string_view name);
std::string_view unit_range_mode_name(UnitRangeMode mode);

class FeatureMap {
 public:
  FeatureMap(FeatureKind kind, const Catalog& catalog,
             UnitRangeMode mode = UnitRangeMode::kClamp);

  FeatureKind kind() const { return kind_; }
  int d() const { return static_cast<int>(cover_.rows()); }
  int m() const { return static_cast<int>(linear_.rows()); }
  int num_items() const { return static_cast<int>(linear_.cols()); }

  /// Coverage-part base vectors, d x L, entries in [0,1].
  const MatrixXd& cover() const { return cover_; }
  /// Linear-part vectors, m x L.
  const MatrixXd& linear() const { return linear_; }
  /// Nonzero rows of cover().col(a); gains vanish off this support.
  const std::vector<int>& support(int a) const { return support_[a]; }

  /// Gain vectors of the first `count` displayed items, each against the
  /// prefix shown above it. Returns d x count.
  MatrixXd displayed_gains(const RankedList& list, int count) const;

 private:
  FeatureKind kind_;
  MatrixXd cover_;
  MatrixXd linear_;
  std::vector<std::vector<int>> support_;
};

}  // namespace chb

#endif  // CHB_FEATURE_MAP_HPP_
