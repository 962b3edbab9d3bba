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

#include "chb/feature_map.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace chb {
namespace {

constexpr std::array<std::pair<FeatureKind, std::string_view>, 5> kNames{{
    {FeatureKind::kHybrid, "hybrid"},
    {FeatureKind::kLinearZ, "linucb"},
    {FeatureKind::kLinearXZ, "linucb-full"},
    {FeatureKind::kCoverageX, "lsb"},
    {FeatureKind::kCoverageXZ, "lsb-full"},
}};

MatrixXd stack(const MatrixXd& top, const MatrixXd& bottom) {
  MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

MatrixXd to_unit_range(MatrixXd v, UnitRangeMode mode) {
  if (mode == UnitRangeMode::kClamp) return v.cwiseMax(0.0).cwiseMin(1.0);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double lo = v.row(r).minCoeff();
    const double hi = v.row(r).maxCoeff();
    if (hi > lo) {
      v.row(r) = (v.row(r).array() - lo) / (hi - lo);
    } else {
      v.row(r).setConstant(std::clamp(lo, 0.0, 1.0));
    }
  }
  return v;
}

}  // namespace

std::string_view policy_name(FeatureKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

FeatureKind parse_policy(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw InvalidInput("unknown policy '" + std::string(name) + "'");
}

UnitRangeMode parse_unit_range_mode(std::string_view name) {
  if (name == "clamp") return UnitRangeMode::kClamp;
  if (name == "minmax") return UnitRangeMode::kMinMax;
  throw InvalidInput("unknown unit-range mode '" + std::string(name) + "'");
}

std::string_view unit_range_mode_name(UnitRangeMode mode) {
  return mode == UnitRangeMode::kClamp ? "clamp" : "minmax";
}

FeatureMap::FeatureMap(FeatureKind kind, const Catalog& catalog,
                       UnitRangeMode mode)
    : kind_(kind) {
  const auto L = catalog.size();
  const MatrixXd& x = catalog.topics();
  const MatrixXd& z = catalog.relevance();
  switch (kind) {
    case FeatureKind::kHybrid:
      cover_ = x;
      linear_ = z;
      break;
    case FeatureKind::kLinearZ:
      cover_.resize(0, L);
      linear_ = z;
      break;
    case FeatureKind::kLinearXZ:
      cover_.resize(0, L);
      linear_ = stack(x, z);
      break;
    case FeatureKind::kCoverageX:
      cover_ = x;
      linear_.resize(0, L);
      break;
    case FeatureKind::kCoverageXZ:
      cover_ = to_unit_range(stack(x, z), mode);
      linear_.resize(0, L);
      break;
  }
  support_.resize(L);
  for (int a = 0; a < L; ++a)
    for (int j = 0; j < cover_.rows(); ++j)
      if (cover_(j, a) != 0.0) support_[a].push_back(j);
}

MatrixXd FeatureMap::displayed_gains(const RankedList& list, int count) const {
  require(count >= 0 && count <= list.size(), "displayed_gains: bad count");
  MatrixXd gains(d(), count);
  CoverageTracker<double> tracker(d());
  for (int k = 0; k < count; ++k) {
    const auto x = cover_.col(list[k]);
    gains.col(k) = tracker.gain(x);
    tracker.add(x);
  }
  return gains;
}

}  // namespace chb
