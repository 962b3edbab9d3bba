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

#ifndef CHB_VALIDATE_HPP_
#define CHB_VALIDATE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "chb/pipeline.hpp"

namespace chb {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Property battery over a prepared bundle: feature normalization, topic
/// preference sums, clamp-free attractions, block-inverse consistency of a
/// short learning run on the bundle's catalog and cascade sampler fit.
std::vector<CheckResult> validate_bundle(const InstanceBundle& bundle, std::uint64_t seed);

}  // namespace chb

#endif  // CHB_VALIDATE_HPP_
