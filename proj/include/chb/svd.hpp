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

#ifndef CHB_SVD_HPP_
#define CHB_SVD_HPP_

#include <cstdint>

#include "chb/common.hpp"

namespace chb {

struct TruncatedSvd {
  MatrixXd U;      // rows x rank
  VectorXd sigma;  // descending
  MatrixXd V;      // cols x rank
  int iterations = 0;
  double residual = 0;  // max_i ||A v_i - sigma_i u_i|| / sigma_1
};

struct SvdOptions {
  double tolerance = 1e-6;
  int max_iterations = 200;
  int oversample = 10;
};

/// Leading `rank` singular triplets by seeded randomized subspace iteration.
/// Singular vectors are sign-normalized so each right vector has a
/// nonnegative sum; for a nonnegative matrix the leading pair is then
/// entrywise nonnegative. Throws NumericalError if the residual does not
/// reach tolerance, InvalidInput for a zero matrix or oversized rank.
TruncatedSvd randomized_svd(const MatrixXd& a, int rank, std::uint64_t seed,
                            const SvdOptions& opts = {});

}  // namespace chb

#endif  // CHB_SVD_HPP_
