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

#include "chb/svd.hpp"

#include <algorithm>

#include "chb/rng.hpp"

namespace chb {
namespace {

MatrixXd orthonormalize(const MatrixXd& y) {
  Eigen::HouseholderQR<MatrixXd> qr(y);
  return qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

TruncatedSvd randomized_svd(const MatrixXd& a, int rank, std::uint64_t seed,
                            const SvdOptions& opts) {
  const int max_rank = static_cast<int>(std::min(a.rows(), a.cols()));
  require(rank >= 1 && rank <= max_rank, "randomized_svd: rank out of range");
  const double fro = a.norm();
  require(fro > 0, "randomized_svd: zero matrix");

  const int block = std::min(max_rank, rank + opts.oversample);
  Rng rng(seed);
  MatrixXd omega(a.cols(), block);
  for (Eigen::Index j = 0; j < omega.cols(); ++j)
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = rng.normal();

  MatrixXd q = orthonormalize(a * omega);
  TruncatedSvd out;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const MatrixXd qv = orthonormalize(a.transpose() * q);
    q = orthonormalize(a * qv);

    const MatrixXd small = q.transpose() * a;  // block x cols
    Eigen::JacobiSVD<MatrixXd> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = q * svd.matrixU().leftCols(rank);
    out.sigma = svd.singularValues().head(rank);
    out.V = svd.matrixV().leftCols(rank);
    out.iterations = it;

    const double top = out.sigma(0);
    const MatrixXd resid = a * out.V - out.U * out.sigma.asDiagonal();
    out.residual = resid.colwise().norm().maxCoeff() / top;
    if (out.residual <= opts.tolerance) break;
  }
  if (out.residual > opts.tolerance)
    throw NumericalError("randomized_svd: no convergence within iteration limit");

  for (int i = 0; i < rank; ++i) {
    double s = out.V.col(i).sum();
    if (s == 0) {
      Eigen::Index idx;
      out.V.col(i).cwiseAbs().maxCoeff(&idx);
      s = out.V(idx, i);
    }
    if (s < 0) {
      out.V.col(i) *= -1;
      out.U.col(i) *= -1;
    }
  }
  return out;
}

}  // namespace chb
