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

#include "chb/validate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "chb/oracle.hpp"
#include "chb/policy.hpp"
#include "chb/stats.hpp"

namespace chb {
namespace {

CheckResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

// Largest relative deviation of the blockwise estimate and width from a
// direct solve of the joint ridge system over the same observations.
double joint_ridge_deviation(const Instance& inst, const UserModel& user, int K,
                             int steps, std::uint64_t seed) {
  const Catalog& cat = inst.catalog;
  CascadePolicy policy(FeatureKind::kHybrid, cat, 1.0);
  const int d = cat.topic_dim(), m = cat.rel_dim(), n = d + m;
  MatrixXd gram = MatrixXd::Identity(n, n);
  VectorXd target = VectorXd::Zero(n);
  Rng rng(seed);
  double worst = 0;
  for (int t = 0; t < steps; ++t) {
    const RankedList list = policy.select(K);
    const auto alpha = attraction_vector(user, list, cat);
    const auto fb = sample_click(alpha, rng);
    policy.update(list, fb);
    const int observed = std::min(K, fb.click_pos);
    const MatrixXd gains = policy.feature_map().displayed_gains(list, observed);
    for (int k = 0; k < observed; ++k) {
      VectorXd phi(n);
      phi << gains.col(k), cat.relevance().col(list[k]);
      gram += phi * phi.transpose();
      if (k + 1 == fb.click_pos) target += phi;
    }
    const VectorXd joint = gram.ldlt().solve(target);
    const auto est = estimate_parameters(policy.state());
    VectorXd blocks(n);
    blocks << est.theta, est.beta;
    worst = std::max(worst, (blocks - joint).norm() / std::max(joint.norm(), 1e-12));
    VectorXd phi(n);
    phi << cat.topics().col(list[0]), cat.relevance().col(list[0]);
    const double direct = phi.dot(gram.ldlt().solve(phi));
    const double width = confidence_width(policy.state(), phi.head(d), phi.tail(m));
    worst = std::max(worst, std::abs(width - direct) / std::max(direct, 1e-12));
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> validate_bundle(const InstanceBundle& b, std::uint64_t seed) {
  std::vector<CheckResult> out;
  constexpr double kNormTol = 1e-9;

  const double z_dev = (b.relevance.colwise().norm().array() - 1.0).abs().maxCoeff();
  out.push_back(check("relevance features have unit norm", z_dev <= kNormTol,
                      fmt::format("max | ||z_a|| - 1 | = {:.3g}", z_dev)));
  const double beta_dev = (b.beta.colwise().norm().array() - 1.0).abs().maxCoeff();
  out.push_back(check("relevance preferences have unit norm", beta_dev <= kNormTol,
                      fmt::format("max | ||beta_u|| - 1 | = {:.3g}", beta_dev)));

  const bool x_range = ((b.coverage.array() >= 0) && (b.coverage.array() <= 1)).all();
  const bool x_support =
      ((b.coverage.transpose().array() != 0) <= (b.topics.array() != 0)).all();
  out.push_back(check("topic coverage in [0,1] and zero outside assigned topics",
                      x_range && x_support, ""));

  const Instance inst = make_instance(b, b.num_topics());
  double theta_dev = 0, x_theta_max = 0;
  for (const auto& u : inst.users) {
    theta_dev = std::max(theta_dev, std::abs(u.theta.sum() - 1.0));
    x_theta_max = std::max(x_theta_max, (inst.catalog.topics().transpose() * u.theta).maxCoeff());
  }
  out.push_back(check("topic preferences sum to one", theta_dev <= 1e-12 && (inst.users.size() > 0),
                      fmt::format("{} users, max |sum - 1| = {:.3g}", inst.users.size(), theta_dev)));

  const MatrixXd rel = b.relevance.transpose() * b.beta;
  const long outside = ((rel.array() < 0) || (rel.array() > 1)).count();
  out.push_back(check("attractions are clamp-free for every lambda",
                      outside == 0 && x_theta_max <= 1.0,
                      fmt::format("{} relevance products outside [0,1], max x'theta = {:.4f}",
                                  outside, x_theta_max)));

  UserModel user = inst.users.front();
  user.lambda = 0.5;
  const int K = std::min(5, inst.catalog.size());
  const double dev = joint_ridge_deviation(inst, user, K, 200, seed);
  out.push_back(check("blockwise estimates match joint ridge solve", dev <= 1e-8,
                      fmt::format("max relative deviation {:.3g} over 200 steps", dev)));

  const RankedList greedy = greedy_benchmark(user, inst.catalog, K);
  const AttractionVector alpha = attraction_vector(user, greedy, inst.catalog);
  Rng rng(hash_seed({seed, 0xc1}));
  const auto counts = sample_click_histogram(alpha, 100000, rng);
  const ChiSquare chi = chi_square_test(counts, cascade_click_distribution(alpha));
  out.push_back(check("cascade sampler matches analytic click distribution",
                      chi.p_value > 1e-3,
                      fmt::format("chi2 = {:.3f}, dof = {}, p = {:.4f}", chi.statistic,
                                  chi.dof, chi.p_value)));
  return out;
}

}  // namespace chb
