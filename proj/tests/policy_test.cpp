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


#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "checks.hpp"
#include "chb/policy.hpp"
#include "reference.hpp"

using chb::MatrixXd;
using chb::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

chb::MatrixXd col(std::initializer_list<double> v) { return vec(v); }

}  // namespace

TEST_CASE("init_state shapes") {
  const auto s = chb::init_state(2, 3, 1.0);
  CHECK(s.M.isIdentity());
  CHECK(s.M.rows() == 3);
  CHECK(s.H.isIdentity());
  CHECK(s.H.rows() == 2);
  CHECK(s.B.rows() == 2);
  CHECK(s.B.cols() == 3);
  CHECK(s.B.isZero());
  CHECK(s.y.isZero());
  CHECK(s.u.isZero());

  const auto lin = chb::init_state(0, 3, 1.0);
  CHECK(lin.H.size() == 0);
  CHECK(lin.M.rows() == 3);
  const auto cov = chb::init_state(2, 0, 1.0);
  CHECK(cov.M.size() == 0);
  CHECK(cov.B.rows() == 2);
  CHECK(cov.B.cols() == 0);

  CHECK_THROWS_AS(chb::init_state(0, 0, 1.0), chb::InvalidInput);
  CHECK_THROWS_AS(chb::init_state(-1, 2, 1.0), chb::InvalidInput);
  CHECK_THROWS_AS(chb::init_state(1, 1, 0.0), chb::InvalidInput);
}

TEST_CASE("estimate_parameters examples") {
  auto s = chb::init_state(2, 3, 1.0);
  const auto e0 = chb::estimate_parameters(s);
  CHECK(e0.theta.isZero());
  CHECK(e0.beta.isZero());

  auto t = chb::init_state(1, 1, 1.0);
  chb::observe(t, col({1.0}), col({1.0}), 0);
  const auto e1 = chb::estimate_parameters(t);
  CHECK(e1.theta(0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(e1.beta(0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("confidence width and ucb examples") {
  const auto s = chb::init_state(2, 1, 1.0);
  CHECK(chb::confidence_width(s, vec({0.3, 0.0}), vec({0.4})) == doctest::Approx(0.25));
  CHECK(chb::ucb(s, vec({0.3, 0.0}), vec({0.4})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(chb::confidence_width(s, vec({0.3}), vec({0.4})), chb::InvalidInput);

  auto s2 = s;
  s2.gamma = 2.0;
  CHECK(chb::ucb(s2, vec({0.3, 0.0}), vec({0.4})) == doctest::Approx(1.0));

  auto t = chb::init_state(1, 1, 1.0);
  chb::observe(t, col({1.0}), col({1.0}), 0);
  // O = [[2,1],[1,2]], phi = (1,1): phi' O^-1 phi = 2/3.
  CHECK(chb::confidence_width(t, vec({1.0}), vec({1.0})) == doctest::Approx(2.0 / 3));
  CHECK(chb::ucb(t, vec({1.0}), vec({1.0})) ==
        doctest::Approx(2.0 / 3 + std::sqrt(2.0 / 3)).epsilon(1e-12));
  CHECK(chb::ucb(t, vec({1.0}), vec({1.0})) == doctest::Approx(1.4832).epsilon(1e-4));
}

TEST_CASE("update examples") {
  MatrixXd X(1, 1), Z(1, 1);
  X << 1.0;
  Z << 1.0;
  const chb::Catalog cat(X, Z);
  chb::CascadePolicy p(chb::FeatureKind::kHybrid, cat, 1.0);
  p.update({{0}}, {1});
  const auto e = chb::estimate_parameters(p.state());
  CHECK(e.theta(0) == doctest::Approx(1.0 / 3));
  CHECK(e.beta(0) == doctest::Approx(1.0 / 3));
  CHECK(p.state().step == 2);

  chb::Rng rng(3);
  const auto cat4 = ref::random_catalog(rng, 6, 3, 2);
  const chb::FeatureMap fmap(chb::FeatureKind::kHybrid, cat4);
  const chb::RankedList list{{4, 1, 3, 0}};

  SUBCASE("no click observes every item as negative") {
    auto s = chb::init_state(3, 2, 1.0);
    chb::update(s, list, {5}, fmap);
    CHECK(s.y.isZero());
    CHECK(s.topic_clicks.isZero());
    MatrixXd M = MatrixXd::Identity(2, 2);
    for (int a : list.positions) M += cat4.relevance().col(a) * cat4.relevance().col(a).transpose();
    CHECK((s.M - M).norm() < 1e-14);
  }
  SUBCASE("click at the top observes only the clicked item") {
    auto s = chb::init_state(3, 2, 1.0);
    chb::update(s, list, {1}, fmap);
    const VectorXd z = cat4.relevance().col(4);
    CHECK((s.M - MatrixXd::Identity(2, 2) - z * z.transpose()).norm() < 1e-14);
    CHECK((s.y - z).norm() < 1e-14);
    CHECK((s.topic_clicks - VectorXd(cat4.topics().col(4))).norm() < 1e-14);
  }
  SUBCASE("bad feedback is rejected") {
    auto s = chb::init_state(3, 2, 1.0);
    CHECK_THROWS_AS(chb::update(s, list, {6}, fmap), chb::InvalidInput);
    CHECK_THROWS_AS(chb::update(s, list, {0}, fmap), chb::InvalidInput);
  }
}

TEST_CASE("select_list tie-break and width ordering") {
  MatrixXd X = MatrixXd::Constant(2, 5, 0.3), Z = MatrixXd::Constant(2, 5, 0.5);
  const chb::Catalog same(X, Z);
  chb::CascadePolicy p(chb::FeatureKind::kHybrid, same, 1.0);
  CHECK(p.select(3).positions == std::vector<int>{0, 1, 2});

  MatrixXd X0 = MatrixXd::Zero(2, 4), Z1(2, 4);
  Z1 << 0.1, 0.9, 0.4, 0.2,
        0.1, 0.1, 0.3, 0.2;
  chb::CascadePolicy q(chb::FeatureKind::kHybrid, chb::Catalog(X0, Z1), 1.0);
  CHECK(q.select(1).positions == std::vector<int>{1});

  MatrixXd X2(1, 2), Z2(1, 2);
  X2 << 0.2, 0.7;
  Z2 << 0.1, 0.1;
  chb::CascadePolicy r(chb::FeatureKind::kHybrid, chb::Catalog(X2, Z2), 1.0);
  CHECK(r.select(1).positions == std::vector<int>{1});

  CHECK_THROWS_AS(p.select(0), chb::InvalidInput);
  CHECK_THROWS_AS(p.select(6), chb::InvalidInput);
}

TEST_CASE("select_list matches a brute-force greedy re-evaluation") {
  chb::Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cat = ref::random_catalog(rng, 6, 3, 2);
    const auto user = ref::random_user(rng, 3, 2, 0.5);
    chb::CascadePolicy p(chb::FeatureKind::kHybrid, cat, 0.7);
    for (int t = 0; t < 15; ++t) chb::run_step(p, user, cat, 3, rng);

    const auto& s = p.state();
    const auto est = chb::estimate_parameters(s);
    const auto want = ref::greedy(6, 3, [&](const std::vector<int>& prefix, int a) {
      const VectorXd omega = ref::gain(cat.topics(), prefix, a);
      const VectorXd z = cat.relevance().col(a);
      return chb::ucb(s, est, omega, z);
    });
    CHECK(p.select(3).positions == want);
  }
}

TEST_CASE("select_list never repeats an item and honours argmax invariance") {
  chb::Rng rng(7);
  for (auto kind : {chb::FeatureKind::kHybrid, chb::FeatureKind::kLinearZ,
                    chb::FeatureKind::kLinearXZ, chb::FeatureKind::kCoverageX,
                    chb::FeatureKind::kCoverageXZ}) {
    const auto cat = ref::random_catalog(rng, 12, 4, 3);
    const auto user = ref::random_user(rng, 4, 3, 0.5);
    chb::CascadePolicy p(kind, cat, 0.5);
    for (int t = 0; t < 40; ++t) {
      const auto out = chb::run_step(p, user, cat, 5, rng);
      CHECK(std::set<int>(out.list.positions.begin(), out.list.positions.end()).size() == 5);
    }
  }

  // Shifting every score by the same constant leaves the greedy choice alone.
  const auto cat = ref::random_catalog(rng, 10, 3, 3);
  const auto user = ref::random_user(rng, 3, 3, 0.5);
  chb::CascadePolicy p(chb::FeatureKind::kHybrid, cat, 1.0);
  for (int t = 0; t < 25; ++t) chb::run_step(p, user, cat, 4, rng);
  const auto& s = p.state();
  const auto est = chb::estimate_parameters(s);
  auto score = [&](double shift) {
    return ref::greedy(10, 4, [&](const std::vector<int>& prefix, int a) {
      return chb::ucb(s, est, ref::gain(cat.topics(), prefix, a),
                      VectorXd(cat.relevance().col(a))) + shift;
    });
  };
  CHECK(score(0.0) == score(3.25));
  CHECK(score(0.0) == p.select(4).positions);
}

TEST_CASE("trace of M grows by the observed squared norms") {
  chb::Rng rng(12);
  const auto cat = ref::random_catalog(rng, 15, 4, 3);
  const auto user = ref::random_user(rng, 4, 3, 0.5);
  chb::CascadePolicy p(chb::FeatureKind::kHybrid, cat, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double before = p.state().M.trace();
    const auto out = chb::run_step(p, user, cat, 5, rng);
    double added = 0;
    for (int k = 0; k < std::min(5, out.feedback.click_pos); ++k)
      added += cat.relevance().col(out.list[k]).squaredNorm();
    CHECK(p.state().M.trace() - before == doctest::Approx(added).epsilon(1e-12));
  }
}

TEST_CASE("block formulas agree with the joint ridge oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rep = ref::block_inverse_trajectory(seed, 20, 4, 4, 3, 120);
    CHECK(rep.worst() < 1e-8);
  }
}

TEST_CASE("state invariants hold against a naive accumulator replay") {
  chb::Rng rng(31);
  const int L = 12, K = 4, d = 3, m = 3;
  const auto cat = ref::random_catalog(rng, L, d, m);
  const auto user = ref::random_user(rng, d, m, 0.5);
  chb::CascadePolicy p(chb::FeatureKind::kHybrid, cat, 1.0);
  MatrixXd W = MatrixXd::Identity(d, d), M = MatrixXd::Identity(m, m), B = MatrixXd::Zero(d, m);
  VectorXd y = VectorXd::Zero(m), uc = VectorXd::Zero(d);
  for (int t = 0; t < 200; ++t) {
    const auto out = chb::run_step(p, user, cat, K, rng);
    std::vector<int> prefix;
    for (int k = 0; k < std::min(K, out.feedback.click_pos); ++k) {
      const int a = out.list[k];
      const VectorXd omega = ref::gain(cat.topics(), prefix, a);
      const VectorXd z = cat.relevance().col(a);
      W += omega * omega.transpose();
      M += z * z.transpose();
      B += omega * z.transpose();
      if (k + 1 == out.feedback.click_pos) {
        y += z;
        uc += omega;
      }
      prefix.push_back(a);
    }
    const auto& s = p.state();
    const MatrixXd Minv = M.fullPivLu().inverse();
    CHECK((s.M - M).norm() < 1e-10);
    CHECK((s.B - B).norm() < 1e-10);
    CHECK((s.y - y).norm() < 1e-10);
    CHECK((s.H - (W - B * Minv * B.transpose())).norm() < 1e-9);
    CHECK((s.u - (uc - B * Minv * y)).norm() < 1e-9);
    CHECK((s.M_inv * s.M - MatrixXd::Identity(m, m)).norm() < 1e-8);
    CHECK((s.H_inv * s.H - MatrixXd::Identity(d, d)).norm() < 1e-8);
    CHECK(s.M.llt().info() == Eigen::Success);
    CHECK(s.H.llt().info() == Eigen::Success);
  }
}

TEST_CASE("Sherman-Morrison inverse tracks direct inversion") {
  chb::Rng rng(8);
  auto s = chb::init_state(0, 6, 1.0);
  MatrixXd omegas(0, 1);
  for (int t = 0; t < 1000; ++t) {
    MatrixXd z(6, 1);
    for (int i = 0; i < 6; ++i) z(i, 0) = rng.normal();
    chb::observe(s, omegas, z, -1);
  }
  CHECK((s.M_inv - s.M.inverse()).norm() < 1e-8);
  CHECK(s.guard_rebuilds == 0);
}

TEST_CASE("guard rebuilds a corrupted inverse") {
  chb::Rng rng(4);
  auto s = chb::init_state(2, 2, 1.0);
  s.M_inv(0, 0) += 0.5;
  chb::observe(s, col({0.3, 0.1}), col({0.2, 0.4}), 0);
  CHECK(s.guard_rebuilds == 1);
  CHECK((s.M_inv * s.M - MatrixXd::Identity(2, 2)).norm() < 1e-12);
  ref::JointRidge j(2, 2);
  j.add(vec({0.3, 0.1}), vec({0.2, 0.4}), true);
  CHECK(ref::rel_error(chb::estimate_parameters(s).theta, j.theta()) < 1e-12);
}

TEST_CASE("degenerate learners match standalone LinUCB and LSB") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    CHECK(ref::degenerate_mismatches(chb::FeatureKind::kLinearZ, seed, 12, 3, 4, 80, 1.0) == 0);
    CHECK(ref::degenerate_mismatches(chb::FeatureKind::kCoverageX, seed, 12, 3, 4, 80, 1.0) == 0);
  }
}

TEST_CASE("feature maps") {
  MatrixXd X(2, 3), Z(2, 3);
  X << 0.5, 0.0, 1.0,
       0.2, 0.3, 0.0;
  Z << -0.6, 0.8, 2.0,
        0.8, 0.6, 0.0;
  const chb::Catalog cat(X, Z);
  const chb::FeatureMap lin(chb::FeatureKind::kLinearZ, cat);
  CHECK(lin.d() == 0);
  CHECK(lin.linear() == Z);
  const chb::FeatureMap full(chb::FeatureKind::kLinearXZ, cat);
  CHECK(full.d() == 0);
  CHECK(full.m() == 4);
  CHECK(full.linear().topRows(2) == X);
  CHECK(full.linear().bottomRows(2) == Z);
  const chb::FeatureMap lsb(chb::FeatureKind::kCoverageX, cat);
  CHECK(lsb.m() == 0);
  CHECK(lsb.cover() == X);
  CHECK(lsb.support(0) == std::vector<int>{0, 1});
  CHECK(lsb.support(1) == std::vector<int>{1});

  const chb::FeatureMap clamp(chb::FeatureKind::kCoverageXZ, cat);
  CHECK(clamp.d() == 4);
  CHECK(clamp.cover()(2, 0) == 0.0);
  CHECK(clamp.cover()(2, 2) == 1.0);
  CHECK(clamp.cover()(3, 1) == 0.6);
  const chb::FeatureMap mm(chb::FeatureKind::kCoverageXZ, cat, chb::UnitRangeMode::kMinMax);
  CHECK(mm.cover()(2, 0) == 0.0);
  CHECK(mm.cover()(2, 1) == doctest::Approx(1.4 / 2.6));
  CHECK(mm.cover()(2, 2) == 1.0);
  CHECK(mm.cover()(0, 2) == 1.0);

  const MatrixXd gains = lsb.displayed_gains({{0, 2}}, 2);
  CHECK(gains.col(0) == X.col(0));
  CHECK(gains(0, 1) == doctest::Approx(0.5));
  CHECK(gains(1, 1) == 0.0);

  for (auto name : {"hybrid", "linucb", "linucb-full", "lsb", "lsb-full"})
    CHECK(chb::policy_name(chb::parse_policy(name)) == name);
  CHECK_THROWS_AS(chb::parse_policy("ucb"), chb::InvalidInput);
}

TEST_CASE("theoretical gamma substitutions") {
  CHECK(std::abs(chb::theoretical_gamma(1, 0, 1, 1, 0.0) - std::sqrt(std::log(2.0))) < 1e-12);
  CHECK(std::abs(chb::theoretical_gamma(1, 0, 1, 1, 0.0) - 0.8326) < 1e-4);
  const double want = std::sqrt(30.0 * std::log(1.0 + 50000.0 * 10.0 / 30.0) +
                                2.0 * std::log(50000.0)) + 1.0;
  CHECK(std::abs(chb::theoretical_gamma(10, 20, 50000, 10, 1.0) - want) < 1e-12);
  CHECK(std::abs(chb::theoretical_gamma(10, 20, 50000, 10, 0.25) -
                 (chb::theoretical_gamma(10, 20, 50000, 10, 0.0) + 0.25)) < 1e-12);
  CHECK_THROWS_AS(chb::theoretical_gamma(1, 1, 10, 1, 1.5), chb::InvalidInput);
  CHECK_THROWS_AS(chb::theoretical_gamma(0, 0, 10, 1, 0.5), chb::InvalidInput);
}

TEST_CASE("snapshot round trip") {
  chb::Rng rng(21);
  const auto cat = ref::random_catalog(rng, 10, 3, 2);
  const auto user = ref::random_user(rng, 3, 2, 0.5);
  chb::CascadePolicy p(chb::FeatureKind::kHybrid, cat, 0.8);
  for (int t = 0; t < 30; ++t) chb::run_step(p, user, cat, 3, rng);
  std::stringstream ss;
  chb::save_snapshot(ss, p.state());
  const auto back = chb::load_snapshot<double>(ss);
  CHECK(back.d == 3);
  CHECK(back.m == 2);
  CHECK(back.gamma == 0.8);
  CHECK(back.step == p.state().step);
  CHECK(back.M == p.state().M);
  CHECK(back.H_inv == p.state().H_inv);
  CHECK(back.u == p.state().u);
  CHECK(chb::select_list(back, p.feature_map(), 3) == p.select(3));

  std::stringstream bad("chb-policy-state 2 1 1\n");
  CHECK_THROWS_AS(chb::load_snapshot<double>(bad), chb::ParseError);
}

TEST_CASE("float state follows the double state") {
  auto sd = chb::init_state<double>(2, 2, 1.0);
  auto sf = chb::init_state<float>(2, 2, 1.0f);
  chb::observe(sd, col({0.3, 0.1}), col({0.2, 0.4}), 0);
  chb::observe(sf, Eigen::Vector2f(0.3f, 0.1f), Eigen::Vector2f(0.2f, 0.4f), 0);
  CHECK(chb::estimate_parameters(sf).beta(1) ==
        doctest::Approx(chb::estimate_parameters(sd).beta(1)).epsilon(1e-5));
}
