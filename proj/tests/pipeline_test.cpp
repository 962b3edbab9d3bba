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

#include <filesystem>
#include <set>
#include <sstream>

#include "chb/environment.hpp"
#include "chb/log.hpp"
#include "chb/pipeline.hpp"
#include "chb/svd.hpp"

using chb::MatrixXd;
using chb::VectorXd;

namespace {

/// Collects warnings for the lifetime of the object.
struct WarningCapture {
  std::vector<std::string> messages;
  chb::WarningSink previous;
  WarningCapture() {
    previous = chb::set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { chb::set_warning_sink(previous); }
};

MatrixXd random_binary(chb::Rng& rng, int rows, int cols, double p) {
  MatrixXd F(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) F(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
  return F;
}

const std::filesystem::path kSourceDir = CHB_SOURCE_DIR;

}  // namespace

TEST_CASE("ratings parsing and binarization") {
  std::istringstream in(
      "user_id\titem_id\trating\n"
      "# comment\n"
      "10\t7\t5\n"
      "10\t8\t4\n"
      "\n"
      "11\t8\t5\n");
  const auto r = chb::parse_ratings(in);
  CHECK(r.user_ids == std::vector<long long>{10, 11});
  CHECK(r.item_ids == std::vector<long long>{7, 8});
  CHECK(r.F(0, 0) == 1.0);
  CHECK(r.F(0, 1) == 0.0);
  CHECK(r.F(1, 1) == 1.0);
  CHECK(r.rated(1, 0) == 0);
  CHECK(r.rated(0, 1) == 1);

  std::istringstream ml("1::2::5::978300760\n1::3::3::978302109\n");
  const auto r2 = chb::parse_ratings(ml);
  CHECK(r2.F.sum() == 1.0);

  std::istringstream ws("1 2 4.5\n2 2 5\n");
  CHECK(chb::parse_ratings(ws).F.sum() == 1.0);
}

TEST_CASE("ratings parse errors carry the line number") {
  std::istringstream in("1,2,5\n1,3,5\n1,x,4\n");
  try {
    chb::parse_ratings(in);
    FAIL("expected a parse error");
  } catch (const chb::ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(chb::parse_ratings(empty), chb::InvalidInput);
  CHECK_THROWS_AS(chb::load_and_binarize("/nonexistent/ratings.csv"), chb::InvalidInput);
}

TEST_CASE("all ratings below threshold give an all-zero matrix with a warning") {
  WarningCapture cap;
  std::istringstream in("1,2,4\n2,3,3\n");
  const auto r = chb::parse_ratings(in);
  CHECK(r.F.isZero());
  CHECK(cap.messages.size() == 1);
}

TEST_CASE("topic parsing") {
  WarningCapture cap;
  std::istringstream in(
      "item_id,topic\n"
      "7,Drama\n"
      "8,Comedy|Action\n"
      "8,unknown\n"
      "99,Drama\n");
  const auto g = chb::parse_topics(in, {7, 8, 9}, {"unknown"});
  CHECK(g.labels == std::vector<std::string>{"Action", "Comedy", "Drama"});
  CHECK(g.G(0, 2) == 1.0);
  CHECK(g.G(1, 0) == 1.0);
  CHECK(g.G(1, 1) == 1.0);
  CHECK(g.G.row(2).isZero());
  CHECK(cap.messages.size() == 1);
}

TEST_CASE("select_active keeps the most active users") {
  chb::RatingsMatrix r;
  r.rated = chb::ByteMatrix::Zero(3, 10);
  r.F = MatrixXd::Zero(3, 10);
  for (int a = 0; a < 5; ++a) r.rated(0, a) = 1;
  for (int a = 0; a < 2; ++a) r.rated(1, a) = 1;
  for (int a = 0; a < 9; ++a) r.rated(2, a) = 1;
  r.user_ids = {100, 200, 300};
  for (int a = 0; a < 10; ++a) r.item_ids.push_back(a);
  const auto top = chb::select_active(r, 2, 10);
  CHECK(top.user_ids == std::vector<long long>{300, 100});
  CHECK(top.item_ids.front() == 0);
  CHECK(top.item_ids.back() == 9);

  const auto all = chb::select_active(r, 3, 10);
  CHECK(std::set<long long>(all.user_ids.begin(), all.user_ids.end()) ==
        std::set<long long>{100, 200, 300});
  CHECK_THROWS_AS(chb::select_active(r, 4, 10), chb::InvalidInput);
}

TEST_CASE("user split") {
  chb::RatingsMatrix r;
  r.F = MatrixXd::Zero(1000, 2);
  r.rated = chb::ByteMatrix::Zero(1000, 2);
  for (int u = 0; u < 1000; ++u) r.user_ids.push_back(u);
  r.item_ids = {0, 1};
  const auto [a, b] = chb::split_users(r, 0.5, 3);
  CHECK(a.num_users() == 500);
  CHECK(b.num_users() == 500);
  std::set<long long> seen(a.user_ids.begin(), a.user_ids.end());
  seen.insert(b.user_ids.begin(), b.user_ids.end());
  CHECK(seen.size() == 1000);
  const auto [a2, b2] = chb::split_users(r, 0.5, 3);
  CHECK(a2.user_ids == a.user_ids);
  const auto [a3, b3] = chb::split_users(r, 0.5, 4);
  CHECK(a3.user_ids != a.user_ids);
}

TEST_CASE("randomized SVD agrees with a full decomposition") {
  chb::Rng rng(5);
  const MatrixXd A = random_binary(rng, 60, 40, 0.2);
  const auto svd = chb::randomized_svd(A, 6, 1);
  Eigen::BDCSVD<MatrixXd> full(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int i = 0; i < 6; ++i) {
    CHECK(svd.sigma(i) == doctest::Approx(full.singularValues()(i)).epsilon(1e-6));
    CHECK(std::abs(std::abs(svd.V.col(i).dot(full.matrixV().col(i))) - 1) < 1e-5);
  }
  CHECK(svd.residual <= 1e-6);
  CHECK((svd.V.transpose() * svd.V - MatrixXd::Identity(6, 6)).norm() < 1e-10);
  CHECK(svd.V.col(0).minCoeff() >= -1e-12);

  CHECK_THROWS_AS(chb::randomized_svd(MatrixXd::Zero(5, 5), 2, 1), chb::InvalidInput);
  CHECK_THROWS_AS(chb::randomized_svd(A, 41, 1), chb::InvalidInput);
}

TEST_CASE("reconstruction error does not grow with rank") {
  chb::Rng rng(6);
  const MatrixXd A = random_binary(rng, 50, 30, 0.3);
  double prev = A.norm();
  for (int m = 1; m <= 10; ++m) {
    const auto s = chb::randomized_svd(A, m, 2);
    const double err = (A - s.U * s.sigma.asDiagonal() * s.V.transpose()).norm();
    CHECK(err <= prev + 1e-9);
    prev = err;
  }
}

TEST_CASE("exact-rank data: features reproduce the training matrix and recover preferences") {
  chb::Rng rng(8);
  MatrixXd P(20, 3), Q(3, 15);
  for (int i = 0; i < P.size(); ++i) P.data()[i] = rng.uniform();
  for (int i = 0; i < Q.size(); ++i) Q.data()[i] = rng.uniform();
  const MatrixXd F = P * Q;
  const auto s = chb::randomized_svd(F, 3, 4);
  CHECK((F - s.U * s.sigma.asDiagonal() * s.V.transpose()).norm() < 1e-8 * F.norm());

  const MatrixXd f_test = MatrixXd::Ones(2, 15);
  const auto first = chb::relevance_features(F, f_test, 3, 4);
  VectorXd b0(3);
  b0 << 0.6, -0.0, 0.8;
  MatrixXd planted(2, 15);
  planted.row(0) = (first.z.transpose() * b0).transpose();
  planted.row(1) = 2.5 * planted.row(0);
  const auto again = chb::relevance_features(F, planted, 3, 4);
  CHECK(again.z == first.z);
  CHECK((again.beta.col(0) - b0).norm() < 1e-6);
  CHECK((again.beta.col(1) - b0).norm() < 1e-6);
  for (int a = 0; a < 15; ++a) CHECK(again.z.col(a).norm() == doctest::Approx(1.0));
}

TEST_CASE("shift to nonnegative relevance") {
  chb::Rng rng(12);
  const MatrixXd F = random_binary(rng, 40, 30, 0.3);
  const MatrixXd T = random_binary(rng, 10, 30, 0.3);
  const auto rel = chb::relevance_features(F, T, 5, 1);
  MatrixXd beta = rel.beta;
  const long left = chb::shift_to_nonnegative(rel.z, beta);
  CHECK(left == 0);
  CHECK((rel.z.transpose() * beta).minCoeff() >= 0.0);
  for (int u = 0; u < beta.cols(); ++u)
    if (rel.user_ok[u]) CHECK(beta.col(u).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("topic coverage features") {
  MatrixXd F(2, 2), G(2, 1);
  F << 1, 0,
       1, 1;
  G << 1, 1;
  const auto tf = chb::topic_features(F, G);
  CHECK(tf.x(0, 0) == 1.0);
  CHECK(tf.x(0, 1) == 0.5);

  WarningCapture cap;
  MatrixXd G2(3, 2), F2(1, 3);
  G2 << 1, 0,
        0, 0,
        1, 0;
  F2 << 1, 1, 0;
  const auto tf2 = chb::topic_features(F2, G2);
  CHECK(tf2.kept_topics == std::vector<int>{0});
  CHECK(tf2.uncovered_items == std::vector<int>{1});
  CHECK(tf2.x.col(1).isZero());
  CHECK(cap.messages.size() == 2);

  MatrixXd one(1, 1);
  one << 1;
  CHECK(chb::topic_features(one, one).x(0, 0) == 1.0);
}

TEST_CASE("topic preferences") {
  MatrixXd G(3, 2);
  G << 1, 0,
       0, 1,
       1, 0;
  VectorXd f(3);
  f << 1, 1, 0;
  const auto theta = chb::topic_preferences(f, G);
  REQUIRE(theta.has_value());
  CHECK((*theta)(0) == 0.5);
  CHECK((*theta)(1) == 0.5);
  f << 1, 0, 1;
  CHECK(*chb::topic_preferences(f, G) == VectorXd::Unit(2, 0));
  f.setZero();
  CHECK_FALSE(chb::topic_preferences(f, G).has_value());
}

namespace {

void check_bundle_invariants(const chb::InstanceBundle& b, int d) {
  for (int a = 0; a < b.num_items(); ++a)
    CHECK(std::abs(b.relevance.col(a).norm() - 1) < 1e-9);
  for (int u = 0; u < b.num_users(); ++u) CHECK(std::abs(b.beta.col(u).norm() - 1) < 1e-9);
  CHECK(b.coverage.minCoeff() >= 0.0);
  CHECK(b.coverage.maxCoeff() <= 1.0);
  const auto inst = chb::make_instance(b, d);
  CHECK(inst.catalog.topic_dim() == d);
  for (const auto& u : inst.users) {
    CHECK(std::abs(u.theta.sum() - 1) < 1e-12);
    CHECK(u.theta.minCoeff() >= 0.0);
    chb::check_user(u, inst.catalog);
    for (double lambda : {0.0, 0.5, 1.0}) {
      auto v = u;
      v.lambda = lambda;
      std::vector<int> all(inst.catalog.size());
      for (int a = 0; a < inst.catalog.size(); ++a) all[a] = a;
      for (int a = 0; a < inst.catalog.size(); ++a) {
        int clamps = 0;
        chb::attraction_vector(v, {{a}}, inst.catalog, &clamps);
        CHECK(clamps == 0);
      }
    }
  }
}

}  // namespace

TEST_CASE("synthetic bundles are deterministic and well formed") {
  WarningCapture cap;
  chb::SynthOptions o;
  o.n_items = 60;
  o.n_topics = 6;
  o.m = 5;
  o.n_users = 40;
  const auto a = chb::synthesize_instance(o);
  const auto b = chb::synthesize_instance(o);
  CHECK(a.config_hash() == b.config_hash());
  CHECK(a.relevance == b.relevance);
  CHECK(a.beta == b.beta);
  CHECK(a.coverage == b.coverage);
  o.seed = 2;
  CHECK(chb::synthesize_instance(o).beta != a.beta);
  check_bundle_invariants(a, 4);
  check_bundle_invariants(a, 6);
}

TEST_CASE("make_instance keeps the most populated topics") {
  chb::InstanceBundle b;
  b.relevance = MatrixXd::Identity(2, 3).leftCols(3);
  b.relevance.col(2) << 0.6, 0.8;
  b.coverage = MatrixXd::Constant(3, 3, 0.5);
  b.topics.resize(3, 3);
  b.topics << 1, 0, 1,
              0, 0, 1,
              0, 1, 1;
  b.beta = MatrixXd(2, 2);
  b.beta << 1, 0,
            0, 1;
  b.test_ratings.resize(2, 3);
  b.test_ratings << 1, 0, 0,
                    0, 1, 0;
  const auto inst = chb::make_instance(b, 1);
  CHECK(inst.topics == std::vector<int>{2});
  REQUIRE(inst.users.size() == 2);
  CHECK(inst.users[0].theta(0) == 1.0);
  const auto two = chb::make_instance(b, 2);
  CHECK(two.topics == std::vector<int>{0, 2});
  CHECK(two.users[1].theta == VectorXd::Unit(2, 1));
  CHECK_THROWS_AS(chb::make_instance(b, 4), chb::InvalidInput);
}

TEST_CASE("bundle round trip") {
  WarningCapture cap;
  chb::SynthOptions o;
  o.n_items = 30;
  o.n_topics = 4;
  o.m = 3;
  o.n_users = 20;
  const auto a = chb::synthesize_instance(o);
  const auto dir = std::filesystem::temp_directory_path() / "chb_bundle_roundtrip";
  std::filesystem::remove_all(dir);
  chb::write_bundle(a, dir);
  const auto b = chb::read_bundle(dir);
  CHECK(b.relevance == a.relevance);
  CHECK(b.coverage == a.coverage);
  CHECK(b.topics == a.topics);
  CHECK(b.beta == a.beta);
  CHECK(b.test_ratings == a.test_ratings);
  CHECK(b.item_ids == a.item_ids);
  CHECK(b.user_ids == a.user_ids);
  CHECK(b.topic_labels == a.topic_labels);
  CHECK(b.config_hash() == a.config_hash());
  CHECK(b.seed == a.seed);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundled toy data") {
  WarningCapture cap;
  const auto ratings = kSourceDir / "data" / "toy_ratings.tsv";
  const auto topics = kSourceDir / "data" / "toy_topics.csv";
  const auto r = chb::load_and_binarize(ratings);
  const double positives = r.F.sum() / static_cast<double>(r.F.size());
  CHECK(positives == doctest::Approx(0.07).epsilon(0.01));

  chb::PipelineOptions o;
  o.n_users = 0;
  o.n_items = 0;
  o.m = 5;
  const auto b = chb::prepare_bundle(ratings, topics, o);
  const auto again = chb::prepare_bundle(ratings, topics, o);
  CHECK(b.relevance == again.relevance);
  CHECK(b.beta == again.beta);
  CHECK(b.config_hash() == again.config_hash());
  check_bundle_invariants(b, b.num_topics());
  check_bundle_invariants(b, 4);

  o.n_users = 1000;
  CHECK_THROWS_AS(chb::prepare_bundle(ratings, topics, o), chb::InvalidInput);
}
