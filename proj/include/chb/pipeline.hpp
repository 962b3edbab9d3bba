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

#ifndef CHB_PIPELINE_HPP_
#define CHB_PIPELINE_HPP_

// Turns rating logs into simulator instances: binarize, keep the most active
// users and items, split users, learn relevance features by truncated SVD on
// the training half, and derive topic coverage and topic preferences from
// the genre assignment.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chb/environment.hpp"

namespace chb {

using ByteMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct RatingsMatrix {
  MatrixXd F;        // users x items, entries 0/1
  ByteMatrix rated;  // 1 where a rating exists
  std::vector<long long> user_ids;
  std::vector<long long> item_ids;

  int num_users() const { return static_cast<int>(F.rows()); }
  int num_items() const { return static_cast<int>(F.cols()); }
  /// Fraction of user-item pairs that are positive.
  double positive_rate() const;
  RatingsMatrix rows(const std::vector<int>& idx) const;
  RatingsMatrix cols(const std::vector<int>& idx) const;
};

struct TopicAssignment {
  MatrixXd G;  // items x topics, entries 0/1
  std::vector<std::string> labels;

  int num_topics() const { return static_cast<int>(G.cols()); }
};

/// Reads (user, item, rating[, ...]) records, tab-, comma-, "::"- or
/// whitespace-separated, with an optional header line. Ratings >= threshold
/// map to 1.
RatingsMatrix load_and_binarize(const std::filesystem::path& path,
                                double threshold = 5.0);
RatingsMatrix parse_ratings(std::istream& in, double threshold = 5.0);

/// Reads (item, topic-label) records; aligns rows with `item_ids`. Items
/// without any listed topic get an all-zero row and a warning. Labels listed
/// in `drop_labels` are removed.
TopicAssignment load_topics(const std::filesystem::path& path,
                            const std::vector<long long>& item_ids,
                            const std::vector<std::string>& drop_labels = {});
TopicAssignment parse_topics(std::istream& in,
                             const std::vector<long long>& item_ids,
                             const std::vector<std::string>& drop_labels = {});

/// Keeps the n_users users with most ratings and the n_items most-rated
/// items, in activity order (ties by position in the input).
RatingsMatrix select_active(const RatingsMatrix& r, int n_users, int n_items);

/// Seeded disjoint row split; the first part holds round(fraction * U) rows.
/// Row order within each part follows the input.
std::pair<RatingsMatrix, RatingsMatrix> split_users(const RatingsMatrix& r,
                                                    double fraction,
                                                    std::uint64_t seed);

struct RelevanceFeatures {
  MatrixXd z;                // m x items, unit columns (zero where undefined)
  MatrixXd beta;             // m x test users, unit columns (zero where undefined)
  VectorXd sigma;            // leading singular values of F_train
  std::vector<bool> item_ok;  // z_a well defined
  std::vector<bool> user_ok;  // beta_u well defined
  long negative_dots = 0;    // (item, user) pairs with z' beta < 0
};

inline constexpr double kLeastSquaresJitter = 1e-9;

/// Item features are the rows of V Sigma from a rank-m SVD of F_train,
/// each scaled to unit length; beta_u is the least-squares fit of user u's
/// test row on those features, scaled to unit length.
RelevanceFeatures relevance_features(const MatrixXd& f_train,
                                     const MatrixXd& f_test, int m,
                                     std::uint64_t seed);

/// Moves each beta_u the least amount along the leading singular direction
/// needed to make every z_a' beta_u nonnegative, then renormalizes. Returns
/// the number of pairs that stay negative (items with no weight on the
/// leading direction).
long shift_to_nonnegative(const MatrixXd& z, MatrixXd& beta);

struct TopicFeatures {
  MatrixXd x;                     // kept topics x items
  std::vector<int> kept_topics;   // columns of G that survived
  std::vector<int> uncovered_items;
};

/// x_{a,j} = #{u : F_ua = 1} G_aj / #{u : user u likes some item of topic j}.
/// Topics nobody likes are dropped with a warning.
TopicFeatures topic_features(const MatrixXd& F, const MatrixXd& G);

/// theta_j = sum_a F_ua G_aj / sum_j' sum_a F_ua G_aj'. Empty when the user
/// likes nothing in any topic.
std::optional<VectorXd> topic_preferences(const VectorXd& f_row, const MatrixXd& G);

/// Everything needed to build simulator instances for any topic count.
struct InstanceBundle {
  MatrixXd relevance;       // m x L
  MatrixXd coverage;        // T x L, x over all kept topics
  MatrixXd topics;          // L x T, G restricted to kept topics
  std::vector<std::string> topic_labels;
  MatrixXd beta;            // m x U
  MatrixXd test_ratings;    // U x L
  std::vector<long long> item_ids;
  std::vector<long long> user_ids;
  std::string provenance;   // canonical config text
  std::uint64_t seed = 0;

  int num_items() const { return static_cast<int>(relevance.cols()); }
  int rel_dim() const { return static_cast<int>(relevance.rows()); }
  int num_topics() const { return static_cast<int>(coverage.rows()); }
  int num_users() const { return static_cast<int>(beta.cols()); }
  std::string config_hash() const;
};

struct Instance {
  Catalog catalog;
  std::vector<UserModel> users;  // lambda left at 0.5; set per run
  std::vector<int> topics;       // bundle topic columns in use
};

/// Keeps the d topics covering the most items (ties by topic index) and
/// recomputes each user's topic preference over them; users who like no
/// item in the kept topics are left out.
Instance make_instance(const InstanceBundle& bundle, int d);

struct PipelineOptions {
  int n_users = 1000;
  int n_items = 1000;
  int m = 10;
  double split_fraction = 0.5;
  double threshold = 5.0;
  bool shift_nonnegative = true;
  std::vector<std::string> drop_topics;
  std::uint64_t seed = 1;
};

/// Split, features, preferences and filtering on an already-binarized
/// matrix with topic assignment aligned to its columns.
InstanceBundle assemble_bundle(const RatingsMatrix& r, const TopicAssignment& g,
                               const PipelineOptions& opts,
                               const std::string& provenance);

/// Full path from files on disk.
InstanceBundle prepare_bundle(const std::filesystem::path& ratings,
                              const std::filesystem::path& topics,
                              const PipelineOptions& opts);

struct SynthOptions {
  int n_items = 200;
  int n_topics = 10;
  int m = 10;
  int n_users = 100;     // before the train/test split
  double density = 0.3;   // target fraction of positive pairs
  double relevance_share = 0.5;  // planted weight of the relevance part
  std::uint64_t seed = 1;
};

/// Planted-preference generator: samples G (1-3 topics per item) and F from
/// a known relevance + topic-interest model, then runs assemble_bundle so
/// synthetic data goes through the same code path as real data.
InstanceBundle synthesize_instance(const SynthOptions& opts);

void write_bundle(const InstanceBundle& bundle, const std::filesystem::path& dir);
InstanceBundle read_bundle(const std::filesystem::path& dir);

}  // namespace chb

#endif  // CHB_PIPELINE_HPP_
