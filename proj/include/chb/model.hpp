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

#ifndef CHB_MODEL_HPP_
#define CHB_MODEL_HPP_

// Item and list types plus the attraction-probability math of the hybrid
// cascade model: probabilistic topic coverage, coverage gain, the hybrid
// relevance + novelty attraction and the expected cascade reward.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "chb/common.hpp"

namespace chb {

template <typename Scalar>
struct BasicItem {
  int id = 0;
  Vector<Scalar> topic;      // x_a, per-topic coverage probabilities
  Vector<Scalar> relevance;  // z_a
};

/// The candidate set. Items are stored column-wise so that a whole catalog
/// can be pushed through a matrix product at once.
template <typename Scalar>
class BasicCatalog {
 public:
  BasicCatalog() = default;

  BasicCatalog(Matrix<Scalar> topics, Matrix<Scalar> relevance)
      : topics_(std::move(topics)), relevance_(std::move(relevance)) {
    require(topics_.cols() == relevance_.cols(),
            "catalog: topic and relevance item counts differ");
    require(topics_.cols() >= 1, "catalog: needs at least one item");
    require(((topics_.array() >= 0) && (topics_.array() <= 1)).all(),
            "catalog: topic coverage entries must lie in [0,1]");
  }

  explicit BasicCatalog(std::span<const BasicItem<Scalar>> items) {
    require(!items.empty(), "catalog: needs at least one item");
    const auto d = items.front().topic.size();
    const auto m = items.front().relevance.size();
    const auto n = static_cast<Eigen::Index>(items.size());
    Matrix<Scalar> topics(d, n), relevance(m, n);
    std::vector<bool> seen(items.size(), false);
    for (const auto& it : items) {
      require(it.topic.size() == d && it.relevance.size() == m,
              "catalog: items disagree on feature dimensions");
      require(it.id >= 0 && it.id < n && !seen[it.id],
              "catalog: item ids must be a permutation of [0, L)");
      seen[it.id] = true;
      topics.col(it.id) = it.topic;
      relevance.col(it.id) = it.relevance;
    }
    *this = BasicCatalog(std::move(topics), std::move(relevance));
  }

  int size() const { return static_cast<int>(topics_.cols()); }
  int topic_dim() const { return static_cast<int>(topics_.rows()); }
  int rel_dim() const { return static_cast<int>(relevance_.rows()); }

  const Matrix<Scalar>& topics() const { return topics_; }
  const Matrix<Scalar>& relevance() const { return relevance_; }

  BasicItem<Scalar> item(int a) const {
    return {a, topics_.col(a), relevance_.col(a)};
  }

 private:
  Matrix<Scalar> topics_;     // d x L
  Matrix<Scalar> relevance_;  // m x L
};

using Item = BasicItem<double>;
using Catalog = BasicCatalog<double>;

/// A ranked list of K distinct item ids, top position first.
struct RankedList {
  std::vector<int> positions;

  int size() const { return static_cast<int>(positions.size()); }
  int operator[](int k) const { return positions[k]; }
  bool operator==(const RankedList&) const = default;
};


/// First-click position in 1..K, or K+1 for no click.
struct ClickFeedback {
  int click_pos = 1;

  bool clicked(int K) const { return click_pos <= K; }
  bool operator==(const ClickFeedback&) const = default;
};

inline void validate_feedback(const ClickFeedback& fb, int K) {
  require(fb.click_pos >= 1 && fb.click_pos <= K + 1,
          "click position must lie in [1, K+1]");
}

/// Per-position attraction probabilities of a displayed list.
using AttractionVector = VectorXd;

/// Running state of 1 - g(A) for a growing prefix A. Gains are computed
/// against the product in O(d) instead of re-multiplying the prefix.
template <typename Scalar>
class CoverageTracker {
 public:
  explicit CoverageTracker(Eigen::Index d) : uncovered_(Vector<Scalar>::Ones(d)) {}

  template <typename Derived>
  Vector<Scalar> gain(const Eigen::MatrixBase<Derived>& x) const {
    require(x.size() == uncovered_.size(), "coverage gain: dimension mismatch");
    return x.cwiseProduct(uncovered_);
  }

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& x) {
    require(x.size() == uncovered_.size(), "coverage: dimension mismatch");
    uncovered_.array() *= (Scalar(1) - x.array());
  }

  Vector<Scalar> coverage() const {
    return (Scalar(1) - uncovered_.array()).matrix();
  }
  const Vector<Scalar>& uncovered() const { return uncovered_; }

 private:
  Vector<Scalar> uncovered_;
};

/// g(A): probability that the prefix covers each topic.
template <typename Scalar>
Vector<Scalar> topic_coverage(std::span<const BasicItem<Scalar>> prefix,
                              Eigen::Index d) {
  CoverageTracker<Scalar> tracker(d);
  for (const auto& it : prefix) tracker.add(it.topic);
  return tracker.coverage();
}

template <typename Scalar>
Vector<Scalar> topic_coverage(std::span<const BasicItem<Scalar>> prefix) {
  require(!prefix.empty(), "topic_coverage: empty prefix needs explicit d");
  return topic_coverage(prefix, prefix.front().topic.size());
}

/// Delta(a | A) = g(A + a) - g(A).
template <typename Scalar>
Vector<Scalar> coverage_gain(const BasicItem<Scalar>& item,
                             std::span<const BasicItem<Scalar>> prefix) {
  CoverageTracker<Scalar> tracker(item.topic.size());
  for (const auto& it : prefix) tracker.add(it.topic);
  return tracker.gain(item.topic);
}

/// z' beta + omega' theta. Not clamped.
template <typename D1, typename D2, typename D3, typename D4>
typename D1::Scalar hybrid_attraction(const Eigen::MatrixBase<D1>& omega,
                                      const Eigen::MatrixBase<D2>& z,
                                      const Eigen::MatrixBase<D3>& theta,
                                      const Eigen::MatrixBase<D4>& beta) {
  require(omega.size() == theta.size() && z.size() == beta.size(),
          "hybrid_attraction: dimension mismatch");
  return z.dot(beta) + omega.dot(theta);
}

/// Expected number of clicks on a list under the cascade model,
/// 1 - prod(1 - alpha_i).
template <typename Derived>
typename Derived::Scalar expected_list_reward(
    const Eigen::MatrixBase<Derived>& alpha) {
  using Scalar = typename Derived::Scalar;
  require(((alpha.array() >= 0) && (alpha.array() <= 1)).all(),
          "expected_list_reward: attraction outside [0,1]");
  return Scalar(1) - (Scalar(1) - alpha.array()).prod();
}

inline int realized_reward(const ClickFeedback& fb, int K) {
  validate_feedback(fb, K);
  return fb.clicked(K) ? 1 : 0;
}

inline void validate_list(const RankedList& list, int num_items) {
  require(list.size() >= 1 && list.size() <= num_items,
          "ranked list length must lie in [1, L]");
  std::vector<bool> seen(num_items, false);
  for (int a : list.positions) {
    require(a >= 0 && a < num_items, "ranked list holds an unknown item id");
    require(!seen[a], "ranked list holds a duplicate item");
    seen[a] = true;
  }
}

}  // namespace chb

#endif  // CHB_MODEL_HPP_
