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

#ifndef CHB_POLICY_HPP_
#define CHB_POLICY_HPP_

// The CascadeHybrid learner: a hybrid ridge-regression UCB whose statistics
// are kept in Schur-complement form, so the joint (d+m)-dimensional
// estimate factors into a d-block (topic gains) and an m-block (relevance).
// The four baselines are the same state machine with d = 0 or m = 0.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "chb/feature_map.hpp"
#include "chb/model.hpp"

namespace chb {

template <typename Scalar>
struct PolicyState {
  int d = 0;
  int m = 0;
  Scalar gamma = 1;
  long step = 1;

  Matrix<Scalar> M;      // I_m + sum z z'
  Matrix<Scalar> M_inv;  // Sherman-Morrison maintained
  Matrix<Scalar> B;      // sum omega z', d x m
  Matrix<Scalar> H;      // I_d + sum omega omega' - B M^-1 B'
  Matrix<Scalar> H_inv;
  Vector<Scalar> y;      // sum of clicked z
  Vector<Scalar> u;      // sum of clicked omega - B M^-1 y

  // Uncorrected accumulators I_d + sum omega omega' and sum of clicked omega.
  // Together with M, B and y they determine the whole state, which is what
  // the positive-definiteness guard rebuilds from.
  Matrix<Scalar> topic_gram;
  Vector<Scalar> topic_clicks;

  int guard_rebuilds = 0;
};

template <typename Scalar>
struct ParameterEstimate {
  Vector<Scalar> theta;  // topic preference estimate, size d
  Vector<Scalar> beta;   // relevance preference estimate, size m
};

template <typename Scalar = double>
PolicyState<Scalar> init_state(int d, int m, Scalar gamma) {
  require(d >= 0 && m >= 0 && d + m >= 1, "init_state: need d + m >= 1");
  require(gamma > 0, "init_state: gamma must be positive");
  PolicyState<Scalar> s;
  s.d = d;
  s.m = m;
  s.gamma = gamma;
  s.M = Matrix<Scalar>::Identity(m, m);
  s.M_inv = Matrix<Scalar>::Identity(m, m);
  s.B = Matrix<Scalar>::Zero(d, m);
  s.H = Matrix<Scalar>::Identity(d, d);
  s.H_inv = Matrix<Scalar>::Identity(d, d);
  s.y = Vector<Scalar>::Zero(m);
  s.u = Vector<Scalar>::Zero(d);
  s.topic_gram = Matrix<Scalar>::Identity(d, d);
  s.topic_clicks = Vector<Scalar>::Zero(d);
  return s;
}

template <typename Scalar>
ParameterEstimate<Scalar> estimate_parameters(const PolicyState<Scalar>& s) {
  ParameterEstimate<Scalar> est;
  est.theta = s.H_inv * s.u;
  est.beta = s.M_inv * (s.y - s.B.transpose() * est.theta);
  return est;
}

/// phi' O^-1 phi for phi = [omega; z], evaluated blockwise. With
/// v = M^-1 z and w = omega - B v this is w' H^-1 w + z' v, which expands to
/// the four-term hybrid width.
template <typename Scalar, typename D1, typename D2>
Scalar confidence_width(const PolicyState<Scalar>& s,
                        const Eigen::MatrixBase<D1>& omega,
                        const Eigen::MatrixBase<D2>& z) {
  require(omega.size() == s.d && z.size() == s.m,
          "confidence_width: dimension mismatch");
  const Vector<Scalar> v = s.M_inv * z;
  const Vector<Scalar> w = omega - s.B * v;
  const Scalar width = w.dot(s.H_inv * w) + z.dot(v);
  return std::max(width, Scalar(0));
}

template <typename Scalar, typename D1, typename D2>
Scalar ucb(const PolicyState<Scalar>& s, const ParameterEstimate<Scalar>& est,
           const Eigen::MatrixBase<D1>& omega, const Eigen::MatrixBase<D2>& z) {
  const Scalar width = confidence_width(s, omega, z);
  return omega.dot(est.theta) + z.dot(est.beta) + s.gamma * std::sqrt(width);
}

template <typename Scalar, typename D1, typename D2>
Scalar ucb(const PolicyState<Scalar>& s, const Eigen::MatrixBase<D1>& omega,
           const Eigen::MatrixBase<D2>& z) {
  return ucb(s, estimate_parameters(s), omega, z);
}

namespace detail {

template <typename Scalar>
Scalar identity_residual(const Matrix<Scalar>& a, const Matrix<Scalar>& a_inv) {
  if (a.size() == 0) return 0;
  return (a * a_inv - Matrix<Scalar>::Identity(a.rows(), a.cols())).norm();
}

template <typename Scalar>
Matrix<Scalar> spd_inverse(const Matrix<Scalar>& a) {
  if (a.size() == 0) return a;
  return a.llt().solve(Matrix<Scalar>::Identity(a.rows(), a.cols()));
}

template <typename Scalar>
void rebuild_from_accumulators(PolicyState<Scalar>& s) {
  s.M_inv = spd_inverse(s.M);
  const Matrix<Scalar> BMinv = s.B * s.M_inv;
  s.H = s.topic_gram - BMinv * s.B.transpose();
  s.u = s.topic_clicks - BMinv * s.y;
  s.H_inv = spd_inverse(s.H);
}

}  // namespace detail

inline constexpr double kInverseResidualLimit = 1e-6;

/// Statistics update for one step. `omegas` (d x k) and `zs` (m x k) are the
/// observed items in display order; `clicked` indexes the clicked column or
/// is negative when nothing was clicked.
template <typename Scalar, typename D1, typename D2>
void observe(PolicyState<Scalar>& s, const Eigen::MatrixBase<D1>& omegas,
             const Eigen::MatrixBase<D2>& zs, int clicked) {
  require(omegas.rows() == s.d && zs.rows() == s.m &&
              omegas.cols() == zs.cols(),
          "observe: dimension mismatch");
  require(clicked < omegas.cols(), "observe: clicked index out of range");

  // Undo the Schur correction so H and u hold raw sums.
  {
    const Matrix<Scalar> BMinv = s.B * s.M_inv;
    s.H.noalias() += BMinv * s.B.transpose();
    s.u.noalias() += BMinv * s.y;
  }
  for (Eigen::Index k = 0; k < omegas.cols(); ++k) {
    const auto omega = omegas.col(k);
    const auto z = zs.col(k);
    if (s.m > 0) {
      const Vector<Scalar> Mz = s.M_inv * z;
      s.M_inv -= (Mz * Mz.transpose()) / (Scalar(1) + z.dot(Mz));
      s.M.noalias() += z * z.transpose();
    }
    s.B.noalias() += omega * z.transpose();
    s.H.noalias() += omega * omega.transpose();
    s.topic_gram.noalias() += omega * omega.transpose();
  }
  if (clicked >= 0) {
    s.y += zs.col(clicked);
    s.u += omegas.col(clicked);
    s.topic_clicks += omegas.col(clicked);
  }
  {
    const Matrix<Scalar> BMinv = s.B * s.M_inv;
    s.H.noalias() -= BMinv * s.B.transpose();
    s.u.noalias() -= BMinv * s.y;
  }
  s.H_inv = detail::spd_inverse(s.H);

  if (detail::identity_residual(s.H, s.H_inv) > kInverseResidualLimit ||
      detail::identity_residual(s.M, s.M_inv) > kInverseResidualLimit) {
    detail::rebuild_from_accumulators(s);
    ++s.guard_rebuilds;
  }
  ++s.step;
}

/// Greedy UCB list: position by position, the remaining item with the highest
/// optimistic attraction given the coverage of the items already placed.
/// Ties go to the lowest item id.
template <typename Scalar>
RankedList select_list(const PolicyState<Scalar>& s, const FeatureMap& fmap,
                       int K) {
  const int L = fmap.num_items();
  require(K >= 1 && K <= L, "select_list: K must lie in [1, L]");
  require(fmap.d() == s.d && fmap.m() == s.m,
          "select_list: feature map does not match policy dimensions");

  const Matrix<Scalar> X = fmap.cover().template cast<Scalar>();
  const Matrix<Scalar> Z = fmap.linear().template cast<Scalar>();
  const auto est = estimate_parameters(s);

  // Per-item terms that do not depend on the prefix. With v = M^-1 z and
  // p = H^-1 B v the width splits as
  //   omega' H^-1 omega - 2 omega' p + (z' v + (Bv)' p).
  const Matrix<Scalar> V = s.M_inv * Z;
  const Vector<Scalar> base_mean = Z.transpose() * est.beta;
  Vector<Scalar> base_width = Z.cwiseProduct(V).colwise().sum().transpose();
  Matrix<Scalar> P;
  if (s.d > 0) {
    const Matrix<Scalar> BV = s.B * V;
    P = s.H_inv * BV;
    base_width += BV.cwiseProduct(P).colwise().sum().transpose();
  }

  RankedList list;
  list.positions.reserve(K);
  std::vector<bool> taken(L, false);
  CoverageTracker<Scalar> tracker(s.d);
  std::vector<Scalar> omega;
  for (int k = 0; k < K; ++k) {
    int best = -1;
    Scalar best_score = -std::numeric_limits<Scalar>::infinity();
    for (int a = 0; a < L; ++a) {
      if (taken[a]) continue;
      Scalar mean = base_mean(a);
      Scalar width = base_width(a);
      if (s.d > 0) {
        const auto& supp = fmap.support(a);
        omega.resize(supp.size());
        for (std::size_t i = 0; i < supp.size(); ++i)
          omega[i] = X(supp[i], a) * tracker.uncovered()(supp[i]);
        for (std::size_t i = 0; i < supp.size(); ++i) {
          const int ji = supp[i];
          mean += omega[i] * est.theta(ji);
          Scalar row = 0;
          for (std::size_t j = 0; j < supp.size(); ++j)
            row += s.H_inv(ji, supp[j]) * omega[j];
          width += omega[i] * (row - 2 * P(ji, a));
        }
      }
      const Scalar score = mean + s.gamma * std::sqrt(std::max(width, Scalar(0)));
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    taken[best] = true;
    list.positions.push_back(best);
    if (s.d > 0) tracker.add(X.col(best));
  }
  return list;
}

/// Applies click feedback on a displayed list: items down to the click (or
/// the whole list when nothing was clicked) are observed, and only the
/// clicked one is positive. Gains are recomputed against the displayed prefix.
template <typename Scalar>
void update(PolicyState<Scalar>& s, const RankedList& list,
            const ClickFeedback& feedback, const FeatureMap& fmap) {
  const int K = list.size();
  validate_feedback(feedback, K);
  require(fmap.d() == s.d && fmap.m() == s.m,
          "update: feature map does not match policy dimensions");
  const int observed = std::min(K, feedback.click_pos);
  const Matrix<Scalar> omegas =
      fmap.displayed_gains(list, observed).template cast<Scalar>();
  Matrix<Scalar> zs(s.m, observed);
  for (int k = 0; k < observed; ++k)
    zs.col(k) = fmap.linear().col(list[k]).template cast<Scalar>();
  observe(s, omegas, zs, feedback.clicked(K) ? feedback.click_pos - 1 : -1);
}

/// Smallest exploration weight covered by the regret guarantee:
/// sqrt((m+d) log(1 + nK/(m+d)) + 2 log n) + ||w*||.
inline double theoretical_gamma(int m, int d, long n, int K, double w_norm) {
  require(n >= 1 && K >= 1, "theoretical_gamma: n and K must be positive");
  require(m >= 0 && d >= 0 && m + d >= 1, "theoretical_gamma: need m + d >= 1");
  require(w_norm >= 0 && w_norm <= 1, "theoretical_gamma: ||w*|| must be in [0,1]");
  const double dim = m + d;
  const double nk = static_cast<double>(n) * K;
  return std::sqrt(dim * std::log1p(nk / dim) + 2.0 * std::log(static_cast<double>(n))) +
         w_norm;
}

/// A learner bound to its feature map.
class CascadePolicy {
 public:
  CascadePolicy(FeatureKind kind, const Catalog& catalog, double gamma,
                UnitRangeMode mode = UnitRangeMode::kClamp)
      : fmap_(kind, catalog, mode),
        state_(init_state<double>(fmap_.d(), fmap_.m(), gamma)) {}

  RankedList select(int K) const { return select_list(state_, fmap_, K); }
  void update(const RankedList& list, const ClickFeedback& fb) {
    chb::update(state_, list, fb, fmap_);
  }

  FeatureKind kind() const { return fmap_.kind(); }
  const FeatureMap& feature_map() const { return fmap_; }
  const PolicyState<double>& state() const { return state_; }

 private:
  FeatureMap fmap_;
  PolicyState<double> state_;
};

// Snapshot format: a text header line
//   chb-policy-state 1 <d> <m>
// then gamma, step and guard count, followed by each matrix as
// "<name> <rows> <cols>" and its entries row-major.

template <typename Scalar>
void save_snapshot(std::ostream& os, const PolicyState<Scalar>& s) {
  os << "chb-policy-state 1 " << s.d << ' ' << s.m << '\n';
  os << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  os << "gamma " << s.gamma << "\nstep " << s.step << "\nguard "
     << s.guard_rebuilds << '\n';
  auto put = [&os](const char* name, const auto& mat) {
    os << name << ' ' << mat.rows() << ' ' << mat.cols() << '\n';
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat.cols(); ++c)
        os << (c ? " " : "") << mat(r, c);
      os << '\n';
    }
  };
  put("M", s.M);
  put("M_inv", s.M_inv);
  put("B", s.B);
  put("H", s.H);
  put("H_inv", s.H_inv);
  put("y", s.y);
  put("u", s.u);
  put("topic_gram", s.topic_gram);
  put("topic_clicks", s.topic_clicks);
}

template <typename Scalar>
PolicyState<Scalar> load_snapshot(std::istream& is) {
  std::string magic, key;
  int version = 0;
  PolicyState<Scalar> s;
  if (!(is >> magic >> version >> s.d >> s.m) || magic != "chb-policy-state")
    throw ParseError("policy snapshot: bad header", 1);
  if (version != 1) throw ParseError("policy snapshot: unsupported version", 1);
  if (!(is >> key >> s.gamma) || key != "gamma" || !(is >> key >> s.step) ||
      key != "step" || !(is >> key >> s.guard_rebuilds) || key != "guard")
    throw ParseError("policy snapshot: bad scalar block", 0);
  auto get = [&is](const char* name, auto& mat, Eigen::Index rows,
                   Eigen::Index cols) {
    std::string tag;
    Eigen::Index r = 0, c = 0;
    if (!(is >> tag >> r >> c) || tag != name || r != rows || c != cols)
      throw ParseError(std::string("policy snapshot: bad block ") + name, 0);
    mat.resize(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j)
        if (!(is >> mat(i, j)))
          throw ParseError(std::string("policy snapshot: truncated ") + name, 0);
  };
  get("M", s.M, s.m, s.m);
  get("M_inv", s.M_inv, s.m, s.m);
  get("B", s.B, s.d, s.m);
  get("H", s.H, s.d, s.d);
  get("H_inv", s.H_inv, s.d, s.d);
  get("y", s.y, s.m, 1);
  get("u", s.u, s.d, 1);
  get("topic_gram", s.topic_gram, s.d, s.d);
  get("topic_clicks", s.topic_clicks, s.d, 1);
  return s;
}

}  // namespace chb

#endif  // CHB_POLICY_HPP_
