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

#include "chb/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "chb/log.hpp"
#include "chb/rng.hpp"
#include "chb/svd.hpp"

namespace chb {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  auto push = [&out](std::string_view f) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\r')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
  };
  std::string_view delim;
  if (line.find("::") != std::string_view::npos) delim = "::";
  else if (line.find('\t') != std::string_view::npos) delim = "\t";
  else if (line.find(',') != std::string_view::npos) delim = ",";
  if (delim.empty()) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\r') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      push(line.substr(start));
      break;
    }
    push(line.substr(start, pos - start));
    start = pos + delim.size();
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool skippable(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

std::vector<int> sorted_by_count_desc(const Eigen::VectorXi& counts) {
  std::vector<int> idx(counts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return counts(a) > counts(b); });
  return idx;
}

}  // namespace

double RatingsMatrix::positive_rate() const {
  return F.size() ? F.sum() / static_cast<double>(F.size()) : 0.0;
}

RatingsMatrix RatingsMatrix::rows(const std::vector<int>& idx) const {
  RatingsMatrix out;
  out.F = F(idx, Eigen::all);
  out.rated = rated(idx, Eigen::all);
  for (int i : idx) out.user_ids.push_back(user_ids[i]);
  out.item_ids = item_ids;
  return out;
}

RatingsMatrix RatingsMatrix::cols(const std::vector<int>& idx) const {
  RatingsMatrix out;
  out.F = F(Eigen::all, idx);
  out.rated = rated(Eigen::all, idx);
  out.user_ids = user_ids;
  for (int i : idx) out.item_ids.push_back(item_ids[i]);
  return out;
}

RatingsMatrix parse_ratings(std::istream& in, double threshold) {
  std::map<std::pair<long long, long long>, double> records;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(line);
    long long user = 0, item = 0;
    double rating = 0;
    const bool ok = fields.size() >= 3 && parse_number(fields[0], user) &&
                    parse_number(fields[1], item) && parse_number(fields[2], rating);
    if (!ok) {
      // A non-numeric first record is a header.
      if (!seen_data && fields.size() >= 3 && !parse_number(fields[0], user)) {
        seen_data = true;
        continue;
      }
      throw ParseError("malformed rating record", line_no);
    }
    seen_data = true;
    records[{user, item}] = rating;
  }
  if (records.empty()) throw InvalidInput("ratings input holds no records");

  std::set<long long> users, items;
  for (const auto& [key, _] : records) {
    users.insert(key.first);
    items.insert(key.second);
  }
  RatingsMatrix r;
  r.user_ids.assign(users.begin(), users.end());
  r.item_ids.assign(items.begin(), items.end());
  std::map<long long, int> urow, icol;
  for (std::size_t i = 0; i < r.user_ids.size(); ++i) urow[r.user_ids[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < r.item_ids.size(); ++i) icol[r.item_ids[i]] = static_cast<int>(i);
  r.F = MatrixXd::Zero(users.size(), items.size());
  r.rated = ByteMatrix::Zero(users.size(), items.size());
  for (const auto& [key, rating] : records) {
    const int u = urow[key.first], a = icol[key.second];
    r.rated(u, a) = 1;
    r.F(u, a) = rating >= threshold ? 1.0 : 0.0;
  }
  if (r.F.sum() == 0) warn("no rating reaches the positive threshold; F is all zero");
  return r;
}

RatingsMatrix load_and_binarize(const std::filesystem::path& path, double threshold) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open ratings file " + path.string());
  return parse_ratings(in, threshold);
}

TopicAssignment parse_topics(std::istream& in, const std::vector<long long>& item_ids,
                             const std::vector<std::string>& drop_labels) {
  std::map<long long, int> icol;
  for (std::size_t i = 0; i < item_ids.size(); ++i) icol[item_ids[i]] = static_cast<int>(i);
  const std::set<std::string> dropped(drop_labels.begin(), drop_labels.end());

  std::vector<std::pair<int, std::string>> pairs;
  std::set<std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(line);
    long long item = 0;
    if (fields.size() < 2 || !parse_number(fields[0], item)) {
      if (!seen_data && fields.size() >= 2) {
        seen_data = true;
        continue;
      }
      throw ParseError("malformed topic record", line_no);
    }
    seen_data = true;
    const auto it = icol.find(item);
    std::string_view rest = fields[1];
    // Multi-genre records may list labels joined by '|'.
    std::size_t start = 0;
    for (;;) {
      const auto bar = rest.find('|', start);
      std::string label(rest.substr(start, bar == std::string_view::npos ? rest.npos : bar - start));
      if (label.empty()) throw ParseError("empty topic label", line_no);
      if (!dropped.contains(label)) {
        labels.insert(label);
        if (it != icol.end()) pairs.emplace_back(it->second, label);
      }
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
  }
  TopicAssignment g;
  g.labels.assign(labels.begin(), labels.end());
  std::map<std::string, int> tcol;
  for (std::size_t j = 0; j < g.labels.size(); ++j) tcol[g.labels[j]] = static_cast<int>(j);
  g.G = MatrixXd::Zero(static_cast<Eigen::Index>(item_ids.size()), g.labels.size());
  for (const auto& [a, label] : pairs) g.G(a, tcol[label]) = 1.0;
  const long missing = (g.G.rowwise().sum().array() == 0).count();
  if (missing > 0) warn(fmt::format("{} items have no topic", missing));
  return g;
}

TopicAssignment load_topics(const std::filesystem::path& path,
                            const std::vector<long long>& item_ids,
                            const std::vector<std::string>& drop_labels) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open topic file " + path.string());
  return parse_topics(in, item_ids, drop_labels);
}

RatingsMatrix select_active(const RatingsMatrix& r, int n_users, int n_items) {
  require(n_users >= 1 && n_users <= r.num_users(), "select_active: n_users out of range");
  require(n_items >= 1 && n_items <= r.num_items(), "select_active: n_items out of range");
  const Eigen::MatrixXi counts = r.rated.cast<int>();
  auto users = sorted_by_count_desc(counts.rowwise().sum());
  auto items = sorted_by_count_desc(counts.colwise().sum().transpose());
  users.resize(n_users);
  items.resize(n_items);
  return r.rows(users).cols(items);
}

std::pair<RatingsMatrix, RatingsMatrix> split_users(const RatingsMatrix& r,
                                                    double fraction,
                                                    std::uint64_t seed) {
  require(fraction > 0 && fraction < 1, "split_users: fraction must lie in (0,1)");
  const int n = r.num_users();
  const int n_first = static_cast<int>(std::lround(fraction * n));
  require(n_first >= 1 && n_first < n, "split_users: split leaves a side empty");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(hash_seed({seed, 0x5b1d}));
  shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> first(perm.begin(), perm.begin() + n_first);
  std::vector<int> second(perm.begin() + n_first, perm.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {r.rows(first), r.rows(second)};
}

RelevanceFeatures relevance_features(const MatrixXd& f_train, const MatrixXd& f_test,
                                     int m, std::uint64_t seed) {
  require(m >= 1 && m <= std::min(f_train.rows(), f_train.cols()),
          "relevance_features: m exceeds training matrix rank bound");
  require(f_test.cols() == f_train.cols(), "relevance_features: item counts differ");
  const TruncatedSvd svd = randomized_svd(f_train, m, seed);

  RelevanceFeatures out;
  out.sigma = svd.sigma;
  out.z = (svd.V * svd.sigma.asDiagonal()).transpose();
  const VectorXd norms = out.z.colwise().norm().transpose();
  const double floor = 1e-10 * std::max(norms.maxCoeff(), 1e-300);
  out.item_ok.resize(out.z.cols());
  for (Eigen::Index a = 0; a < out.z.cols(); ++a) {
    out.item_ok[a] = norms(a) > floor;
    if (out.item_ok[a]) {
      out.z.col(a) /= norms(a);
    } else {
      out.z.col(a).setZero();
    }
  }

  const MatrixXd gram =
      out.z * out.z.transpose() + kLeastSquaresJitter * MatrixXd::Identity(m, m);
  out.beta = gram.ldlt().solve(out.z * f_test.transpose());
  out.user_ok.resize(out.beta.cols());
  for (Eigen::Index u = 0; u < out.beta.cols(); ++u) {
    const double n = out.beta.col(u).norm();
    out.user_ok[u] = n > 1e-12;
    if (out.user_ok[u]) {
      out.beta.col(u) /= n;
    } else {
      out.beta.col(u).setZero();
    }
  }
  out.negative_dots = ((out.z.transpose() * out.beta).array() < 0).count();
  return out;
}

long shift_to_nonnegative(const MatrixXd& z, MatrixXd& beta) {
  require(z.rows() == beta.rows(), "shift_to_nonnegative: dimension mismatch");
  long remaining = 0;
  for (Eigen::Index u = 0; u < beta.cols(); ++u) {
    auto b = beta.col(u);
    if (b.norm() == 0) continue;
    const VectorXd dots = z.transpose() * b;
    double needed = 0;
    for (Eigen::Index a = 0; a < z.cols(); ++a)
      if (dots(a) < 0 && z(0, a) > 1e-12) needed = std::max(needed, -dots(a) / z(0, a));
    if (needed > 0) {
      b(0) += needed * (1 + 1e-9) + 1e-12;
      b.normalize();
    }
    remaining += ((z.transpose() * b).array() < 0).count();
  }
  return remaining;
}

TopicFeatures topic_features(const MatrixXd& F, const MatrixXd& G) {
  require(F.cols() == G.rows(), "topic_features: F and G disagree on items");
  require(F.sum() > 0, "topic_features: F is all zero");
  const MatrixXd liked = F * G;  // users x topics
  const VectorXd likers = (liked.array() > 0).cast<double>().colwise().sum().transpose();
  const VectorXd popularity = F.colwise().sum().transpose();

  TopicFeatures out;
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    if (likers(j) > 0) {
      out.kept_topics.push_back(static_cast<int>(j));
    } else {
      warn(fmt::format("topic {} has no attracted user; dropped", j));
    }
  }
  out.x.resize(out.kept_topics.size(), F.cols());
  for (std::size_t k = 0; k < out.kept_topics.size(); ++k) {
    const int j = out.kept_topics[k];
    out.x.row(k) = (popularity.array() * G.col(j).array() / likers(j)).transpose();
  }
  for (Eigen::Index a = 0; a < F.cols(); ++a)
    if (G(a, out.kept_topics).sum() == 0) out.uncovered_items.push_back(static_cast<int>(a));
  if (!out.uncovered_items.empty())
    warn(fmt::format("{} items belong to no kept topic", out.uncovered_items.size()));
  return out;
}

std::optional<VectorXd> topic_preferences(const VectorXd& f_row, const MatrixXd& G) {
  require(f_row.size() == G.rows(), "topic_preferences: dimension mismatch");
  const VectorXd counts = G.transpose() * f_row;
  const double total = counts.sum();
  if (total <= 0) return std::nullopt;
  return VectorXd(counts / total);
}

std::string InstanceBundle::config_hash() const {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : provenance) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

Instance make_instance(const InstanceBundle& bundle, int d) {
  require(d >= 1 && d <= bundle.num_topics(), "make_instance: d out of range");
  const Eigen::VectorXi counts =
      (bundle.topics.array() > 0).cast<int>().colwise().sum().transpose();
  auto order = sorted_by_count_desc(counts);
  order.resize(d);
  std::sort(order.begin(), order.end());

  Instance inst;
  inst.topics = order;
  inst.catalog = Catalog(bundle.coverage(order, Eigen::all), bundle.relevance);
  const MatrixXd g = bundle.topics(Eigen::all, order);
  for (int u = 0; u < bundle.num_users(); ++u) {
    auto theta = topic_preferences(bundle.test_ratings.row(u).transpose(), g);
    if (!theta) continue;
    inst.users.push_back({u, std::move(*theta), bundle.beta.col(u), 0.5});
  }
  if (inst.users.empty()) throw InvalidInput("make_instance: no user likes any kept topic");
  return inst;
}

InstanceBundle assemble_bundle(const RatingsMatrix& r, const TopicAssignment& g,
                               const PipelineOptions& opts,
                               const std::string& provenance) {
  require(g.G.rows() == r.num_items(), "assemble_bundle: topic rows do not match items");
  auto [train, test] = split_users(r, opts.split_fraction, opts.seed);
  const auto rel = relevance_features(train.F, test.F, opts.m, hash_seed({opts.seed, 0x5fd}));

  std::vector<int> items;
  for (int a = 0; a < r.num_items(); ++a)
    if (rel.item_ok[a]) items.push_back(a);
  if (static_cast<int>(items.size()) < r.num_items())
    warn(fmt::format("{} items without training positives dropped",
                     r.num_items() - static_cast<int>(items.size())));
  require(!items.empty(), "assemble_bundle: no item has relevance features");

  const MatrixXd train_f = train.F(Eigen::all, items);
  const MatrixXd g_items = g.G(items, Eigen::all);
  const TopicFeatures tf = topic_features(train_f, g_items);

  InstanceBundle b;
  b.relevance = rel.z(Eigen::all, items);
  b.coverage = tf.x;
  b.topics = g_items(Eigen::all, tf.kept_topics);
  for (int j : tf.kept_topics) b.topic_labels.push_back(g.labels[j]);
  for (int a : items) b.item_ids.push_back(r.item_ids[a]);

  std::vector<int> users;
  for (int u = 0; u < test.num_users(); ++u)
    if (rel.user_ok[u]) users.push_back(u);
  if (static_cast<int>(users.size()) < test.num_users())
    warn(fmt::format("{} test users without positives dropped",
                     test.num_users() - static_cast<int>(users.size())));
  require(!users.empty(), "assemble_bundle: no usable test user");
  b.beta = rel.beta(Eigen::all, users);
  b.test_ratings = test.F(users, items);
  for (int u : users) b.user_ids.push_back(test.user_ids[u]);

  if (opts.shift_nonnegative) {
    const long left = shift_to_nonnegative(b.relevance, b.beta);
    if (left > 0) warn(fmt::format("{} item-user relevance products remain negative", left));
  } else {
    const long neg = ((b.relevance.transpose() * b.beta).array() < 0).count();
    if (neg > 0) warn(fmt::format("{} item-user relevance products are negative", neg));
  }
  b.provenance = provenance;
  b.seed = opts.seed;
  return b;
}

InstanceBundle prepare_bundle(const std::filesystem::path& ratings,
                              const std::filesystem::path& topics,
                              const PipelineOptions& opts) {
  RatingsMatrix r = load_and_binarize(ratings, opts.threshold);
  const int nu = opts.n_users > 0 ? opts.n_users : r.num_users();
  const int ni = opts.n_items > 0 ? opts.n_items : r.num_items();
  r = select_active(r, nu, ni);
  const TopicAssignment g = load_topics(topics, r.item_ids, opts.drop_topics);
  std::string drops;
  for (const auto& t : opts.drop_topics) drops += (drops.empty() ? "" : ",") + t;
  const std::string provenance = fmt::format(
      "prepare ratings={} topics={} users={} items={} m={} split={} threshold={} "
      "shift={} drop=[{}] seed={}",
      ratings.filename().string(), topics.filename().string(), nu, ni, opts.m,
      opts.split_fraction, opts.threshold, opts.shift_nonnegative, drops, opts.seed);
  return assemble_bundle(r, g, opts, provenance);
}

InstanceBundle synthesize_instance(const SynthOptions& o) {
  require(o.n_items >= 2 && o.n_topics >= 1 && o.m >= 1 && o.n_users >= 4,
          "synthesize_instance: sizes too small");
  require(o.density > 0 && o.density < 1, "synthesize_instance: density must lie in (0,1)");
  require(o.relevance_share >= 0 && o.relevance_share <= 1,
          "synthesize_instance: relevance_share must lie in [0,1]");
  Rng rng(hash_seed({o.seed, 0x5e7}));
  const int L = o.n_items, T = o.n_topics, U = o.n_users;

  // Topics: 1-3 per item, every topic used at least once.
  TopicAssignment g;
  g.G = MatrixXd::Zero(L, T);
  for (int j = 0; j < T; ++j) g.labels.push_back(fmt::format("t{:02d}", j));
  for (int a = 0; a < L; ++a) {
    const int k = 1 + static_cast<int>(rng.below(std::min(3, T)));
    while (g.G.row(a).sum() < k) g.G(a, static_cast<int>(rng.below(T))) = 1.0;
  }
  for (int j = 0; j < std::min(T, L); ++j) g.G(j, j) = 1.0;

  // Planted relevance: nonnegative latent factors with an item popularity
  // term, so the leading singular direction is shared by everyone.
  const int r = o.m;
  MatrixXd q(r, L), p(r, U);
  for (int a = 0; a < L; ++a)
    for (int i = 0; i < r; ++i) q(i, a) = std::abs(rng.normal());
  for (int u = 0; u < U; ++u)
    for (int i = 0; i < r; ++i) p(i, u) = std::pow(rng.uniform(), 3.0);
  MatrixXd rel = q.transpose() * p;  // L x U
  for (int u = 0; u < U; ++u) rel.col(u) /= rel.col(u).maxCoeff();

  // Planted topic interest concentrated on a few topics per user.
  MatrixXd interest(T, U);
  for (int u = 0; u < U; ++u) {
    for (int j = 0; j < T; ++j) interest(j, u) = std::pow(rng.uniform(), 4.0);
    interest.col(u) /= interest.col(u).maxCoeff();
  }
  const MatrixXd topical = (g.G * interest).cwiseMin(1.0);  // L x U

  const MatrixXd raw = o.relevance_share * rel + (1 - o.relevance_share) * topical;
  const double scale = o.density / raw.mean();
  const MatrixXd prob = (scale * raw).cwiseMin(1.0);
  if (prob.mean() < 0.9 * o.density)
    throw InvalidInput("synthesize_instance: density not reachable");

  RatingsMatrix ratings;
  ratings.F.resize(U, L);
  ratings.rated = ByteMatrix::Ones(U, L);
  for (int u = 0; u < U; ++u)
    for (int a = 0; a < L; ++a) ratings.F(u, a) = rng.bernoulli(prob(a, u)) ? 1.0 : 0.0;
  for (int u = 0; u < U; ++u) ratings.user_ids.push_back(u);
  for (int a = 0; a < L; ++a) ratings.item_ids.push_back(a);

  PipelineOptions popts;
  popts.n_users = U;
  popts.n_items = L;
  popts.m = o.m;
  popts.seed = o.seed;
  const std::string provenance = fmt::format(
      "synth items={} topics={} m={} users={} density={} share={} seed={}", L, T,
      o.m, U, o.density, o.relevance_share, o.seed);
  return assemble_bundle(ratings, g, popts, provenance);
}

}  // namespace chb
