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

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "chb/matrix_io.hpp"
#include "chb/pipeline.hpp"

namespace chb {

void write_matrix(std::ostream& os, const MatrixXd& m) {
  fmt::print(os, "{} {}\n", m.rows(), m.cols());
  std::string row;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    row.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) row += ' ';
      row += fmt::format("{}", m(r, c));
    }
    row += '\n';
    os << row;
  }
}

MatrixXd read_matrix(std::istream& is) {
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw ParseError("matrix: bad header", 1);
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(is >> m(r, c)))
        throw ParseError("matrix: truncated data", static_cast<std::size_t>(r) + 2);
  return m;
}

void write_matrix(const std::filesystem::path& path, const MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path.string());
  write_matrix(os, m);
}

MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open " + path.string());
  return read_matrix(is);
}

namespace {

constexpr const char* kBundleMagic = "chb-bundle";
constexpr int kBundleVersion = 1;

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& values) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path.string());
  for (const auto& v : values) os << v << '\n';
}

template <typename T>
std::vector<T> read_lines(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(line);
    } else {
      std::istringstream ss(line);
      T v;
      if (!(ss >> v)) throw ParseError("bad value in " + path.string(), out.size() + 1);
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

void write_bundle(const InstanceBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "meta.txt");
    if (!os) throw InvalidInput("cannot write bundle metadata in " + dir.string());
    fmt::print(os, "format = {} {}\n", kBundleMagic, kBundleVersion);
    fmt::print(os, "config_hash = {}\n", b.config_hash());
    fmt::print(os, "seed = {}\n", b.seed);
    fmt::print(os, "items = {}\nrel_dim = {}\ntopics = {}\nusers = {}\n",
               b.num_items(), b.rel_dim(), b.num_topics(), b.num_users());
    fmt::print(os, "provenance = {}\n", b.provenance);
  }
  write_matrix(dir / "relevance.txt", b.relevance);
  write_matrix(dir / "coverage.txt", b.coverage);
  write_matrix(dir / "topics.txt", b.topics);
  write_matrix(dir / "beta.txt", b.beta);
  write_matrix(dir / "test_ratings.txt", b.test_ratings);
  write_lines(dir / "item_ids.txt", b.item_ids);
  write_lines(dir / "user_ids.txt", b.user_ids);
  write_lines(dir / "topic_labels.txt", b.topic_labels);
}

InstanceBundle read_bundle(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "meta.txt");
  if (!meta) throw InvalidInput("no bundle at " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(meta, line)) {
    ++line_no;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("bundle metadata: expected key = value", line_no);
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (kv["format"] != fmt::format("{} {}", kBundleMagic, kBundleVersion))
    throw ParseError("bundle metadata: unsupported format '" + kv["format"] + "'", 1);

  InstanceBundle b;
  b.relevance = read_matrix(dir / "relevance.txt");
  b.coverage = read_matrix(dir / "coverage.txt");
  b.topics = read_matrix(dir / "topics.txt");
  b.beta = read_matrix(dir / "beta.txt");
  b.test_ratings = read_matrix(dir / "test_ratings.txt");
  b.item_ids = read_lines<long long>(dir / "item_ids.txt");
  b.user_ids = read_lines<long long>(dir / "user_ids.txt");
  b.topic_labels = read_lines<std::string>(dir / "topic_labels.txt");
  b.provenance = kv["provenance"];
  b.seed = std::stoull(kv["seed"]);

  const auto L = b.num_items();
  if (b.coverage.cols() != L || b.topics.rows() != L || b.test_ratings.cols() != L ||
      b.topics.cols() != b.num_topics() || b.beta.rows() != b.rel_dim() ||
      b.test_ratings.rows() != b.num_users() ||
      static_cast<int>(b.item_ids.size()) != L ||
      static_cast<int>(b.user_ids.size()) != b.num_users() ||
      static_cast<int>(b.topic_labels.size()) != b.num_topics())
    throw ParseError("bundle: inconsistent dimensions in " + dir.string(), 0);
  if (kv["config_hash"] != b.config_hash())
    throw ParseError("bundle: config hash does not match provenance", 0);
  return b;
}

}  // namespace chb
