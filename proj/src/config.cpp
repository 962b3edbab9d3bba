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

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/format.h>

#include "chb/experiment.hpp"

namespace chb {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::string v = trim(value);
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_as(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw InvalidInput(fmt::format("config: bad value '{}' for {}", text, key));
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_as<T>(key, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  return fmt::format("{}", fmt::join(values, ", "));
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!policies.empty() && !lambdas.empty() && !K_values.empty() && !d_values.empty(),
          "config: policies, lambdas, K and d lists must be nonempty");
  for (double l : lambdas) require(l >= 0 && l <= 1, "config: lambda must lie in [0,1]");
  for (int k : K_values) require(k >= 1, "config: K must be positive");
  for (int d : d_values) require(d >= 1, "config: d must be positive");
  require(n_steps >= 1, "config: steps must be positive");
  require(users >= 1 && repeats >= 1, "config: users and repeats must be positive");
  require(log_stride >= 1 && n_steps % log_stride == 0,
          "config: log_stride must divide steps");
  require(!gamma || *gamma > 0, "config: gamma must be positive");
}

void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "source") {
    cfg.source = value;
  } else if (key == "synth.items") {
    cfg.synth.n_items = parse_as<int>(key, value);
  } else if (key == "synth.topics") {
    cfg.synth.n_topics = parse_as<int>(key, value);
  } else if (key == "synth.rel_dim") {
    cfg.synth.m = parse_as<int>(key, value);
  } else if (key == "synth.users") {
    cfg.synth.n_users = parse_as<int>(key, value);
  } else if (key == "synth.density") {
    cfg.synth.density = parse_as<double>(key, value);
  } else if (key == "synth.relevance_share") {
    cfg.synth.relevance_share = parse_as<double>(key, value);
  } else if (key == "synth.seed") {
    cfg.synth.seed = parse_as<std::uint64_t>(key, value);
  } else if (key == "policies") {
    cfg.policies.clear();
    for (const auto& p : split_list(value)) cfg.policies.push_back(parse_policy(p));
  } else if (key == "lambdas") {
    cfg.lambdas = parse_list<double>(key, value);
  } else if (key == "K") {
    cfg.K_values = parse_list<int>(key, value);
  } else if (key == "d") {
    cfg.d_values = parse_list<int>(key, value);
  } else if (key == "steps") {
    cfg.n_steps = parse_as<long>(key, value);
  } else if (key == "users") {
    cfg.users = parse_as<int>(key, value);
  } else if (key == "repeats") {
    cfg.repeats = parse_as<int>(key, value);
  } else if (key == "gamma") {
    if (value == "theoretical") {
      cfg.gamma.reset();
    } else {
      cfg.gamma = parse_as<double>(key, value);
    }
  } else if (key == "seed") {
    cfg.master_seed = parse_as<std::uint64_t>(key, value);
  } else if (key == "log_stride") {
    cfg.log_stride = parse_as<int>(key, value);
  } else if (key == "lsb_full_range") {
    cfg.lsb_full_range = parse_unit_range_mode(value);
  } else {
    throw InvalidInput("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key = value", line_no);
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  return parse_config(in);
}

std::string to_text(const ExperimentConfig& c) {
  std::vector<std::string> pols;
  for (auto p : c.policies) pols.emplace_back(policy_name(p));
  std::string out;
  out += fmt::format("source = {}\n", c.source);
  if (c.source == "synthetic") {
    out += fmt::format("synth.items = {}\nsynth.topics = {}\nsynth.rel_dim = {}\n",
                       c.synth.n_items, c.synth.n_topics, c.synth.m);
    out += fmt::format("synth.users = {}\nsynth.density = {}\n", c.synth.n_users,
                       c.synth.density);
    out += fmt::format("synth.relevance_share = {}\nsynth.seed = {}\n",
                       c.synth.relevance_share, c.synth.seed);
  }
  out += fmt::format("policies = {}\n", join(pols));
  out += fmt::format("lambdas = {}\n", join(c.lambdas));
  out += fmt::format("K = {}\nd = {}\n", join(c.K_values), join(c.d_values));
  out += fmt::format("steps = {}\nusers = {}\nrepeats = {}\n", c.n_steps, c.users,
                     c.repeats);
  out += fmt::format("gamma = {}\n",
                     c.gamma ? fmt::format("{}", *c.gamma) : std::string("theoretical"));
  out += fmt::format("seed = {}\nlog_stride = {}\n", c.master_seed, c.log_stride);
  out += fmt::format("lsb_full_range = {}\n", unit_range_mode_name(c.lsb_full_range));
  return out;
}

}  // namespace chb
