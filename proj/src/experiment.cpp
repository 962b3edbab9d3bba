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

#include "chb/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "chb/environment.hpp"
#include "chb/log.hpp"
#include "chb/oracle.hpp"
#include "chb/rng.hpp"

namespace chb {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string trace_rows(const RegretTrace& t) {
  std::string out;
  const auto& k = t.key;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    out += fmt::format("{},{},{},{},{},{},{},{:.10g},{},{}\n", policy_name(k.policy),
                       k.lambda, k.K, k.d, k.user, k.repeat, t.steps[i],
                       t.cum_regret[i], t.clicks[i], t.clamps[i]);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T field(const std::string& text, std::size_t line_no) {
  std::istringstream ss(text);
  T v{};
  if (!(ss >> v) || !ss.eof()) throw ParseError("csv: bad field '" + text + "'", line_no);
  return v;
}

// Fingerprint of everything that influences a single run other than its key.
std::string run_fingerprint(const ExperimentConfig& cfg) {
  ExperimentConfig base = cfg;
  const ExperimentConfig defaults;
  base.policies = defaults.policies;
  base.lambdas = defaults.lambdas;
  base.K_values = defaults.K_values;
  base.d_values = defaults.d_values;
  base.users = defaults.users;
  base.repeats = defaults.repeats;
  return fmt::format("{:016x}", fnv1a(to_text(base)));
}

std::filesystem::path run_file(const std::filesystem::path& dir, const RunKey& k) {
  return dir / fmt::format("{}_l{}_K{}_d{}_u{}_r{}.csv", policy_name(k.policy),
                           k.lambda, k.K, k.d, k.user, k.repeat);
}

}  // namespace

std::uint64_t run_seed(std::uint64_t master_seed, int user_id, int repeat) {
  return hash_seed({master_seed, static_cast<std::uint64_t>(user_id),
                    static_cast<std::uint64_t>(repeat)});
}

RegretTrace run_single(const Instance& instance, const UserModel& base_user,
                       const RunSpec& spec) {
  require(spec.n_steps >= 1 && spec.log_stride >= 1, "run_single: bad step settings");
  const Catalog& catalog = instance.catalog;
  UserModel user = base_user;
  user.lambda = spec.key.lambda;
  check_user(user, catalog);
  const int K = spec.key.K;

  const RankedList reference = greedy_benchmark(user, catalog, K);
  const double reference_reward = list_reward(user, catalog, reference);

  double gamma = 1.0;
  if (spec.gamma) {
    gamma = *spec.gamma;
  } else {
    const FeatureMap probe(spec.key.policy, catalog, spec.lsb_full_range);
    gamma = theoretical_gamma(probe.m(), probe.d(), spec.n_steps, K, 1.0);
  }
  CascadePolicy policy(spec.key.policy, catalog, gamma, spec.lsb_full_range);
  Rng rng(spec.key.seed);

  RegretTrace trace;
  trace.key = spec.key;
  double cum = 0;
  long clicks = 0, clamps = 0;
  for (long t = 1; t <= spec.n_steps; ++t) {
    const StepOutcome out = run_step(policy, user, catalog, K, rng);
    cum += reference_reward - out.expected_reward;
    clicks += out.feedback.clicked(K) ? 1 : 0;
    clamps += out.clamp_count;
    if (t % spec.log_stride == 0) {
      trace.steps.push_back(t);
      trace.cum_regret.push_back(cum);
      trace.clicks.push_back(clicks);
      trace.clamps.push_back(clamps);
    }
  }
  trace.guard_rebuilds = policy.state().guard_rebuilds;
  if (trace.guard_rebuilds > 0)
    warn(fmt::format("{} user {} repeat {}: {} inverse rebuilds", policy_name(spec.key.policy),
                     spec.key.user, spec.key.repeat, trace.guard_rebuilds));
  return trace;
}

InstanceBundle load_source(const ExperimentConfig& cfg) {
  if (cfg.source == "synthetic") return synthesize_instance(cfg.synth);
  return read_bundle(cfg.source);
}

std::vector<RegretTrace> run_experiment(const ExperimentConfig& cfg,
                                        const RunnerOptions& opts) {
  cfg.validate();
  const InstanceBundle bundle = load_source(cfg);

  std::map<int, Instance> instances;
  for (int d : cfg.d_values) {
    if (instances.contains(d)) continue;
    Instance inst = make_instance(bundle, d);
    if (static_cast<int>(inst.users.size()) < cfg.users)
      throw InvalidInput(fmt::format("config: {} users requested but only {} available at d={}",
                                     cfg.users, inst.users.size(), d));
    for (int K : cfg.K_values)
      require(K <= inst.catalog.size(), "config: K exceeds catalog size");
    instances.emplace(d, std::move(inst));
  }

  std::vector<RunSpec> specs;
  for (auto policy : cfg.policies)
    for (double lambda : cfg.lambdas)
      for (int K : cfg.K_values)
        for (int d : cfg.d_values)
          for (int u = 0; u < cfg.users; ++u)
            for (int r = 0; r < cfg.repeats; ++r) {
              const int user_id = instances.at(d).users[u].id;
              RunSpec s;
              s.key = {policy, lambda, K, d, user_id, r, run_seed(cfg.master_seed, user_id, r)};
              s.n_steps = cfg.n_steps;
              s.log_stride = cfg.log_stride;
              s.gamma = cfg.gamma;
              s.lsb_full_range = cfg.lsb_full_range;
              specs.push_back(s);
            }

  std::optional<std::filesystem::path> run_dir;
  if (opts.out_dir) {
    run_dir = *opts.out_dir / "runs" / run_fingerprint(cfg);
    std::filesystem::create_directories(*run_dir);
  }

  std::vector<RegretTrace> traces(specs.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        const RunSpec& spec = specs[i];
        bool loaded = false;
        std::filesystem::path file;
        if (run_dir) {
          file = run_file(*run_dir, spec.key);
          std::ifstream in(file);
          if (in) {
            auto stored = read_traces_csv(in);
            if (stored.size() == 1) {
              traces[i] = std::move(stored.front());
              traces[i].key.seed = spec.key.seed;
              loaded = true;
            }
          }
        }
        if (!loaded) {
          const Instance& inst = instances.at(spec.key.d);
          const UserModel* user = nullptr;
          for (const auto& u : inst.users)
            if (u.id == spec.key.user) user = &u;
          traces[i] = run_single(inst, *user, spec);
          if (run_dir) {
            const auto tmp = file.string() + ".tmp";
            {
              std::ofstream os(tmp);
              write_traces_csv(os, {traces[i]});
            }
            std::filesystem::rename(tmp, file);
          }
        }
        std::lock_guard lock(mu);
        ++done;
        if (opts.progress) opts.progress(done, specs.size());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return traces;
}

void write_traces_csv(std::ostream& os, const std::vector<RegretTrace>& traces,
                      bool header) {
  if (header) os << kTraceHeader << '\n';
  for (const auto& t : traces) os << trace_rows(t);
}

std::vector<RegretTrace> read_traces_csv(std::istream& is) {
  std::vector<RegretTrace> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kTraceHeader) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw ParseError("traces csv: expected 10 columns", line_no);
    RunKey key;
    key.policy = parse_policy(f[0]);
    key.lambda = field<double>(f[1], line_no);
    key.K = field<int>(f[2], line_no);
    key.d = field<int>(f[3], line_no);
    key.user = field<int>(f[4], line_no);
    key.repeat = field<int>(f[5], line_no);
    const bool same = !out.empty() && out.back().key.policy == key.policy &&
                      out.back().key.lambda == key.lambda && out.back().key.K == key.K &&
                      out.back().key.d == key.d && out.back().key.user == key.user &&
                      out.back().key.repeat == key.repeat;
    if (!same) {
      out.emplace_back();
      out.back().key = key;
    }
    auto& t = out.back();
    t.steps.push_back(field<long>(f[6], line_no));
    t.cum_regret.push_back(field<double>(f[7], line_no));
    t.clicks.push_back(field<long>(f[8], line_no));
    t.clamps.push_back(field<long>(f[9], line_no));
  }
  return out;
}

std::vector<SummaryRow> aggregate(const std::vector<RegretTrace>& traces) {
  struct Cell {
    RunKey key;
    std::vector<const RegretTrace*> runs;
  };
  std::vector<Cell> cells;
  for (const auto& t : traces) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
      return c.key.policy == t.key.policy && c.key.lambda == t.key.lambda &&
             c.key.K == t.key.K && c.key.d == t.key.d;
    });
    if (it == cells.end()) {
      cells.push_back({t.key, {}});
      it = std::prev(cells.end());
    }
    it->runs.push_back(&t);
  }

  std::vector<SummaryRow> rows;
  for (const auto& cell : cells) {
    const auto& first = *cell.runs.front();
    for (const auto* r : cell.runs)
      require(r->steps == first.steps, "aggregate: runs in a cell disagree on logged steps");
    const int n = static_cast<int>(cell.runs.size());
    for (std::size_t i = 0; i < first.steps.size(); ++i) {
      double sum = 0;
      for (const auto* r : cell.runs) sum += r->cum_regret[i];
      const double mean = sum / n;
      std::optional<double> se;
      if (n >= 2) {
        double ss = 0;
        for (const auto* r : cell.runs) ss += (r->cum_regret[i] - mean) * (r->cum_regret[i] - mean);
        se = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
      }
      rows.push_back({cell.key.policy, cell.key.lambda, cell.key.K, cell.key.d,
                      first.steps[i], mean, se, n});
    }
  }
  return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    fmt::print(os, "{},{},{},{},{},{:.10g},{},{}\n", policy_name(r.policy), r.lambda, r.K,
               r.d, r.step, r.mean,
               r.std_error ? fmt::format("{:.10g}", *r.std_error) : std::string(), r.runs);
  }
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::vector<SummaryRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kSummaryHeader) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw ParseError("summary csv: expected 8 columns", line_no);
    SummaryRow r{};
    r.policy = parse_policy(f[0]);
    r.lambda = field<double>(f[1], line_no);
    r.K = field<int>(f[2], line_no);
    r.d = field<int>(f[3], line_no);
    r.step = field<long>(f[4], line_no);
    r.mean = field<double>(f[5], line_no);
    if (!f[6].empty()) r.std_error = field<double>(f[6], line_no);
    r.runs = field<int>(f[7], line_no);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace chb
