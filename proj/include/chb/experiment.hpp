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

#ifndef CHB_EXPERIMENT_HPP_
#define CHB_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chb/feature_map.hpp"
#include "chb/pipeline.hpp"

namespace chb {

struct ExperimentConfig {
  std::string source = "synthetic";  // "synthetic" or a bundle directory
  SynthOptions synth;
  std::vector<FeatureKind> policies{FeatureKind::kHybrid, FeatureKind::kLinearZ,
                                    FeatureKind::kLinearXZ, FeatureKind::kCoverageX,
                                    FeatureKind::kCoverageXZ};
  std::vector<double> lambdas{0.5};
  std::vector<int> K_values{10};
  std::vector<int> d_values{10};
  long n_steps = 20000;
  int users = 25;
  int repeats = 2;
  std::optional<double> gamma = 1.0;  // empty: theoretical schedule
  std::uint64_t master_seed = 1;
  int log_stride = 50;
  UnitRangeMode lsb_full_range = UnitRangeMode::kClamp;

  void validate() const;
};

/// Reads the flat `key = value` format documented in docs/config.md.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies a single key/value pair with the same grammar as the file.
void set_config_value(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);
/// Fully resolved config in file syntax; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& cfg);

struct RunKey {
  FeatureKind policy = FeatureKind::kHybrid;
  double lambda = 0.5;
  int K = 10;
  int d = 10;
  int user = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
};

struct RegretTrace {
  RunKey key;
  std::vector<long> steps;         // logged step indices (multiples of stride)
  std::vector<double> cum_regret;  // cumulative expected regret at each step
  std::vector<long> clicks;        // cumulative realized clicks
  std::vector<long> clamps;        // cumulative clamped attraction entries
  int guard_rebuilds = 0;
};

struct RunSpec {
  RunKey key;
  long n_steps = 1000;
  int log_stride = 50;
  std::optional<double> gamma = 1.0;
  UnitRangeMode lsb_full_range = UnitRangeMode::kClamp;
};

/// One seeded run of a policy against one simulated user, regret measured
/// against the greedy benchmark under the true attraction.
RegretTrace run_single(const Instance& instance, const UserModel& user,
                       const RunSpec& spec);

/// Per-run seed derived from the master seed, the user and the repeat.
std::uint64_t run_seed(std::uint64_t master_seed, int user_id, int repeat);

struct RunnerOptions {
  int jobs = 1;
  /// When set, every finished run is written to <out>/runs/ and existing
  /// run files from an identical config are reused instead of re-run.
  std::optional<std::filesystem::path> out_dir;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Runs the full (policy, lambda, K, d, user, repeat) matrix. Output order
/// is the nested loop order of those keys, independent of scheduling.
std::vector<RegretTrace> run_experiment(const ExperimentConfig& cfg,
                                        const RunnerOptions& opts = {});

InstanceBundle load_source(const ExperimentConfig& cfg);

inline constexpr const char* kTraceHeader =
    "policy,lambda,K,d,user,repeat,step,cum_regret,clicks,clamps";

void write_traces_csv(std::ostream& os, const std::vector<RegretTrace>& traces,
                      bool header = true);
std::vector<RegretTrace> read_traces_csv(std::istream& is);

struct SummaryRow {
  FeatureKind policy;
  double lambda;
  int K;
  int d;
  long step;
  double mean;
  std::optional<double> std_error;  // absent for single-run cells
  int runs;
};

/// Mean cumulative regret and its standard error (sample std / sqrt(runs))
/// per cell and logged step. Cells appear in first-seen order.
std::vector<SummaryRow> aggregate(const std::vector<RegretTrace>& traces);

inline constexpr const char* kSummaryHeader =
    "policy,lambda,K,d,step,mean_cum_regret,stderr,runs";

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& is);

/// One SVG per (lambda, K, d) cell with every policy's mean curve and a
/// +-1 stderr band, plus final-regret sweeps over lambda, d and K when the
/// summary holds more than one value of them. Returns the files written.
std::vector<std::filesystem::path> render_plots(const std::vector<SummaryRow>& rows,
                                                const std::filesystem::path& out_dir);

}  // namespace chb

#endif  // CHB_EXPERIMENT_HPP_
