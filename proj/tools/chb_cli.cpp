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

// Command-line driver: builds instance bundles, runs seeded regret
// experiments and turns their traces into summary tables and SVG plots.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "chb/experiment.hpp"
#include "chb/pipeline.hpp"
#include "chb/validate.hpp"

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw chb::InvalidInput("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw chb::InvalidInput("cannot open " + path.string());
  return is;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascading hybrid bandits: instance pipeline and regret experiments"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Build an instance bundle from rating files");
  std::string ratings_path, topics_path, out_dir;
  chb::PipelineOptions popts;
  popts.n_users = 0;
  popts.n_items = 0;
  bool no_shift = false;
  prepare->add_option("--ratings", ratings_path, "user,item,rating records")->required();
  prepare->add_option("--topics", topics_path, "item,topic records")->required();
  prepare->add_option("--out", out_dir, "bundle directory")->required();
  prepare->add_option("--users", popts.n_users, "most active users to keep (0: all)");
  prepare->add_option("--items", popts.n_items, "most rated items to keep (0: all)");
  prepare->add_option("--rel-dim", popts.m, "relevance feature dimension");
  prepare->add_option("--split", popts.split_fraction, "training share of users");
  prepare->add_option("--threshold", popts.threshold, "rating counted as attractive");
  prepare->add_option("--drop-topic", popts.drop_topics, "topic label to discard");
  prepare->add_flag("--no-shift", no_shift,
                    "keep negative relevance products instead of shifting preferences");
  prepare->add_option("--seed", popts.seed, "split and SVD seed");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic instance bundle");
  chb::SynthOptions sopts;
  std::string synth_out;
  synth->add_option("--out", synth_out, "bundle directory")->required();
  synth->add_option("--items", sopts.n_items);
  synth->add_option("--topics", sopts.n_topics);
  synth->add_option("--rel-dim", sopts.m);
  synth->add_option("--users", sopts.n_users, "users before the train/test split");
  synth->add_option("--density", sopts.density, "target fraction of positive pairs");
  synth->add_option("--relevance-share", sopts.relevance_share);
  synth->add_option("--seed", sopts.seed);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment matrix and write traces.csv");
  std::string config_path, run_out = "out";
  std::optional<std::uint64_t> seed_override;
  std::vector<std::string> overrides;
  int jobs = 1;
  bool print_config = false;
  run->add_option("--config", config_path, "experiment config file");
  run->add_option("--seed", seed_override, "master seed (overrides the config)");
  run->add_option("--set", overrides, "extra key=value config entries");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--jobs", jobs, "worker threads");
  run->add_flag("--print-config", print_config, "print the resolved config and exit");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Mean regret and standard error per cell");
  std::string agg_in, agg_out;
  agg->add_option("--in", agg_in, "traces.csv")->required();
  agg->add_option("--out", agg_out, "summary.csv")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "Render SVG regret curves from a summary");
  std::string plot_in, plot_out;
  plot->add_option("--in", plot_in, "summary.csv")->required();
  plot->add_option("--out", plot_out, "directory for SVG files")->required();

  // validate
  auto* val = app.add_subcommand("validate", "Property checks on an instance bundle");
  std::string val_bundle;
  std::uint64_t val_seed = 1;
  val->add_option("--bundle", val_bundle, "bundle directory")->required();
  val->add_option("--seed", val_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      popts.shift_nonnegative = !no_shift;
      const auto bundle = chb::prepare_bundle(ratings_path, topics_path, popts);
      chb::write_bundle(bundle, out_dir);
      fmt::print("bundle: {} items, {} topics, {} users, m={} -> {}\n", bundle.num_items(),
                 bundle.num_topics(), bundle.num_users(), bundle.rel_dim(), out_dir);
    } else if (*synth) {
      const auto bundle = chb::synthesize_instance(sopts);
      chb::write_bundle(bundle, synth_out);
      fmt::print("bundle: {} items, {} topics, {} users, m={} -> {}\n", bundle.num_items(),
                 bundle.num_topics(), bundle.num_users(), bundle.rel_dim(), synth_out);
    } else if (*run) {
      chb::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = chb::load_config(config_path);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw chb::InvalidInput("--set expects key=value");
        chb::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (seed_override) cfg.master_seed = *seed_override;
      cfg.validate();
      if (print_config) {
        std::cout << chb::to_text(cfg);
        return 0;
      }
      std::filesystem::create_directories(run_out);
      open_out(std::filesystem::path(run_out) / "config.txt") << chb::to_text(cfg);
      chb::RunnerOptions ropts;
      ropts.jobs = jobs;
      ropts.out_dir = run_out;
      ropts.progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\rruns " << done << "/" << total << std::flush;
        if (done == total) std::cerr << '\n';
      };
      const auto traces = chb::run_experiment(cfg, ropts);
      auto os = open_out(std::filesystem::path(run_out) / "traces.csv");
      chb::write_traces_csv(os, traces);
      fmt::print("{} runs -> {}/traces.csv\n", traces.size(), run_out);
    } else if (*agg) {
      auto is = open_in(agg_in);
      const auto rows = chb::aggregate(chb::read_traces_csv(is));
      auto os = open_out(agg_out);
      chb::write_summary_csv(os, rows);
      fmt::print("{} summary rows -> {}\n", rows.size(), agg_out);
    } else if (*plot) {
      auto is = open_in(plot_in);
      const auto files = chb::render_plots(chb::read_summary_csv(is), plot_out);
      for (const auto& f : files) fmt::print("{}\n", f.string());
    } else if (*val) {
      const auto bundle = chb::read_bundle(val_bundle);
      bool ok = true;
      for (const auto& c : chb::validate_bundle(bundle, val_seed)) {
        fmt::print("[{}] {}{}{}\n", c.passed ? "PASS" : "FAIL", c.name,
                   c.detail.empty() ? "" : ": ", c.detail);
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
