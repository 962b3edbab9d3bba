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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include <fmt/core.h>

#include "chb/experiment.hpp"
#include "chb/log.hpp"

namespace chb {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 72, kRight = 150, kTop = 40, kBottom = 52;

std::string_view color(FeatureKind k) {
  switch (k) {
    case FeatureKind::kHybrid: return "#d62728";
    case FeatureKind::kLinearZ: return "#1f77b4";
    case FeatureKind::kLinearXZ: return "#17becf";
    case FeatureKind::kCoverageX: return "#2ca02c";
    case FeatureKind::kCoverageXZ: return "#9467bd";
  }
  return "#000000";
}

double nice_step(double range) {
  if (range <= 0) return 1;
  const double raw = range / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0})
    if (f * mag >= raw) return f * mag;
  return 10 * mag;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

std::string axes(const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                   (kLeft + kWidth - kRight) / 2, title);
  const double xs = nice_step(f.x1 - f.x0), ys = nice_step(f.y1 - f.y0);
  for (double x = std::ceil(f.x0 / xs) * xs; x <= f.x1 + 1e-9 * xs; x += xs) {
    s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" "
                     "stroke=\"#dddddd\"/>\n", f.px(x), f.py(f.y0), f.py(f.y1));
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n",
                     f.px(x), kHeight - kBottom + 16, x);
  }
  for (double y = std::ceil(f.y0 / ys) * ys; y <= f.y1 + 1e-9 * ys; y += ys) {
    s += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" "
                     "stroke=\"#dddddd\"/>\n", f.px(f.x0), f.py(y), f.px(f.x1));
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:g}</text>\n",
                     kLeft - 6, f.py(y) + 4, y);
  }
  s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                   "fill=\"none\" stroke=\"black\"/>\n",
                   kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                   (kLeft + kWidth - kRight) / 2, kHeight - 12, xlabel);
  s += fmt::format("<text transform=\"translate(18,{:.1f}) rotate(-90)\" "
                   "text-anchor=\"middle\">{}</text>\n", (kTop + kHeight - kBottom) / 2, ylabel);
  return s;
}

std::string legend(const std::vector<FeatureKind>& kinds) {
  std::string s;
  double y = kTop + 10;
  for (auto k : kinds) {
    const double x = kWidth - kRight + 12;
    s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" "
                     "stroke=\"{}\" stroke-width=\"2\"/>\n", x, y, x + 22, y, color(k));
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", x + 28, y + 4,
                     policy_name(k));
    y += 20;
  }
  return s;
}

void save(const std::filesystem::path& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path.string());
  os << body << "</svg>\n";
}

using CellKey = std::tuple<double, int, int>;  // lambda, K, d

std::vector<FeatureKind> policies_in(const std::vector<const SummaryRow*>& rows) {
  std::vector<FeatureKind> out;
  for (const auto* r : rows)
    if (std::find(out.begin(), out.end(), r->policy) == out.end()) out.push_back(r->policy);
  return out;
}

// Final-step mean and stderr of one (policy, lambda, K, d) cell.
struct Final {
  double mean = 0, se = 0;
};

}  // namespace

std::vector<std::filesystem::path> render_plots(const std::vector<SummaryRow>& rows,
                                                const std::filesystem::path& out_dir) {
  require(!rows.empty(), "render_plots: empty summary");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  std::map<CellKey, std::vector<const SummaryRow*>> cells;
  for (const auto& r : rows) cells[{r.lambda, r.K, r.d}].push_back(&r);

  std::map<std::tuple<FeatureKind, double, int, int>, Final> finals;
  for (const auto& [key, cell] : cells) {
    const auto kinds = policies_in(cell);
    double xmax = 0, ymax = 0;
    for (const auto* r : cell) {
      xmax = std::max(xmax, static_cast<double>(r->step));
      ymax = std::max(ymax, r->mean + r->std_error.value_or(0));
    }
    if (xmax <= 0) {
      warn("render_plots: empty cell skipped");
      continue;
    }
    const Frame f{0, xmax, 0, ymax > 0 ? ymax * 1.05 : 1};
    const auto [lambda, K, d] = key;
    std::string svg = axes(f, fmt::format("lambda={:g}, K={}, d={}", lambda, K, d), "step n",
                           "cumulative regret");
    for (auto k : kinds) {
      std::vector<const SummaryRow*> pts;
      for (const auto* r : cell)
        if (r->policy == k) pts.push_back(r);
      std::sort(pts.begin(), pts.end(),
                [](const SummaryRow* a, const SummaryRow* b) { return a->step < b->step; });
      std::string upper, lower, line;
      for (const auto* p : pts) {
        const double se = p->std_error.value_or(0);
        upper += fmt::format("{:.1f},{:.1f} ", f.px(p->step), f.py(p->mean + se));
        line += fmt::format("{:.1f},{:.1f} ", f.px(p->step), f.py(p->mean));
      }
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        const double se = (*it)->std_error.value_or(0);
        lower += fmt::format("{:.1f},{:.1f} ", f.px((*it)->step), f.py((*it)->mean - se));
      }
      svg += fmt::format("<polygon points=\"{}{}\" fill=\"{}\" fill-opacity=\"0.2\" "
                         "stroke=\"none\" class=\"band\"/>\n", upper, lower, color(k));
      svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" "
                         "stroke-width=\"1.5\" class=\"curve\"/>\n", line, color(k));
      if (!pts.empty())
        finals[{k, lambda, K, d}] = {pts.back()->mean, pts.back()->std_error.value_or(0)};
    }
    svg += legend(kinds);
    const auto path = out_dir / fmt::format("regret_lambda{:g}_K{}_d{}.svg", lambda, K, d);
    save(path, svg);
    written.push_back(path);
  }

  // Final-regret sweeps over one parameter with the other two fixed.
  std::set<double> lambdas;
  std::set<int> Ks, ds;
  std::vector<FeatureKind> kinds;
  for (const auto& r : rows) {
    lambdas.insert(r.lambda);
    Ks.insert(r.K);
    ds.insert(r.d);
    if (std::find(kinds.begin(), kinds.end(), r.policy) == kinds.end()) kinds.push_back(r.policy);
  }
  auto sweep = [&](const std::string& name, const std::string& xlabel,
                   const std::vector<double>& xs, auto&& key_of,
                   const std::string& fixed_label) {
    double ymax = 0;
    for (auto k : kinds)
      for (double x : xs)
        if (auto it = finals.find(key_of(k, x)); it != finals.end())
          ymax = std::max(ymax, it->second.mean + it->second.se);
    const double pad = (xs.back() - xs.front()) * 0.05;
    const Frame f{xs.front() - pad, xs.back() + pad, 0, ymax > 0 ? ymax * 1.05 : 1};
    std::string svg = axes(f, "final regret, " + fixed_label, xlabel, "n-step regret");
    for (auto k : kinds) {
      std::string line;
      for (double x : xs) {
        const auto it = finals.find(key_of(k, x));
        if (it == finals.end()) continue;
        const auto [mean, se] = it->second;
        line += fmt::format("{:.1f},{:.1f} ", f.px(x), f.py(mean));
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" "
                           "stroke=\"{3}\" class=\"errorbar\"/>\n",
                           f.px(x), f.py(mean - se), f.py(mean + se), color(k));
        svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n",
                           f.px(x), f.py(mean), color(k));
      }
      svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" "
                         "stroke-width=\"1.5\" class=\"curve\"/>\n", line, color(k));
    }
    svg += legend(kinds);
    const auto path = out_dir / name;
    save(path, svg);
    written.push_back(path);
  };

  if (lambdas.size() > 1)
    for (int K : Ks)
      for (int d : ds)
        sweep(fmt::format("final_vs_lambda_K{}_d{}.svg", K, d), "lambda",
              {lambdas.begin(), lambdas.end()},
              [&](FeatureKind k, double x) { return std::make_tuple(k, x, K, d); },
              fmt::format("K={}, d={}", K, d));
  if (ds.size() > 1)
    for (double l : lambdas)
      for (int K : Ks)
        sweep(fmt::format("final_vs_d_lambda{:g}_K{}.svg", l, K), "topics d",
              {ds.begin(), ds.end()},
              [&](FeatureKind k, double x) {
                return std::make_tuple(k, l, K, static_cast<int>(x));
              },
              fmt::format("lambda={:g}, K={}", l, K));
  if (Ks.size() > 1)
    for (double l : lambdas)
      for (int d : ds)
        sweep(fmt::format("final_vs_K_lambda{:g}_d{}.svg", l, d), "positions K",
              {Ks.begin(), Ks.end()},
              [&](FeatureKind k, double x) {
                return std::make_tuple(k, l, static_cast<int>(x), d);
              },
              fmt::format("lambda={:g}, d={}", l, d));
  return written;
}

}  // namespace chb
