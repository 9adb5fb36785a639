// Copyright 2026 The pmcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Plot data (x, series, value) for bound curves and simulation tables.

#ifndef PMCAL_PLOTS_HPP_
#define PMCAL_PLOTS_HPP_

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "pmcal/csv.hpp"
#include "pmcal/error.hpp"
#include "pmcal/sim.hpp"
#include "pmcal/theory.hpp"

namespace pmcal {

struct CurveRequest {
  // mc_to_dc, pmc_to_dc, pmc_to_mc, dc_to_mc, pmc_disc_uniform,
  // pmc_disc_geometric or constraints.
  std::string curve;
  std::vector<double> grid;
  std::vector<double> r_min = {0.01, 0.1, 0.3, 0.5, 1.0};
  std::vector<double> delta = {0.0, 0.1, 0.25, 0.5};
  std::vector<double> rho = {0.01, 0.1};
  double alpha = 0.1;
};

inline std::vector<double> default_grid(const std::string& curve) {
  if (curve == "constraints") return parse_grid("0:1:0.01");
  if (curve == "pmc_disc_uniform" || curve == "pmc_disc_geometric") {
    return parse_grid("0:0.5:0.01");
  }
  if (curve == "dc_to_mc") return parse_grid("0:2:0.02");
  return parse_grid("0:0.5:0.01");
}

// x is alpha for the MC/PMC bounds, epsilon for dc_to_mc, lambda for the
// discretization bounds (alpha fixed) and the outcome rate p for constraints.
inline std::vector<PlotPoint> bound_plot(const CurveRequest& req) {
  const std::vector<double> grid =
      req.grid.empty() ? default_grid(req.curve) : req.grid;
  std::vector<PlotPoint> pts;
  auto fmt = [](double v) { return detail::format_double(v); };
  const std::string& c = req.curve;
  if (c == "mc_to_dc") {
    for (double r : req.r_min) {
      append_curve(pts,
                   make_curve(c, grid, [r](double a) { return mc_to_dc_bound(a, r); }),
                   "r_min=" + fmt(r));
    }
  } else if (c == "pmc_to_dc") {
    append_curve(pts, make_curve(c, grid, pmc_to_dc_bound), c);
  } else if (c == "pmc_to_mc") {
    append_curve(pts, make_curve(c, grid, pmc_to_mc_bound), c);
  } else if (c == "dc_to_mc") {
    for (double d : req.delta) {
      append_curve(pts,
                   make_curve(c, grid,
                              [d](double e) -> std::optional<double> {
                                return dc_to_mc_bound(e, d);
                              }),
                   "delta=" + fmt(d));
    }
  } else if (c == "pmc_disc_uniform" || c == "pmc_disc_geometric") {
    const bool geo = c == "pmc_disc_geometric";
    for (double r : req.rho) {
      const double a = req.alpha;
      append_curve(pts,
                   make_curve(c, grid,
                              [=](double l) {
                                return geo ? pmc_discretization_bound_geometric(a, l, r)
                                           : pmc_discretization_bound_uniform(a, l, r);
                              }),
                   "rho=" + fmt(r));
    }
  } else if (c == "constraints") {
    const double rho = req.rho.empty() ? 0.0 : req.rho.front();
    for (double p : grid) {
      const double mc = mc_constraint_halfwidth(req.alpha, p);
      const double pmc = pmc_constraint_halfwidth(req.alpha, p, rho);
      pts.push_back({p, "mc_upper", std::min(1.0, p + mc)});
      pts.push_back({p, "mc_lower", std::max(0.0, p - mc)});
      pts.push_back({p, "pmc_upper", std::min(1.0, p + pmc)});
      pts.push_back({p, "pmc_lower", std::max(0.0, p - pmc)});
    }
  } else {
    throw ConfigError("unknown curve '" + c + "'");
  }
  return pts;
}

// x = p*_i; series mean_ratio and expected_ratio.
inline std::vector<PlotPoint> scenario_plot(const ScenarioTable& t) {
  std::vector<PlotPoint> pts;
  const std::string s(scenario_name(t.scenario));
  for (const auto& row : t.rows) {
    pts.push_back({row.p_star, s + ":mean_ratio", row.mean_ratio});
  }
  for (const auto& row : t.rows) {
    pts.push_back({row.p_star, s + ":expected_ratio", row.expected_ratio});
  }
  return pts;
}

}  // namespace pmcal

#endif  // PMCAL_PLOTS_HPP_
