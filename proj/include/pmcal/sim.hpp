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

// Populations scored by an alpha-multicalibrated model: group i has outcome
// rate p*_i = 0.2 + 0.01 (i - 1) and every member receives the score
// R_i = p*_i - Delta_i, with |Delta_i| <= alpha set by the scenario and the
// sign of each Delta_i drawn from a fair coin.

#ifndef PMCAL_SIM_HPP_
#define PMCAL_SIM_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pmcal/core.hpp"
#include "pmcal/error.hpp"
#include "pmcal/random.hpp"

namespace pmcal {

enum class Scenario { kRandom, kFixed, kIncreasing, kDecreasing };

inline std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kRandom: return "random";
    case Scenario::kFixed: return "fixed";
    case Scenario::kIncreasing: return "increasing";
    case Scenario::kDecreasing: return "decreasing";
  }
  return "";
}

inline Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::kRandom, Scenario::kFixed, Scenario::kIncreasing,
                     Scenario::kDecreasing}) {
    if (scenario_name(s) == name) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

struct SimConfig {
  Scenario scenario = Scenario::kRandom;
  std::size_t n_groups = 61;
  double alpha = 0.1;
  std::size_t n_per_group = 1000;
  std::size_t n_sims = 100;
  std::uint64_t seed = 1;
};

inline constexpr std::string_view kSimAttribute = "group";

// Outcome rate of group index i (0-based).
inline double sim_p_star(std::size_t i) {
  return 0.2 + 0.01 * static_cast<double>(i);
}

inline void validate(const SimConfig& cfg) {
  if (cfg.n_groups < 1) throw ConfigError("n_groups must be >= 1");
  if (cfg.n_per_group < 1) throw ConfigError("n_per_group must be >= 1");
  if (!(cfg.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  const double top = sim_p_star(cfg.n_groups - 1);
  if (top > 1.0 + 1e-12) {
    throw ConfigError("n_groups pushes p* above 1 (at most 81 groups)");
  }
  if (sim_p_star(0) - cfg.alpha < 0.0 || top + cfg.alpha > 1.0 + 1e-12) {
    throw ConfigError("alpha pushes a score outside [0, 1]");
  }
}

struct SimPopulation {
  AuditDataset data;
  std::vector<double> p_star;  // per group
  std::vector<double> delta;   // per group, signed
  std::vector<double> risk;    // per group, p_star - delta
};

// |Delta_i| before signs. Increasing/decreasing ramps are proportional to
// p*_i (resp. its mirror), reaching alpha at the top (resp. bottom) group.
inline std::vector<double> sim_error_magnitudes(const SimConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.n_groups;
  const double top = sim_p_star(n - 1);
  std::vector<double> mag(n, cfg.alpha);
  switch (cfg.scenario) {
    case Scenario::kFixed:
      break;
    case Scenario::kRandom: {
      const std::size_t pick = rng.below(n);
      for (std::size_t i = 0; i < n; ++i) {
        mag[i] = i == pick ? cfg.alpha : rng.uniform(0.0, cfg.alpha);
      }
      break;
    }
    case Scenario::kIncreasing:
      for (std::size_t i = 0; i < n; ++i) mag[i] = cfg.alpha * sim_p_star(i) / top;
      break;
    case Scenario::kDecreasing:
      for (std::size_t i = 0; i < n; ++i) {
        mag[i] = cfg.alpha * sim_p_star(n - 1 - i) / top;
      }
      break;
  }
  return mag;
}

inline std::string sim_group_level(std::size_t i, std::size_t n_groups) {
  const std::size_t width = std::to_string(n_groups).size();
  std::string num = std::to_string(i + 1);
  return "g" + std::string(width - num.size(), '0') + num;
}

inline SimPopulation simulate_population(const SimConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::size_t n = cfg.n_groups;
  const std::vector<double> mag = sim_error_magnitudes(cfg, rng);
  std::vector<double> p_star, delta, risk;
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    p_star.push_back(sim_p_star(i));
    delta.push_back(sign * mag[i]);
    risk.push_back(p_star[i] - delta[i]);
  }
  AuditDataset::Columns cols;
  const std::size_t rows = n * cfg.n_per_group;
  cols.outcomes.reserve(rows);
  cols.scores.reserve(rows);
  cols.p_star.emplace().reserve(rows);
  auto& dict = cols.dictionaries.emplace_back();
  auto& codes = cols.codes.emplace_back();
  codes.reserve(rows);
  for (std::size_t i = 0; i < n; ++i) {
    dict.push_back(sim_group_level(i, n));
    for (std::size_t j = 0; j < cfg.n_per_group; ++j) {
      cols.outcomes.push_back(rng.bernoulli(p_star[i]) ? 1 : 0);
      cols.scores.push_back(risk[i]);
      cols.p_star->push_back(p_star[i]);
      codes.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return {AuditDataset::from_columns({std::string(kSimAttribute)},
                                     std::move(cols)),
          std::move(p_star), std::move(delta), std::move(risk)};
}

inline AuditDataset simulate(const SimConfig& cfg) {
  return simulate_population(cfg).data;
}

struct ScenarioRow {
  std::size_t group = 0;  // 1-based
  double p_star = 0.0;
  double mean_ratio = 0.0;      // mean over replicates of |sum y - sum R| / sum y
  double expected_ratio = 0.0;  // E|Delta_i| / p*_i
  std::size_t replicates = 0;   // replicates where the ratio was defined
};

struct ScenarioTable {
  Scenario scenario = Scenario::kRandom;
  std::vector<ScenarioRow> rows;
};

// Monte Carlo per-group PMC ratio over cfg.n_sims replicates; replicate k
// is simulated with seed derive_seed(cfg.seed, k).
inline ScenarioTable run_scenarios(const SimConfig& cfg) {
  validate(cfg);
  if (cfg.n_sims < 1) throw ConfigError("n_sims must be >= 1");
  ScenarioTable table;
  table.scenario = cfg.scenario;
  const std::size_t n = cfg.n_groups;
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  const Discretization one_bin = make_discretization(BinKind::kUniform, 1.0);
  for (std::size_t k = 0; k < cfg.n_sims; ++k) {
    SimConfig rep = cfg;
    rep.seed = derive_seed(cfg.seed, k);
    const AuditDataset data = simulate(rep);
    const GroupCollection groups =
        enumerate_groups(data, {std::string(kSimAttribute)}, false, 0.0);
    const CategoryTable cats = category_stats(data, groups, one_bin);
    for (const auto& c : cats.entries) {
      if (!(c.sum_y > 0.0)) continue;
      sum[c.group_id] += std::abs(c.sum_y - c.sum_r) / c.sum_y;
      ++count[c.group_id];
    }
  }
  const double top = sim_p_star(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    ScenarioRow row;
    row.group = i + 1;
    row.p_star = sim_p_star(i);
    row.replicates = count[i];
    row.mean_ratio = count[i] ? sum[i] / static_cast<double>(count[i]) : 0.0;
    double expected_mag = cfg.alpha;
    switch (cfg.scenario) {
      case Scenario::kFixed: break;
      case Scenario::kRandom:
        expected_mag = cfg.alpha * (1.0 + 0.5 * static_cast<double>(n - 1)) /
                       static_cast<double>(n);
        break;
      case Scenario::kIncreasing:
        expected_mag = cfg.alpha * sim_p_star(i) / top;
        break;
      case Scenario::kDecreasing:
        expected_mag = cfg.alpha * sim_p_star(n - 1 - i) / top;
        break;
    }
    row.expected_ratio = expected_mag / row.p_star;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace pmcal

#endif  // PMCAL_SIM_HPP_
