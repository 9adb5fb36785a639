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

// Closed-form relationships between MC, PMC and DC guarantees, curves over
// parameter grids, and a randomized search for empirical violations.

#ifndef PMCAL_THEORY_HPP_
#define PMCAL_THEORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmcal/core.hpp"
#include "pmcal/error.hpp"
#include "pmcal/metrics.hpp"
#include "pmcal/random.hpp"

namespace pmcal {

// DC implied by alpha-MC when the smallest expected prediction is r_min.
// Undefined unless r_min > alpha >= 0.
inline std::optional<double> mc_to_dc_bound(double alpha, double r_min) {
  if (!(alpha >= 0.0) || !(r_min > alpha)) return std::nullopt;
  return std::log1p(2.0 * alpha / (r_min - alpha));
}

// DC implied by alpha-PMC; undefined for alpha >= 1.
inline std::optional<double> pmc_to_dc_bound(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) return std::nullopt;
  return std::log1p(alpha) - std::log1p(-alpha);
}

// MC implied by alpha-PMC; undefined for alpha >= 1.
inline std::optional<double> pmc_to_mc_bound(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) return std::nullopt;
  return alpha / (1.0 - alpha);
}

// MC implied by epsilon-DC together with delta-calibration.
inline double dc_to_mc_bound(double epsilon, double delta) {
  if (!(epsilon >= 0.0) || !(delta >= 0.0)) {
    throw ConfigError("epsilon and delta must be >= 0");
  }
  return -std::expm1(-epsilon) + delta;
}

// Continuous PMC implied by (alpha, lambda)-PMC on uniform bins.
inline std::optional<double> pmc_discretization_bound_uniform(double alpha,
                                                              double lambda,
                                                              double rho) {
  if (lambda == 0.0) return alpha;
  if (!(rho > 0.0)) return std::nullopt;
  return alpha + lambda / rho;
}

// Continuous PMC implied by (alpha, lambda)-PMC on (lambda, rho)-geometric
// bins: alpha rho^-lambda + rho^-lambda - 1.
inline std::optional<double> pmc_discretization_bound_geometric(double alpha,
                                                                double lambda,
                                                                double rho) {
  if (!(rho > 0.0)) return std::nullopt;
  // rho^-lambda - 1 via expm1 so that small lambda keeps full precision.
  const double t = -lambda * std::log(rho);
  return alpha * std::exp(t) + std::expm1(t);
}

// ---------------------------------------------------------------------------
// Curves

struct BoundCurve {
  std::string name;
  std::vector<double> grid;
  std::vector<double> values;  // NaN where undefined
  std::vector<bool> mask;
};

template <typename F>
BoundCurve make_curve(std::string name, std::vector<double> grid, F&& bound) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError("grid must be strictly increasing");
    }
  }
  BoundCurve c;
  c.name = std::move(name);
  c.grid = std::move(grid);
  for (double x : c.grid) {
    const std::optional<double> v = bound(x);
    const bool ok = v.has_value() && std::isfinite(*v);
    c.mask.push_back(ok);
    c.values.push_back(ok ? *v : std::numeric_limits<double>::quiet_NaN());
  }
  return c;
}

// lo:hi:step, inclusive of hi up to rounding.
inline std::vector<double> parse_grid(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos) {
    throw ConfigError("grid must look like lo:hi:step");
  }
  double lo, hi, step;
  try {
    lo = std::stod(std::string(text.substr(0, a)));
    hi = std::stod(std::string(text.substr(a + 1, b - a - 1)));
    step = std::stod(std::string(text.substr(b + 1)));
  } catch (const std::exception&) {
    throw ConfigError("grid must look like lo:hi:step");
  }
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("bad grid bounds");
  std::vector<double> grid;
  const auto count =
      static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 1000000) throw ConfigError("grid too large");
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(lo + static_cast<double>(i) * step);
  }
  return grid;
}

// Maximum admissible |R - p| at outcome rate p: the MC band is alpha, the
// PMC band is alpha * max(p, rho).
inline double mc_constraint_halfwidth(double alpha, double /*p*/) {
  return alpha;
}
inline double pmc_constraint_halfwidth(double alpha, double p, double rho) {
  return alpha * std::max(p, rho);
}

// ---------------------------------------------------------------------------
// Empirical verification

enum class BoundId { kMcToDc, kPmcToDc, kPmcToMc, kEfficiency };

inline std::string_view bound_name(BoundId id) {
  switch (id) {
    case BoundId::kMcToDc: return "mc_to_dc";
    case BoundId::kPmcToDc: return "pmc_to_dc";
    case BoundId::kPmcToMc: return "pmc_to_mc";
    case BoundId::kEfficiency: return "efficiency";
  }
  return "";
}

inline BoundId parse_bound_id(std::string_view name) {
  for (BoundId id : {BoundId::kMcToDc, BoundId::kPmcToDc, BoundId::kPmcToMc,
                     BoundId::kEfficiency}) {
    if (bound_name(id) == name) return id;
  }
  throw ConfigError("unknown bound '" + std::string(name) + "'");
}

struct AuditCase {
  AuditDataset data;
  std::vector<std::string> attributes;
  bool marginals = false;
  Discretization disc;
  LossParams params;
};

// Small random audit problem: N <= 500, up to 3 attributes with up to 3
// levels. With `bin_constant_scores` every row in a bin carries the same
// score, so groups sharing a bin share the prediction they are conditioned
// on; otherwise scores are uniform on [0, 1].
inline AuditCase random_audit_case(Rng& rng, bool bin_constant_scores) {
  static constexpr double kLambdas[] = {1.0, 0.5, 0.25, 0.2, 0.1};
  static constexpr double kAlphas[] = {0.01, 0.05, 0.1};
  static constexpr double kRhos[] = {0.01, 0.05, 0.1, 0.2};
  const std::size_t n = 20 + rng.below(481);
  const std::size_t k = 1 + rng.below(3);
  Discretization disc =
      make_discretization(BinKind::kUniform, kLambdas[rng.below(5)]);

  std::vector<double> level_of_bin;
  for (const auto& bin : disc.bins()) {
    const double hi = bin.closed_hi ? bin.hi : std::nextafter(bin.hi, 0.0);
    level_of_bin.push_back(rng.uniform(bin.lo, hi));
  }

  AuditDataset::Columns cols;
  std::vector<std::string> names;
  std::vector<std::size_t> n_levels;
  for (std::size_t a = 0; a < k; ++a) {
    names.push_back("a" + std::to_string(a));
    n_levels.push_back(1 + rng.below(3));
    auto& dict = cols.dictionaries.emplace_back();
    for (std::size_t l = 0; l < n_levels.back(); ++l) {
      dict.push_back("L" + std::to_string(l));
    }
    cols.codes.emplace_back();
  }
  // Per-cell calibration offset so groups differ.
  std::size_t cells = 1;
  for (auto m : n_levels) cells *= m;
  std::vector<double> offset(cells);
  for (auto& o : offset) o = rng.uniform(-0.15, 0.15);

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cell = 0;
    for (std::size_t a = 0; a < k; ++a) {
      const auto code = static_cast<std::uint32_t>(rng.below(n_levels[a]));
      cols.codes[a].push_back(code);
      cell = cell * n_levels[a] + code;
    }
    const double r = bin_constant_scores
                         ? level_of_bin[rng.below(level_of_bin.size())]
                         : rng.uniform();
    const double p = std::clamp(r + offset[cell], 0.0, 1.0);
    cols.scores.push_back(r);
    cols.outcomes.push_back(rng.bernoulli(p) ? 1 : 0);
  }

  LossParams params;
  params.alpha = kAlphas[rng.below(3)];
  params.lambda = disc.lambda();
  params.gamma = 0.0;
  params.rho = kRhos[rng.below(4)];
  const bool marginals = rng.bernoulli(0.5);
  return {AuditDataset::from_columns(names, std::move(cols)), names, marginals,
          std::move(disc), params};
}

struct BoundCheck {
  bool applicable = false;
  double lhs = 0.0;  // measured quantity
  double rhs = 0.0;  // bound it must not exceed
};

// Evaluates one bound on one audit case. Both sides are computed on the same
// categories: mass-qualified ones, further restricted to ybar >= rho for the
// PMC bounds and to ybar > 0 for the MC-to-DC bound.
inline BoundCheck check_bound(BoundId id, const AuditCase& c) {
  BoundCheck out;
  const auto& p = c.params;
  if (id == BoundId::kEfficiency) {
    const auto inter = enumerate_groups(c.data, c.attributes, false, 0.0);
    const auto marg = enumerate_groups(c.data, c.attributes, true, 0.0);
    const auto t_inter = category_stats(c.data, inter, c.disc);
    const auto t_marg = category_stats(c.data, marg, c.disc);
    const auto li = mc_loss_over(qualifying_categories(t_inter, 0.0, 1.0, 0.0));
    const auto lm = mc_loss_over(qualifying_categories(t_marg, 0.0, 1.0, 0.0));
    if (!li.defined() || !lm.defined()) return out;
    return {true, *lm.value, *li.value};
  }

  const auto groups = enumerate_groups(c.data, c.attributes, c.marginals, 0.0);
  const auto table = category_stats(c.data, groups, c.disc);
  const auto massed = qualifying_categories(table, p.alpha, p.lambda, p.gamma);
  if (id == BoundId::kMcToDc) {
    const auto cats = with_min_outcome(
        massed, std::nextafter(0.0, 1.0));  // ybar > 0
    const auto mc = mc_loss_over(cats);
    if (!mc.defined()) return out;
    double r_min = 1.0;
    for (const auto& cat : cats) r_min = std::min(r_min, cat.rbar);
    const auto bound = mc_to_dc_bound(*mc.value, r_min);
    if (!bound) return out;
    return {true, *dc_loss_over(cats).value, *bound};
  }

  const auto cats = with_min_outcome(massed, *p.rho);
  const auto pmc = pmc_loss_over(cats);
  if (!pmc.defined()) return out;
  if (id == BoundId::kPmcToMc) {
    const auto bound = pmc_to_mc_bound(*pmc.value);
    if (!bound) return out;
    return {true, *mc_loss_over(cats).value, *bound};
  }
  const auto bound = pmc_to_dc_bound(*pmc.value);
  if (!bound) return out;
  return {true, *dc_loss_over(cats).value, *bound};
}

struct ViolationReport {
  BoundId id = BoundId::kPmcToMc;
  std::size_t trials = 0;
  std::size_t checked = 0;  // trials where the bound was defined
  std::size_t violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();  // lhs - rhs
  std::vector<std::size_t> violating_trials;
};

inline constexpr double kBoundSlack = 1e-9;

// Hunts for cases where the measured side exceeds the bound by more than
// kBoundSlack. Trial t uses seed derive_seed(seed, t).
inline ViolationReport verify_bound(BoundId id, std::size_t trials,
                                    std::uint64_t seed) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  ViolationReport rep;
  rep.id = id;
  rep.trials = trials;
  // Scores are continuous for the efficiency check, which needs no shared
  // prediction; the other bounds condition on a common score per bin.
  const bool bin_constant = id != BoundId::kEfficiency;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    const AuditCase c = random_audit_case(rng, bin_constant);
    const BoundCheck chk = check_bound(id, c);
    if (!chk.applicable) continue;
    ++rep.checked;
    rep.max_excess = std::max(rep.max_excess, chk.lhs - chk.rhs);
    if (chk.lhs > chk.rhs + kBoundSlack) {
      ++rep.violations;
      rep.violating_trials.push_back(t);
    }
  }
  return rep;
}

}  // namespace pmcal

#endif  // PMCAL_THEORY_HPP_
