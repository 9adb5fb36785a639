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

// End-to-end audit and post-processing runs as exposed by the command line.

#ifndef PMCAL_PIPELINE_HPP_
#define PMCAL_PIPELINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pmcal/boost.hpp"
#include "pmcal/core.hpp"
#include "pmcal/error.hpp"
#include "pmcal/metrics.hpp"
#include "pmcal/random.hpp"
#include "pmcal/version.hpp"

namespace pmcal {

struct AuditParams {
  std::vector<std::string> group_attributes;
  bool marginals = false;
  double alpha = 0.1;
  double lambda = 0.1;
  double gamma = 0.05;
  double rho = 0.01;
  // Group admission threshold P(S) >= min_group_mass; defaults to gamma.
  std::optional<double> min_group_mass;
  BinKind bins = BinKind::kUniform;
  bool exact = false;
  std::uint64_t seed = 0;

  double group_mass() const { return min_group_mass.value_or(gamma); }
};

struct GroupSummary {
  std::size_t group_id = 0;
  std::string label;
  std::size_t n = 0;
  double prevalence = 0.0;
};

struct LossEntry {
  std::optional<double> value;
  std::string reason;  // why value is null
  std::optional<Category> witness;
  std::optional<Category> witness_other;
  std::size_t considered = 0;

  static LossEntry from(const LossResult& r) {
    return {r.value, r.reason, r.witness, r.witness_other,
            r.n_categories_considered};
  }
};

struct AuditReport {
  std::string schema_version = kReportSchemaVersion;
  std::string tool_version = kVersion;
  AuditParams config;
  std::size_t n = 0;
  double prevalence = 0.0;
  std::vector<GroupSummary> groups;
  LossEntry mc;
  LossEntry pmc;
  LossEntry dc;
  std::optional<double> auroc;
  std::vector<Category> categories;
};

inline Discretization discretization_for(const AuditParams& p) {
  return make_discretization(p.bins, p.lambda,
                             p.bins == BinKind::kGeometric
                                 ? std::optional<double>(p.rho)
                                 : std::nullopt);
}

inline void validate(const AuditParams& p) {
  if (p.group_attributes.empty()) throw ConfigError("no group attributes");
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(p.rho >= 0.0 && p.rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  if (!(p.group_mass() >= 0.0 && p.group_mass() <= 1.0)) {
    throw ConfigError("min group mass must lie in [0, 1]");
  }
}

// Audits `data` against `groups` (already enumerated, possibly on another
// sample).
inline AuditReport audit_with_groups(const AuditDataset& data,
                                     const GroupCollection& groups,
                                     const AuditParams& params) {
  validate(params);
  const Discretization disc = discretization_for(params);
  AuditReport rep;
  rep.config = params;
  rep.n = data.size();
  rep.prevalence = data.prevalence();
  rep.auroc = auroc(data);

  const Membership members = group_members(groups, data);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double pos = 0.0;
    for (auto i : members[g]) pos += data.outcome(i);
    const std::size_t n = members[g].size();
    rep.groups.push_back({g, groups.groups[g].label, n,
                          n ? pos / static_cast<double>(n) : 0.0});
  }
  const CategoryTable table = category_stats(data, data.scores(), members,
                                             disc, params.exact);
  const LossParams lp{params.alpha, disc.lambda(), params.group_mass(),
                      params.rho};
  rep.mc = LossEntry::from(mc_loss(table, lp));
  rep.pmc = LossEntry::from(pmc_loss(table, lp));
  rep.dc = LossEntry::from(dc_loss(table, lp));
  rep.categories = table.entries;
  return rep;
}

inline AuditReport run_audit(const AuditDataset& data,
                             const AuditParams& params) {
  validate(params);
  GroupCollection groups;
  try {
    groups = enumerate_groups(data, params.group_attributes, params.marginals,
                              params.group_mass());
  } catch (const EmptyCollectionError& e) {
    AuditReport rep;
    rep.config = params;
    rep.n = data.size();
    rep.prevalence = data.prevalence();
    rep.auroc = auroc(data);
    const std::string reason = std::string("empty group collection: ") + e.what();
    rep.mc.reason = rep.pmc.reason = rep.dc.reason = reason;
    return rep;
  }
  return audit_with_groups(data, groups, params);
}

struct PostprocessParams {
  AuditParams audit;
  BoostMode mode = BoostMode::kPmc;
  std::size_t max_passes = 200;
  double sample_fraction = 1.0;
  // Fraction of rows used to fit; the rest are held out for both reports.
  std::optional<double> split;
};

struct PostprocessResult {
  AuditDataset updated;  // every row, with post-processed scores
  UpdateTrace trace;
  AuditReport before;
  AuditReport after;
  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> eval_rows;
};

// Seeded shuffle into (first fraction, rest), each fold in ascending order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_rows(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(derive_seed(seed, 0x5eed));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  const auto cut = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  if (cut == 0 || cut == n) throw ConfigError("split leaves an empty fold");
  std::vector<std::size_t> fit(idx.begin(), idx.begin() + cut);
  std::vector<std::size_t> eval(idx.begin() + cut, idx.end());
  std::sort(fit.begin(), fit.end());
  std::sort(eval.begin(), eval.end());
  return {std::move(fit), std::move(eval)};
}

inline BoostConfig boost_config_for(const PostprocessParams& p) {
  BoostConfig cfg;
  cfg.mode = p.mode;
  cfg.alpha = p.audit.alpha;
  cfg.lambda = p.audit.lambda;
  cfg.gamma = p.audit.gamma;
  cfg.rho = p.audit.rho;
  cfg.max_passes = p.max_passes;
  cfg.sample_fraction = p.sample_fraction;
  cfg.seed = p.audit.seed;
  cfg.exact = p.audit.exact;
  return cfg;
}

// Fits on the fit fold (all rows without a split), then audits the
// evaluation fold (held-out rows, or all rows) before and after.
inline PostprocessResult run_postprocess(const AuditDataset& data,
                                         const PostprocessParams& params) {
  validate(params.audit);
  std::vector<std::size_t> fit_rows, eval_rows;
  if (params.split) {
    std::tie(fit_rows, eval_rows) =
        split_rows(data.size(), *params.split, params.audit.seed);
  } else {
    fit_rows.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) fit_rows[i] = i;
    eval_rows = fit_rows;
  }
  const AuditDataset fit = data.subset(fit_rows);
  const AuditDataset eval = data.subset(eval_rows);
  const GroupCollection groups =
      enumerate_groups(fit, params.audit.group_attributes,
                       params.audit.marginals, params.audit.group_mass());
  const Discretization disc = discretization_for(params.audit);
  BoostResult fitted = boost(fit, groups, disc, boost_config_for(params));

  AuditDataset updated =
      data.with_scores(apply_updates(fitted.trace, data, groups, disc));
  const AuditDataset eval_after = updated.subset(eval_rows);
  AuditReport before = run_audit(eval, params.audit);
  AuditReport after = run_audit(eval_after, params.audit);
  return {std::move(updated), std::move(fitted.trace), std::move(before),
          std::move(after), std::move(fit_rows), std::move(eval_rows)};
}

}  // namespace pmcal

#endif  // PMCAL_PIPELINE_HPP_
