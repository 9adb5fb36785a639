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

// Empirical calibration losses over (group, bin) categories, plus AUROC and
// calibration curves.
//
// Every loss is a maximum over a set of qualifying categories. The `*_over`
// functions take that set explicitly, which lets callers compare two losses
// on exactly the same categories; the dataset-level wrappers apply the
// standard filters (|S| >= gamma N, |S_I| >= alpha lambda N, and for PMC
// ybar >= rho). When nothing qualifies the result is undefined, never zero.

#ifndef PMCAL_METRICS_HPP_
#define PMCAL_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmcal/core.hpp"

namespace pmcal {

struct LossParams {
  double alpha = 0.0;
  double lambda = 1.0;
  double gamma = 0.0;
  std::optional<double> rho;
};

struct LossResult {
  std::optional<double> value;
  std::optional<Category> witness;
  // Second member of the witnessing pair (DC loss only).
  std::optional<Category> witness_other;
  std::size_t n_categories_considered = 0;
  LossParams params;
  std::string reason;  // set when undefined

  bool defined() const { return value.has_value(); }
};

// Categories of groups with |S| >= gamma N whose own count is >= alpha lambda N.
inline std::vector<Category> qualifying_categories(const CategoryTable& table,
                                                   double alpha, double lambda,
                                                   double gamma) {
  const double n_total = static_cast<double>(table.n_rows);
  std::vector<Category> out;
  for (const auto& c : table.entries) {
    if (static_cast<double>(table.group_sizes[c.group_id]) < gamma * n_total) {
      continue;
    }
    if (static_cast<double>(c.n) < alpha * lambda * n_total) continue;
    out.push_back(c);
  }
  return out;
}

inline std::vector<Category> with_min_outcome(std::span<const Category> cats,
                                              double rho) {
  std::vector<Category> out;
  for (const auto& c : cats) {
    if (c.ybar >= rho) out.push_back(c);
  }
  return out;
}

namespace detail {

inline LossResult undefined_loss(std::string reason, std::size_t considered) {
  LossResult r;
  r.reason = std::move(reason);
  r.n_categories_considered = considered;
  return r;
}

}  // namespace detail

// max |ybar - rbar|. Ties keep the first category in (group, bin) order.
inline LossResult mc_loss_over(std::span<const Category> cats) {
  if (cats.empty()) return detail::undefined_loss("no qualifying category", 0);
  LossResult r;
  r.n_categories_considered = cats.size();
  for (const auto& c : cats) {
    const double err = std::abs(c.sum_y - c.sum_r) / static_cast<double>(c.n);
    if (!r.value || err > *r.value) {
      r.value = err;
      r.witness = c;
    }
  }
  return r;
}

// max |sum y - sum r| / sum y over categories with a positive outcome sum.
inline LossResult pmc_loss_over(std::span<const Category> cats) {
  LossResult r;
  for (const auto& c : cats) {
    if (!(c.sum_y > 0.0)) continue;
    ++r.n_categories_considered;
    const double err = std::abs(c.sum_y - c.sum_r) / c.sum_y;
    if (!r.value || err > *r.value) {
      r.value = err;
      r.witness = c;
    }
  }
  if (!r.value) {
    return detail::undefined_loss("no qualifying category with ybar > 0",
                                  r.n_categories_considered);
  }
  return r;
}

// max |ln(ybar_a / ybar_b)| over pairs sharing a bin, both with ybar > 0.
// Pairs range over C x C, so a lone category contributes ln 1 = 0.
inline LossResult dc_loss_over(std::span<const Category> cats) {
  std::vector<const Category*> usable;
  for (const auto& c : cats) {
    if (c.ybar > 0.0) usable.push_back(&c);
  }
  if (usable.empty()) {
    return detail::undefined_loss("no qualifying category with ybar > 0", 0);
  }
  LossResult r;
  r.n_categories_considered = usable.size();
  r.value = 0.0;
  r.witness = *usable.front();
  r.witness_other = *usable.front();
  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      if (usable[a]->bin_index != usable[b]->bin_index) continue;
      const double v = std::abs(std::log(usable[a]->ybar / usable[b]->ybar));
      if (v > *r.value) {
        r.value = v;
        r.witness = *usable[a];
        r.witness_other = *usable[b];
      }
    }
  }
  return r;
}

inline LossResult mc_loss(const CategoryTable& table, const LossParams& p) {
  auto cats = qualifying_categories(table, p.alpha, p.lambda, p.gamma);
  LossResult r = mc_loss_over(cats);
  r.params = p;
  return r;
}

inline LossResult pmc_loss(const CategoryTable& table, const LossParams& p) {
  if (!p.rho) throw ConfigError("pmc loss requires rho");
  auto cats = with_min_outcome(
      qualifying_categories(table, p.alpha, p.lambda, p.gamma), *p.rho);
  LossResult r = pmc_loss_over(cats);
  r.params = p;
  return r;
}

inline LossResult dc_loss(const CategoryTable& table, const LossParams& p) {
  auto cats = qualifying_categories(table, p.alpha, p.lambda, p.gamma);
  LossResult r = dc_loss_over(cats);
  r.params = p;
  return r;
}

inline LossResult mc_loss(const AuditDataset& data,
                          const GroupCollection& groups,
                          const Discretization& disc, double alpha,
                          double gamma, bool exact = false) {
  return mc_loss(category_stats(data, groups, disc, exact),
                 {alpha, disc.lambda(), gamma, std::nullopt});
}

inline LossResult pmc_loss(const AuditDataset& data,
                           const GroupCollection& groups,
                           const Discretization& disc, double alpha,
                           double gamma, double rho, bool exact = false) {
  return pmc_loss(category_stats(data, groups, disc, exact),
                  {alpha, disc.lambda(), gamma, rho});
}

inline LossResult dc_loss(const AuditDataset& data,
                          const GroupCollection& groups,
                          const Discretization& disc, double alpha,
                          double gamma, bool exact = false) {
  return dc_loss(category_stats(data, groups, disc, exact),
                 {alpha, disc.lambda(), gamma, std::nullopt});
}

// Mann-Whitney AUROC; tied pairs count one half. Undefined for one class.
inline std::optional<double> auroc(std::span<const double> scores,
                                   std::span<const std::uint8_t> outcomes) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double pos = 0.0, neg = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (outcomes[order[k]]) {
        pos += 1.0;
        rank_sum += avg_rank;
      } else {
        neg += 1.0;
      }
    }
    i = j;
  }
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

inline std::optional<double> auroc(const AuditDataset& data) {
  return auroc(data.scores(), data.outcomes());
}

struct CurvePoint {
  std::size_t bin_index = 0;
  double bin_mid = 0.0;
  double rbar = 0.0;
  double ybar = 0.0;
  std::size_t n = 0;
};

// Per-group reliability curve; bins with no members are simply absent.
inline std::vector<std::vector<CurvePoint>> calibration_curve(
    const AuditDataset& data, const GroupCollection& groups,
    const Discretization& disc) {
  const CategoryTable table = category_stats(data, groups, disc);
  std::vector<std::vector<CurvePoint>> out(groups.size());
  for (const auto& c : table.entries) {
    out[c.group_id].push_back({c.bin_index, disc.bins()[c.bin_index].midpoint(),
                               c.rbar, c.ybar, c.n});
  }
  return out;
}

}  // namespace pmcal

#endif  // PMCAL_METRICS_HPP_
