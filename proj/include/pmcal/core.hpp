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

// Domain types shared by every module: the audited sample, the subgroup
// collection, prediction-bin discretizations and per-(group, bin) statistics.

#ifndef PMCAL_CORE_HPP_
#define PMCAL_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmcal/error.hpp"

namespace pmcal {

inline constexpr std::string_view kMissingLevel = "__missing__";

// One observation as handed over by a reader. `attrs` is aligned with the
// dataset's attribute names; nullopt marks a missing value.
struct Row {
  int y = 0;
  double r = 0.0;
  std::vector<std::optional<std::string>> attrs;
  std::optional<double> p_star;
};

// Immutable columnar sample. Attribute values are dictionary encoded; each
// dictionary holds the observed levels in sorted order so that codes compare
// like the level strings do.
class AuditDataset {
 public:
  struct Columns {
    std::vector<std::uint8_t> outcomes;
    std::vector<double> scores;
    std::optional<std::vector<double>> p_star;
    std::vector<std::vector<std::string>> dictionaries;
    std::vector<std::vector<std::uint32_t>> codes;
  };

  AuditDataset(std::vector<std::string> attribute_names,
               std::span<const Row> rows)
      : names_(std::move(attribute_names)) {
    if (rows.empty()) throw ValidationError("dataset has no rows");
    const std::size_t k = names_.size();
    check_names();
    Columns cols;
    cols.outcomes.reserve(rows.size());
    cols.scores.reserve(rows.size());
    const bool any_p = rows.front().p_star.has_value();
    if (any_p) cols.p_star.emplace().reserve(rows.size());
    std::vector<std::vector<std::string>> raw(k);
    for (auto& col : raw) col.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      if (row.attrs.size() != k) {
        throw ValidationError(i + 1, "attrs",
                              "expected " + std::to_string(k) +
                                  " attribute values, got " +
                                  std::to_string(row.attrs.size()));
      }
      if (row.y != 0 && row.y != 1) {
        throw ValidationError(i + 1, "y", "outcome must be 0 or 1");
      }
      if (row.p_star.has_value() != any_p) {
        throw ValidationError(i + 1, "p_star",
                              "p_star must be present on all rows or none");
      }
      cols.outcomes.push_back(static_cast<std::uint8_t>(row.y));
      cols.scores.push_back(row.r);
      if (any_p) cols.p_star->push_back(*row.p_star);
      for (std::size_t a = 0; a < k; ++a) {
        raw[a].push_back(row.attrs[a] ? *row.attrs[a]
                                      : std::string(kMissingLevel));
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      auto& dict = cols.dictionaries.emplace_back(raw[a]);
      std::sort(dict.begin(), dict.end());
      dict.erase(std::unique(dict.begin(), dict.end()), dict.end());
      auto& codes = cols.codes.emplace_back();
      codes.reserve(raw[a].size());
      for (const auto& v : raw[a]) {
        codes.push_back(static_cast<std::uint32_t>(
            std::lower_bound(dict.begin(), dict.end(), v) - dict.begin()));
      }
    }
    adopt(std::move(cols));
  }

  // Columnar constructor for generators. Dictionaries need not be sorted or
  // minimal; they are normalized here.
  static AuditDataset from_columns(std::vector<std::string> attribute_names,
                                   Columns cols) {
    AuditDataset d;
    d.names_ = std::move(attribute_names);
    d.check_names();
    if (cols.scores.empty()) throw ValidationError("dataset has no rows");
    if (cols.dictionaries.size() != d.names_.size() ||
        cols.codes.size() != d.names_.size()) {
      throw ValidationError("attribute columns do not match attribute names");
    }
    for (std::size_t a = 0; a < d.names_.size(); ++a) {
      normalize_dictionary(cols.dictionaries[a], cols.codes[a]);
    }
    d.adopt(std::move(cols));
    return d;
  }

  std::size_t size() const { return scores_.size(); }
  std::size_t attribute_count() const { return names_.size(); }
  const std::vector<std::string>& attribute_names() const { return names_; }

  std::optional<std::size_t> attribute_index(std::string_view name) const {
    for (std::size_t a = 0; a < names_.size(); ++a) {
      if (names_[a] == name) return a;
    }
    return std::nullopt;
  }

  int outcome(std::size_t i) const { return outcomes_[i]; }
  double score(std::size_t i) const { return scores_[i]; }
  bool has_p_star() const { return !p_star_.empty(); }
  double p_star(std::size_t i) const { return p_star_[i]; }

  std::span<const std::uint8_t> outcomes() const { return outcomes_; }
  std::span<const double> scores() const { return scores_; }
  std::span<const double> p_stars() const { return p_star_; }

  const std::vector<std::string>& levels(std::size_t attr) const {
    return dicts_[attr];
  }
  std::span<const std::uint32_t> codes(std::size_t attr) const {
    return codes_[attr];
  }
  const std::string& level(std::size_t row, std::size_t attr) const {
    return dicts_[attr][codes_[attr][row]];
  }

  // Same rows with a different score vector (validated).
  AuditDataset with_scores(std::vector<double> scores) const {
    if (scores.size() != size()) {
      throw ValidationError("score vector length does not match dataset");
    }
    AuditDataset d = *this;
    d.scores_ = std::move(scores);
    d.validate_values();
    return d;
  }

  // Rows at `indices`, in that order.
  AuditDataset subset(std::span<const std::size_t> indices) const {
    Columns cols;
    cols.outcomes.reserve(indices.size());
    cols.scores.reserve(indices.size());
    if (has_p_star()) cols.p_star.emplace().reserve(indices.size());
    cols.dictionaries = dicts_;
    cols.codes.resize(names_.size());
    for (std::size_t i : indices) {
      if (i >= size()) throw ConfigError("subset index out of range");
      cols.outcomes.push_back(outcomes_[i]);
      cols.scores.push_back(scores_[i]);
      if (has_p_star()) cols.p_star->push_back(p_star_[i]);
      for (std::size_t a = 0; a < names_.size(); ++a) {
        cols.codes[a].push_back(codes_[a][i]);
      }
    }
    return from_columns(names_, std::move(cols));
  }

  double prevalence() const {
    const double pos =
        std::accumulate(outcomes_.begin(), outcomes_.end(), 0.0);
    return pos / static_cast<double>(size());
  }

 private:
  AuditDataset() = default;

  static void normalize_dictionary(std::vector<std::string>& dict,
                                   std::vector<std::uint32_t>& codes) {
    std::vector<char> used(dict.size(), 0);
    for (auto c : codes) {
      if (c >= dict.size()) throw ValidationError("attribute code out of range");
      used[c] = 1;
    }
    std::vector<std::string> sorted;
    for (std::size_t c = 0; c < dict.size(); ++c) {
      if (used[c]) sorted.push_back(dict[c]);
    }
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::uint32_t> remap(dict.size(), 0);
    for (std::size_t c = 0; c < dict.size(); ++c) {
      if (!used[c]) continue;
      remap[c] = static_cast<std::uint32_t>(
          std::lower_bound(sorted.begin(), sorted.end(), dict[c]) -
          sorted.begin());
    }
    for (auto& c : codes) c = remap[c];
    dict = std::move(sorted);
  }

  void check_names() const {
    std::vector<std::string> sorted = names_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("duplicate attribute name");
    }
  }

  void adopt(Columns cols) {
    outcomes_ = std::move(cols.outcomes);
    scores_ = std::move(cols.scores);
    if (cols.p_star) p_star_ = std::move(*cols.p_star);
    dicts_ = std::move(cols.dictionaries);
    codes_ = std::move(cols.codes);
    if (outcomes_.size() != scores_.size() ||
        (!p_star_.empty() && p_star_.size() != scores_.size())) {
      throw ValidationError("column lengths differ");
    }
    for (const auto& c : codes_) {
      if (c.size() != scores_.size()) {
        throw ValidationError("column lengths differ");
      }
    }
    validate_values();
  }

  void validate_values() const {
    for (std::size_t i = 0; i < scores_.size(); ++i) {
      if (outcomes_[i] > 1) {
        throw ValidationError(i + 1, "y", "outcome must be 0 or 1");
      }
      if (!(scores_[i] >= 0.0 && scores_[i] <= 1.0)) {
        throw ValidationError(i + 1, "r", "score must lie in [0, 1]");
      }
      if (!p_star_.empty() && !(p_star_[i] >= 0.0 && p_star_[i] <= 1.0)) {
        throw ValidationError(i + 1, "p_star", "p_star must lie in [0, 1]");
      }
    }
  }

  std::vector<std::string> names_;
  std::vector<std::uint8_t> outcomes_;
  std::vector<double> scores_;
  std::vector<double> p_star_;
  std::vector<std::vector<std::string>> dicts_;
  std::vector<std::vector<std::uint32_t>> codes_;
};

// ---------------------------------------------------------------------------
// Groups

struct GroupTerm {
  std::string attribute;
  std::string level;
  bool operator==(const GroupTerm&) const = default;
};

struct Group {
  std::size_t id = 0;
  std::string label;
  std::vector<GroupTerm> predicate;  // conjunction, sorted by attribute
};

struct GroupCollection {
  std::vector<Group> groups;
  std::vector<std::string> attribute_basis;  // sorted
  bool includes_marginals = false;

  std::size_t size() const { return groups.size(); }
  bool empty() const { return groups.empty(); }
};

// Row indices of every group, ascending.
using Membership = std::vector<std::vector<std::uint32_t>>;

inline Membership group_members(const GroupCollection& groups,
                                const AuditDataset& data) {
  Membership out(groups.size());
  struct Resolved {
    std::size_t attr;
    std::optional<std::uint32_t> code;
  };
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<Resolved> terms;
    bool possible = true;
    for (const auto& t : groups.groups[g].predicate) {
      auto a = data.attribute_index(t.attribute);
      if (!a) throw ConfigError("unknown attribute '" + t.attribute + "'");
      const auto& dict = data.levels(*a);
      auto it = std::lower_bound(dict.begin(), dict.end(), t.level);
      if (it == dict.end() || *it != t.level) {
        possible = false;
        break;
      }
      terms.push_back({*a, static_cast<std::uint32_t>(it - dict.begin())});
    }
    if (!possible) continue;
    for (std::size_t i = 0; i < data.size(); ++i) {
      bool match = true;
      for (const auto& t : terms) {
        if (data.codes(t.attr)[i] != *t.code) {
          match = false;
          break;
        }
      }
      if (match) out[g].push_back(static_cast<std::uint32_t>(i));
    }
  }
  return out;
}

namespace detail {

inline std::string make_label(const std::vector<GroupTerm>& terms) {
  std::string label;
  for (const auto& t : terms) {
    if (!label.empty()) label += " & ";
    label += t.attribute + "=" + t.level;
  }
  return label;
}

}  // namespace detail

// Intersectional groups over `attribute_basis` (plus every coarser product
// when `include_marginals`), keeping groups with P(S) >= gamma. Empty products
// are never emitted. Ids: the full intersection comes first, then marginal
// subsets by decreasing size; attributes sort by name and levels by value.
inline GroupCollection enumerate_groups(const AuditDataset& data,
                                        std::vector<std::string> attribute_basis,
                                        bool include_marginals, double gamma) {
  if (attribute_basis.empty()) throw ConfigError("attribute basis is empty");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  std::sort(attribute_basis.begin(), attribute_basis.end());
  if (std::adjacent_find(attribute_basis.begin(), attribute_basis.end()) !=
      attribute_basis.end()) {
    throw ConfigError("attribute basis lists a name twice");
  }
  std::vector<std::size_t> attr_idx;
  for (const auto& name : attribute_basis) {
    auto a = data.attribute_index(name);
    if (!a) throw ConfigError("unknown attribute '" + name + "'");
    attr_idx.push_back(*a);
  }

  // Subsets as bitmasks over the sorted basis.
  const std::size_t k = attribute_basis.size();
  if (k > 20) throw ConfigError("too many attributes in basis");
  std::vector<std::uint32_t> subsets;
  const std::uint32_t full = (std::uint32_t{1} << k) - 1;
  subsets.push_back(full);
  if (include_marginals) {
    std::vector<std::uint32_t> rest;
    for (std::uint32_t m = 1; m < full; ++m) rest.push_back(m);
    auto members = [k](std::uint32_t m) {
      std::vector<std::size_t> v;
      for (std::size_t b = 0; b < k; ++b) {
        if (m & (std::uint32_t{1} << b)) v.push_back(b);
      }
      return v;
    };
    std::sort(rest.begin(), rest.end(), [&](std::uint32_t x, std::uint32_t y) {
      auto mx = members(x), my = members(y);
      if (mx.size() != my.size()) return mx.size() > my.size();
      return mx < my;
    });
    subsets.insert(subsets.end(), rest.begin(), rest.end());
  }

  GroupCollection out;
  out.attribute_basis = attribute_basis;
  out.includes_marginals = include_marginals;
  const double n_total = static_cast<double>(data.size());
  for (std::uint32_t mask : subsets) {
    std::vector<std::size_t> pos;  // positions in the sorted basis
    for (std::size_t b = 0; b < k; ++b) {
      if (mask & (std::uint32_t{1} << b)) pos.push_back(b);
    }
    // Mixed-radix key, first attribute most significant.
    std::vector<std::size_t> radix;
    std::size_t cells = 1;
    for (std::size_t p : pos) {
      radix.push_back(data.levels(attr_idx[p]).size());
      cells *= radix.back();
    }
    std::vector<std::size_t> counts(cells, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::size_t key = 0;
      for (std::size_t j = 0; j < pos.size(); ++j) {
        key = key * radix[j] + data.codes(attr_idx[pos[j]])[i];
      }
      ++counts[key];
    }
    for (std::size_t key = 0; key < cells; ++key) {
      if (counts[key] == 0) continue;
      if (static_cast<double>(counts[key]) < gamma * n_total) continue;
      std::vector<GroupTerm> terms(pos.size());
      std::size_t rem = key;
      for (std::size_t j = pos.size(); j-- > 0;) {
        const std::size_t code = rem % radix[j];
        rem /= radix[j];
        terms[j] = {attribute_basis[pos[j]],
                    data.levels(attr_idx[pos[j]])[code]};
      }
      Group g;
      g.id = out.groups.size();
      g.label = detail::make_label(terms);
      g.predicate = std::move(terms);
      out.groups.push_back(std::move(g));
    }
  }
  if (out.groups.empty()) {
    throw EmptyCollectionError("no group has mass >= gamma");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discretization

enum class BinKind { kUniform, kGeometric };

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_hi = false;

  bool contains(double r) const {
    return r >= lo && (closed_hi ? r <= hi : r < hi);
  }
  double midpoint() const { return 0.5 * (lo + hi); }
};

class Discretization {
 public:
  BinKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  std::optional<double> rho() const { return rho_; }
  const std::vector<Bin>& bins() const { return bins_; }
  std::size_t size() const { return bins_.size(); }

  // Total on [0, 1]; values outside are clamped to the end bins.
  std::size_t bin_of(double r) const {
    auto it = std::upper_bound(lows_.begin(), lows_.end(), r);
    if (it == lows_.begin()) return 0;
    return static_cast<std::size_t>(it - lows_.begin()) - 1;
  }

 private:
  friend Discretization make_discretization(BinKind, double,
                                            std::optional<double>);
  BinKind kind_ = BinKind::kUniform;
  double lambda_ = 1.0;
  std::optional<double> rho_;
  std::vector<Bin> bins_;
  std::vector<double> lows_;
};

inline Discretization make_discretization(BinKind kind, double lambda,
                                          std::optional<double> rho) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in (0, 1]");
  }
  // ceil(1/lambda), tolerant of 1/lambda landing just above an integer.
  const auto count = static_cast<std::size_t>(std::ceil(1.0 / lambda - 1e-9));
  Discretization d;
  d.kind_ = kind;
  d.lambda_ = lambda;
  if (kind == BinKind::kUniform) {
    for (std::size_t j = 0; j < count; ++j) {
      const double lo = static_cast<double>(j) * lambda;
      const double hi = j + 1 == count ? 1.0 : static_cast<double>(j + 1) * lambda;
      d.bins_.push_back({lo, hi, j + 1 == count});
    }
  } else {
    if (!rho) throw ConfigError("geometric discretization requires rho");
    if (!(*rho > 0.0 && *rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
    d.rho_ = rho;
    auto edge = [&](std::size_t j) {
      return std::pow(*rho, 1.0 - static_cast<double>(j) * lambda);
    };
    d.bins_.push_back({0.0, edge(0), false});
    for (std::size_t j = 0; j < count; ++j) {
      const bool last = j + 1 == count;
      d.bins_.push_back({edge(j), last ? 1.0 : edge(j + 1), last});
    }
  }
  for (const auto& b : d.bins_) d.lows_.push_back(b.lo);
  return d;
}

inline Discretization make_discretization(BinKind kind, double lambda) {
  return make_discretization(kind, lambda, std::nullopt);
}

// ---------------------------------------------------------------------------
// Category statistics

struct Category {
  std::size_t group_id = 0;
  std::size_t bin_index = 0;
  std::size_t n = 0;
  double sum_y = 0.0;  // sum of outcomes (or p_star in exact mode)
  double sum_r = 0.0;
  double ybar = 0.0;
  double rbar = 0.0;
  double joint_mass = 0.0;  // n / N
  double cond_mass = 0.0;   // n / |S|
};

struct CategoryTable {
  std::vector<Category> entries;  // ordered by (group_id, bin_index)
  std::size_t n_rows = 0;
  std::vector<std::size_t> group_sizes;
};

// Statistics for an explicit score vector and precomputed membership. Used by
// the boosting loop, where scores change while membership does not.
inline CategoryTable category_stats(const AuditDataset& data,
                                    std::span<const double> scores,
                                    const Membership& members,
                                    const Discretization& disc,
                                    bool exact_mode) {
  if (exact_mode && !data.has_p_star()) {
    throw ConfigError("exact mode requires p_star on every row");
  }
  CategoryTable table;
  table.n_rows = data.size();
  const double n_total = static_cast<double>(data.size());
  std::vector<std::size_t> n(disc.size());
  std::vector<double> sy(disc.size()), sr(disc.size());
  for (std::size_t g = 0; g < members.size(); ++g) {
    std::fill(n.begin(), n.end(), 0);
    std::fill(sy.begin(), sy.end(), 0.0);
    std::fill(sr.begin(), sr.end(), 0.0);
    for (std::uint32_t i : members[g]) {
      const std::size_t b = disc.bin_of(scores[i]);
      ++n[b];
      sy[b] += exact_mode ? data.p_star(i) : data.outcome(i);
      sr[b] += scores[i];
    }
    const std::size_t size = members[g].size();
    table.group_sizes.push_back(size);
    for (std::size_t b = 0; b < disc.size(); ++b) {
      if (n[b] == 0) continue;
      const double nb = static_cast<double>(n[b]);
      table.entries.push_back({g, b, n[b], sy[b], sr[b], sy[b] / nb,
                               sr[b] / nb, nb / n_total,
                               nb / static_cast<double>(size)});
    }
  }
  return table;
}

inline CategoryTable category_stats(const AuditDataset& data,
                                    const GroupCollection& groups,
                                    const Discretization& disc,
                                    bool exact_mode = false) {
  if (exact_mode && !data.has_p_star()) {
    throw ConfigError("exact mode requires p_star on every row");
  }
  return category_stats(data, data.scores(), group_members(groups, data), disc,
                        exact_mode);
}

}  // namespace pmcal

#endif  // PMCAL_CORE_HPP_
