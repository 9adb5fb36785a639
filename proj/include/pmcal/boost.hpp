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

// Post-processing by iterated category corrections.
//
// Each pass walks the (group, bin) categories in canonical order. A category
// whose mass reaches alpha*lambda*gamma has its mean score shifted onto its
// mean outcome when the gap exceeds a cutoff: alpha * max(ybar, rho) in PMC
// mode, the constant alpha in MC mode. Membership and statistics are read
// from the current scores at every visit, so an update is visible to every
// category visited after it. The loop ends after a pass with no update.

#ifndef PMCAL_BOOST_HPP_
#define PMCAL_BOOST_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pmcal/core.hpp"
#include "pmcal/error.hpp"
#include "pmcal/random.hpp"

namespace pmcal {

enum class BoostMode { kPmc, kMc };

struct BoostConfig {
  BoostMode mode = BoostMode::kPmc;
  double alpha = 0.1;
  double lambda = 0.1;
  double gamma = 0.05;
  double rho = 0.01;  // PMC mode only
  std::size_t max_passes = 200;
  double sample_fraction = 1.0;
  std::uint64_t seed = 0;
  // Take category outcome means from p_star instead of y.
  bool exact = false;
};

struct UpdateRecord {
  std::size_t pass = 0;
  std::size_t group_id = 0;
  std::size_t bin_index = 0;
  double delta_r = 0.0;
  double cutoff = 0.0;
  std::size_t n = 0;        // rows shifted
  std::size_t clamped = 0;  // rows whose shifted score left [0, 1]
};

struct PassRecord {
  std::size_t index = 0;
  std::vector<UpdateRecord> updates;
};

struct UpdateTrace {
  std::vector<PassRecord> passes;
  bool converged = false;
  std::size_t total_updates = 0;
  std::size_t clamp_events = 0;
  double wall_time_seconds = 0.0;

  std::size_t pass_count() const { return passes.size(); }
};

struct BoostResult {
  std::vector<double> scores;
  UpdateTrace trace;
};

// Called after every update with the shifted rows, their previous scores and
// the full score vector after the update.
using UpdateObserver = std::function<void(
    const UpdateRecord&, std::span<const std::uint32_t> rows,
    std::span<const double> previous, std::span<const double> scores)>;

inline double squash(double score) { return std::clamp(score, 0.0, 1.0); }

inline void validate(const BoostConfig& cfg) {
  auto open01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open01(cfg.alpha)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0)) {
    throw ConfigError("lambda must lie in (0, 1]");
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw ConfigError("gamma must lie in (0, 1]");
  }
  if (cfg.mode == BoostMode::kPmc && !open01(cfg.rho)) {
    throw ConfigError("rho must lie in (0, 1)");
  }
  if (cfg.max_passes < 1) throw ConfigError("max_passes must be >= 1");
  if (!(cfg.sample_fraction > 0.0 && cfg.sample_fraction <= 1.0)) {
    throw ConfigError("sample_fraction must lie in (0, 1]");
  }
}

// Worst-case number of updates from the potential argument: N / (a^3 r^2 l g)
// in PMC mode (r = rho), N / (a^3 l g) in MC mode.
inline double update_cap(std::size_t n_rows, const BoostConfig& cfg) {
  const double a3 = cfg.alpha * cfg.alpha * cfg.alpha;
  const double r2 = cfg.mode == BoostMode::kPmc ? cfg.rho * cfg.rho : 1.0;
  return static_cast<double>(n_rows) / (a3 * r2 * cfg.lambda * cfg.gamma);
}

inline BoostResult boost(const AuditDataset& data,
                         const GroupCollection& groups,
                         const Discretization& disc, const BoostConfig& cfg,
                         const UpdateObserver& observer = {}) {
  validate(cfg);
  if (std::abs(disc.lambda() - cfg.lambda) > 1e-15) {
    throw ConfigError("discretization lambda differs from boost lambda");
  }
  if (cfg.exact && !data.has_p_star()) {
    throw ConfigError("exact mode requires p_star on every row");
  }
  const auto start = std::chrono::steady_clock::now();
  const Membership members = group_members(groups, data);
  const std::size_t n_rows = data.size();

  BoostResult out;
  out.scores.assign(data.scores().begin(), data.scores().end());
  auto& scores = out.scores;
  auto target = [&](std::size_t i) {
    return cfg.exact ? data.p_star(i) : static_cast<double>(data.outcome(i));
  };

  Rng rng(cfg.seed);
  std::vector<char> in_sample(n_rows, 1);
  std::vector<std::size_t> bins;
  std::vector<std::uint32_t> rows;
  std::vector<std::size_t> positions;
  std::vector<double> previous;

  for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
    std::size_t sample_n = n_rows;
    if (cfg.sample_fraction < 1.0) {
      sample_n = 0;
      for (auto& s : in_sample) {
        s = rng.bernoulli(cfg.sample_fraction) ? 1 : 0;
        sample_n += static_cast<std::size_t>(s);
      }
    }
    const double min_count =
        cfg.alpha * cfg.lambda * cfg.gamma * static_cast<double>(sample_n);

    PassRecord record;
    record.index = pass;
    for (std::size_t g = 0; g < members.size(); ++g) {
      const auto& mem = members[g];
      bins.resize(mem.size());
      for (std::size_t p = 0; p < mem.size(); ++p) {
        bins[p] = disc.bin_of(scores[mem[p]]);
      }
      for (std::size_t b = 0; b < disc.size(); ++b) {
        positions.clear();
        std::size_t n_s = 0;
        double sum_y = 0.0, sum_r = 0.0;
        for (std::size_t p = 0; p < mem.size(); ++p) {
          if (bins[p] != b) continue;
          positions.push_back(p);
          const std::uint32_t i = mem[p];
          if (!in_sample[i]) continue;
          ++n_s;
          sum_y += target(i);
          sum_r += scores[i];
        }
        if (n_s == 0 || static_cast<double>(n_s) < min_count) continue;
        const double ybar = sum_y / static_cast<double>(n_s);
        const double rbar = sum_r / static_cast<double>(n_s);
        const double delta = ybar - rbar;
        double cutoff = cfg.alpha;
        if (cfg.mode == BoostMode::kPmc) {
          cutoff = ybar >= cfg.rho ? cfg.alpha * ybar : cfg.alpha * cfg.rho;
        }
        if (!(std::abs(delta) >= cutoff)) continue;

        UpdateRecord u{pass, g, b, delta, cutoff, positions.size(), 0};
        rows.clear();
        previous.clear();
        for (std::size_t p : positions) {
          const std::uint32_t i = mem[p];
          const double shifted = scores[i] + delta;
          const double clamped = squash(shifted);
          if (clamped != shifted) ++u.clamped;
          rows.push_back(i);
          previous.push_back(scores[i]);
          scores[i] = clamped;
          bins[p] = disc.bin_of(clamped);
        }
        out.trace.clamp_events += u.clamped;
        if (observer) observer(u, rows, previous, scores);
        record.updates.push_back(u);
      }
    }
    const bool quiet = record.updates.empty();
    out.trace.total_updates += record.updates.size();
    out.trace.passes.push_back(std::move(record));
    if (quiet) {
      out.trace.converged = true;
      break;
    }
  }
  out.trace.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

inline BoostResult pmc_boost(const AuditDataset& data,
                             const GroupCollection& groups,
                             const Discretization& disc, BoostConfig cfg,
                             const UpdateObserver& observer = {}) {
  cfg.mode = BoostMode::kPmc;
  return boost(data, groups, disc, cfg, observer);
}

inline BoostResult mc_boost(const AuditDataset& data,
                            const GroupCollection& groups,
                            const Discretization& disc, BoostConfig cfg,
                            const UpdateObserver& observer = {}) {
  cfg.mode = BoostMode::kMc;
  return boost(data, groups, disc, cfg, observer);
}

// Replays a trace on another sample (e.g. a held-out fold): each recorded
// update shifts that group's rows currently in the recorded bin.
inline std::vector<double> apply_updates(const UpdateTrace& trace,
                                         const AuditDataset& data,
                                         const GroupCollection& groups,
                                         const Discretization& disc) {
  const Membership members = group_members(groups, data);
  std::vector<double> scores(data.scores().begin(), data.scores().end());
  for (const auto& pass : trace.passes) {
    for (const auto& u : pass.updates) {
      if (u.group_id >= members.size()) {
        throw ConfigError("trace references a group outside the collection");
      }
      std::vector<std::uint32_t> hit;
      for (std::uint32_t i : members[u.group_id]) {
        if (disc.bin_of(scores[i]) == u.bin_index) hit.push_back(i);
      }
      for (std::uint32_t i : hit) scores[i] = squash(scores[i] + u.delta_r);
    }
  }
  return scores;
}

}  // namespace pmcal

#endif  // PMCAL_BOOST_HPP_
