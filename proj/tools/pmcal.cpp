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

// pmcal: audit risk scores for multicalibration, proportional
// multicalibration and differential calibration; post-process them; emit
// simulation data and bound curves.
//
// Exit codes: 0 success (including non-converged post-processing),
// 1 invalid configuration or data, 2 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmcal/pmcal.hpp"
#include "pmcal/report.hpp"

namespace {

using pmcal::IoError;

// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct DataFlags {
  std::string path;
  std::string outcome = "y";
  std::string score = "r";
  std::string p_star;
};

struct AuditFlags {
  std::vector<std::string> groups;
  bool marginals = false;
  double alpha = 0.1;
  double lambda = 0.1;
  double gamma = 0.05;
  double rho = 0.01;
  std::optional<double> min_group_mass;
  std::string bins = "uniform";
  bool exact = false;
  std::uint64_t seed = 0;

  pmcal::AuditParams params() const {
    pmcal::AuditParams p;
    p.group_attributes = groups;
    p.marginals = marginals;
    p.alpha = alpha;
    p.lambda = lambda;
    p.gamma = gamma;
    p.rho = rho;
    p.min_group_mass = min_group_mass;
    p.bins = pmcal::parse_bin_kind(bins);
    p.exact = exact;
    p.seed = seed;
    return p;
  }
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.path, "Input CSV")->required();
  cmd->add_option("--outcome", d.outcome, "Outcome column (0/1)");
  cmd->add_option("--score", d.score, "Risk score column");
  cmd->add_option("--p-star", d.p_star, "Column of true outcome probabilities");
}

void add_audit_flags(CLI::App* cmd, AuditFlags& a) {
  cmd->add_option("--groups", a.groups, "Attribute columns defining groups")
      ->required()
      ->delimiter(',');
  cmd->add_flag("--marginals", a.marginals, "Also audit marginal groups");
  cmd->add_option("--alpha", a.alpha, "Tolerance alpha");
  cmd->add_option("--lambda", a.lambda, "Bin width lambda");
  cmd->add_option("--gamma", a.gamma, "Minimum group mass gamma");
  cmd->add_option("--rho", a.rho, "Minimum category outcome rate rho");
  cmd->add_option("--min-group-mass", a.min_group_mass,
                  "Group admission mass (defaults to gamma)");
  cmd->add_option("--bins", a.bins, "uniform | geometric")
      ->check(CLI::IsMember({"uniform", "geometric"}));
  cmd->add_flag("--exact", a.exact, "Use p_star instead of sampled outcomes");
  cmd->add_option("--seed", a.seed, "Random seed");
}

pmcal::AuditDataset load(const DataFlags& d, const AuditFlags& a) {
  pmcal::CsvSchema schema;
  schema.outcome_col = d.outcome;
  schema.score_col = d.score;
  schema.attr_cols = a.groups;
  if (!d.p_star.empty()) schema.p_star_col = d.p_star;
  return pmcal::ingest_csv(d.path, schema);
}

std::string to_text(const pmcal::json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration fairness audits and post-processing"};
  app.set_version_flag("--version", std::string(pmcal::kVersion));
  app.require_subcommand(1);

  // audit
  DataFlags audit_data;
  AuditFlags audit_flags;
  std::string audit_out;
  auto* audit = app.add_subcommand("audit", "Compute MC, PMC and DC losses");
  add_data_flags(audit, audit_data);
  add_audit_flags(audit, audit_flags);
  audit->add_option("--out", audit_out, "Report path (JSON, default stdout)");

  // postprocess
  DataFlags pp_data;
  AuditFlags pp_flags;
  std::string pp_mode = "pmc";
  std::size_t pp_max_passes = 200;
  std::optional<double> pp_split;
  double pp_sample = 1.0;
  std::string pp_scores, pp_report;
  bool pp_timing = false;
  auto* pp = app.add_subcommand("postprocess", "Boost scores toward (P)MC");
  add_data_flags(pp, pp_data);
  add_audit_flags(pp, pp_flags);
  pp->add_option("--mode", pp_mode, "pmc | mc")
      ->check(CLI::IsMember({"pmc", "mc"}));
  pp->add_option("--max-passes", pp_max_passes, "Pass limit");
  pp->add_option("--split", pp_split, "Fit fraction; the rest is held out");
  pp->add_option("--sample-fraction", pp_sample, "Per-pass row sample");
  pp->add_option("--out-scores", pp_scores, "Updated-score CSV");
  pp->add_option("--out-report", pp_report,
                 "Trace and before/after reports (JSON, default stdout)");
  pp->add_flag("--timing", pp_timing, "Include wall time in the trace");

  // simulate
  std::string sim_scenario = "random";
  pmcal::SimConfig sim_cfg;
  std::string sim_out, sim_table;
  auto* sim = app.add_subcommand("simulate", "Simulated populations");
  sim->add_option("--scenario", sim_scenario,
                  "random | fixed | increasing | decreasing")
      ->check(CLI::IsMember({"random", "fixed", "increasing", "decreasing"}));
  sim->add_option("--n-groups", sim_cfg.n_groups, "Number of groups");
  sim->add_option("--alpha", sim_cfg.alpha, "Calibration error bound");
  sim->add_option("--n-per-group", sim_cfg.n_per_group, "Rows per group");
  sim->add_option("--replicates", sim_cfg.n_sims, "Replicates for --table");
  sim->add_option("--seed", sim_cfg.seed, "Random seed");
  sim->add_option("--out", sim_out, "Dataset CSV");
  sim->add_option("--table", sim_table, "Per-group PMC ratio table (plot CSV)");

  // bounds
  pmcal::CurveRequest curve;
  std::string grid, bounds_out;
  auto* bounds = app.add_subcommand("bounds", "Bound curves as plot data");
  bounds->add_option("--curve", curve.curve, "Curve name")
      ->required()
      ->check(CLI::IsMember({"mc_to_dc", "pmc_to_dc", "pmc_to_mc", "dc_to_mc",
                             "pmc_disc_uniform", "pmc_disc_geometric",
                             "constraints"}));
  bounds->add_option("--grid", grid, "lo:hi:step");
  bounds->add_option("--r-min", curve.r_min, "r_min series")->delimiter(',');
  bounds->add_option("--delta", curve.delta, "delta series")->delimiter(',');
  bounds->add_option("--rho", curve.rho, "rho series")->delimiter(',');
  bounds->add_option("--alpha", curve.alpha, "Fixed alpha");
  bounds->add_option("--out", bounds_out, "Plot CSV (default stdout)");

  // verify
  std::string verify_bound_id;
  std::size_t verify_trials = 200;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Randomized search for bound violations");
  verify->add_option("--bound", verify_bound_id, "mc_to_dc | pmc_to_dc | pmc_to_mc | efficiency")
      ->required();
  verify->add_option("--trials", verify_trials, "Random datasets");
  verify->add_option("--seed", verify_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*audit) {
      const auto data = load(audit_data, audit_flags);
      const auto report = pmcal::run_audit(data, audit_flags.params());
      emit(audit_out, to_text(pmcal::to_json(report)));
    } else if (*pp) {
      const auto data = load(pp_data, pp_flags);
      pmcal::PostprocessParams params;
      params.audit = pp_flags.params();
      params.mode = pmcal::parse_mode(pp_mode);
      params.max_passes = pp_max_passes;
      params.sample_fraction = pp_sample;
      params.split = pp_split;
      const auto res = pmcal::run_postprocess(data, params);
      if (!pp_scores.empty()) {
        pmcal::CsvSchema schema;
        schema.outcome_col = pp_data.outcome;
        schema.score_col = pp_data.score;
        if (!pp_data.p_star.empty()) schema.p_star_col = pp_data.p_star;
        std::vector<std::string> fold(data.size(), "fit");
        if (params.split) {
          for (auto i : res.eval_rows) fold[i] = "held_out";
        }
        std::ostringstream csv;
        pmcal::write_csv(csv, res.updated, schema, {{"fold", fold}});
        emit(pp_scores, csv.str());
      }
      emit(pp_report,
           to_text(pmcal::postprocess_summary(params, res, pp_timing)));
    } else if (*sim) {
      sim_cfg.scenario = pmcal::parse_scenario(sim_scenario);
      if (sim_out.empty() && sim_table.empty()) {
        throw pmcal::ConfigError("simulate needs --out and/or --table");
      }
      if (!sim_out.empty()) {
        std::ostringstream csv;
        pmcal::CsvSchema schema;
        schema.p_star_col = "p_star";
        pmcal::write_csv(csv, pmcal::simulate(sim_cfg), schema);
        emit(sim_out, csv.str());
      }
      if (!sim_table.empty()) {
        std::ostringstream csv;
        pmcal::write_plot_csv(
            csv, pmcal::scenario_plot(pmcal::run_scenarios(sim_cfg)));
        emit(sim_table, csv.str());
      }
    } else if (*bounds) {
      if (!grid.empty()) curve.grid = pmcal::parse_grid(grid);
      std::ostringstream csv;
      pmcal::write_plot_csv(csv, pmcal::bound_plot(curve));
      emit(bounds_out, csv.str());
    } else if (*verify) {
      const auto id = pmcal::parse_bound_id(verify_bound_id);
      const auto rep = pmcal::verify_bound(id, verify_trials, verify_seed);
      pmcal::json j = {{"bound", pmcal::bound_name(id)},
                       {"trials", rep.trials},
                       {"checked", rep.checked},
                       {"violations", rep.violations},
                       {"violating_trials", rep.violating_trials}};
      j["max_excess"] = rep.checked ? pmcal::json(rep.max_excess)
                                    : pmcal::json(nullptr);
      std::cout << j.dump(2) << "\n";
      return rep.violations == 0 ? 0 : 1;
    }
  } catch (const pmcal::IoError& e) {
    std::cerr << "pmcal: " << e.what() << "\n";
    return 2;
  } catch (const pmcal::ValidationError& e) {
    std::cerr << "pmcal: invalid data: " << e.what() << "\n";
    return 1;
  } catch (const pmcal::ConfigError& e) {
    std::cerr << "pmcal: invalid configuration: " << e.what() << "\n";
    return 1;
  } catch (const pmcal::json::exception& e) {
    std::cerr << "pmcal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
