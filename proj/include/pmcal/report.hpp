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

// JSON form of audit reports, update traces and post-processing summaries.
// Undefined losses serialize as null with the reason under "undefined".

#ifndef PMCAL_REPORT_HPP_
#define PMCAL_REPORT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pmcal/boost.hpp"
#include "pmcal/core.hpp"
#include "pmcal/error.hpp"
#include "pmcal/pipeline.hpp"
#include "pmcal/version.hpp"

namespace pmcal {

using json = nlohmann::ordered_json;

inline std::string_view bin_kind_name(BinKind k) {
  return k == BinKind::kUniform ? "uniform" : "geometric";
}

inline BinKind parse_bin_kind(std::string_view s) {
  if (s == "uniform") return BinKind::kUniform;
  if (s == "geometric") return BinKind::kGeometric;
  throw ConfigError("unknown bin kind '" + std::string(s) + "'");
}

inline std::string_view mode_name(BoostMode m) {
  return m == BoostMode::kPmc ? "pmc" : "mc";
}

inline BoostMode parse_mode(std::string_view s) {
  if (s == "pmc") return BoostMode::kPmc;
  if (s == "mc") return BoostMode::kMc;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

namespace detail {

inline json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline json to_json(const Category& c) {
  return {{"group_id", c.group_id},   {"bin_index", c.bin_index},
          {"n", c.n},                 {"sum_y", c.sum_y},
          {"sum_r", c.sum_r},         {"ybar", c.ybar},
          {"rbar", c.rbar},           {"joint_mass", c.joint_mass},
          {"cond_mass", c.cond_mass}};
}

inline Category category_from_json(const json& j) {
  Category c;
  c.group_id = j.at("group_id").get<std::size_t>();
  c.bin_index = j.at("bin_index").get<std::size_t>();
  c.n = j.at("n").get<std::size_t>();
  c.sum_y = j.at("sum_y").get<double>();
  c.sum_r = j.at("sum_r").get<double>();
  c.ybar = j.at("ybar").get<double>();
  c.rbar = j.at("rbar").get<double>();
  c.joint_mass = j.at("joint_mass").get<double>();
  c.cond_mass = j.at("cond_mass").get<double>();
  return c;
}

inline json to_json(const AuditParams& p) {
  json j = {{"groups", p.group_attributes},
            {"marginals", p.marginals},
            {"alpha", p.alpha},
            {"lambda", p.lambda},
            {"gamma", p.gamma},
            {"rho", p.rho},
            {"min_group_mass", detail::optional_number(p.min_group_mass)},
            {"bins", bin_kind_name(p.bins)},
            {"exact", p.exact},
            {"seed", p.seed}};
  return j;
}

inline AuditParams audit_params_from_json(const json& j) {
  AuditParams p;
  p.group_attributes = j.at("groups").get<std::vector<std::string>>();
  p.marginals = j.at("marginals").get<bool>();
  p.alpha = j.at("alpha").get<double>();
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.rho = j.at("rho").get<double>();
  p.min_group_mass = detail::read_optional(j.at("min_group_mass"));
  p.bins = parse_bin_kind(j.at("bins").get<std::string>());
  p.exact = j.at("exact").get<bool>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

inline json to_json(const AuditReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["tool_version"] = r.tool_version;
  j["config"] = to_json(r.config);
  j["n"] = r.n;
  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group_id", g.group_id},
                      {"label", g.label},
                      {"n", g.n},
                      {"prevalence", g.prevalence}});
  }
  j["prevalence"] = {{"overall", r.prevalence}, {"groups", groups}};
  json undefined = json::object();
  json witnesses = json::array();
  auto put = [&](const char* key, const LossEntry& e) {
    j[key] = detail::optional_number(e.value);
    if (!e.value) undefined[key] = e.reason;
    if (e.witness) {
      json w = {{"loss", key}, {"considered", e.considered}};
      w["category"] = to_json(*e.witness);
      w["label"] = e.witness->group_id < r.groups.size()
                       ? r.groups[e.witness->group_id].label
                       : std::string();
      if (e.witness_other) w["other"] = to_json(*e.witness_other);
      witnesses.push_back(std::move(w));
    }
  };
  put("mc_loss", r.mc);
  put("pmc_loss", r.pmc);
  put("dc_loss", r.dc);
  j["auroc"] = detail::optional_number(r.auroc);
  j["undefined"] = std::move(undefined);
  j["witnesses"] = std::move(witnesses);
  json cats = json::array();
  for (const auto& c : r.categories) cats.push_back(to_json(c));
  j["categories"] = std::move(cats);
  return j;
}

inline void check_schema_version(const json& j) {
  const std::string v = j.at("schema_version").get<std::string>();
  const std::string ours = kReportSchemaVersion;
  if (v.substr(0, v.find('.')) != ours.substr(0, ours.find('.'))) {
    throw ValidationError("unsupported report schema version " + v);
  }
}

inline AuditReport audit_report_from_json(const json& j) {
  check_schema_version(j);
  AuditReport r;
  r.schema_version = j.at("schema_version").get<std::string>();
  r.tool_version = j.at("tool_version").get<std::string>();
  r.config = audit_params_from_json(j.at("config"));
  r.n = j.at("n").get<std::size_t>();
  r.prevalence = j.at("prevalence").at("overall").get<double>();
  for (const auto& g : j.at("prevalence").at("groups")) {
    r.groups.push_back({g.at("group_id").get<std::size_t>(),
                        g.at("label").get<std::string>(),
                        g.at("n").get<std::size_t>(),
                        g.at("prevalence").get<double>()});
  }
  const json& undefined = j.at("undefined");
  auto get = [&](const char* key, LossEntry& e) {
    e.value = detail::read_optional(j.at(key));
    if (undefined.contains(key)) e.reason = undefined.at(key).get<std::string>();
    for (const auto& w : j.at("witnesses")) {
      if (w.at("loss").get<std::string>() != key) continue;
      e.considered = w.at("considered").get<std::size_t>();
      e.witness = category_from_json(w.at("category"));
      if (w.contains("other")) e.witness_other = category_from_json(w.at("other"));
    }
  };
  get("mc_loss", r.mc);
  get("pmc_loss", r.pmc);
  get("dc_loss", r.dc);
  r.auroc = detail::read_optional(j.at("auroc"));
  for (const auto& c : j.at("categories")) r.categories.push_back(category_from_json(c));
  return r;
}

// Wall time is machine dependent and only written when asked for.
inline json to_json(const UpdateTrace& t, bool with_timing = false) {
  json log = json::array();
  json per_pass = json::array();
  for (const auto& p : t.passes) {
    per_pass.push_back(p.updates.size());
    for (const auto& u : p.updates) {
      log.push_back({{"pass", u.pass},
                     {"group_id", u.group_id},
                     {"bin_index", u.bin_index},
                     {"delta_r", u.delta_r},
                     {"cutoff", u.cutoff},
                     {"n", u.n},
                     {"clamped", u.clamped}});
    }
  }
  json j = {{"passes", t.passes.size()},
            {"updates", t.total_updates},
            {"converged", t.converged},
            {"clamp_events", t.clamp_events},
            {"updates_per_pass", per_pass},
            {"log", log}};
  if (with_timing) j["wall_time_seconds"] = t.wall_time_seconds;
  return j;
}

inline UpdateTrace trace_from_json(const json& j) {
  UpdateTrace t;
  t.converged = j.at("converged").get<bool>();
  t.total_updates = j.at("updates").get<std::size_t>();
  t.clamp_events = j.at("clamp_events").get<std::size_t>();
  const auto per_pass = j.at("updates_per_pass").get<std::vector<std::size_t>>();
  for (std::size_t p = 0; p < per_pass.size(); ++p) {
    t.passes.push_back({p, {}});
  }
  for (const auto& u : j.at("log")) {
    UpdateRecord rec{u.at("pass").get<std::size_t>(),
                     u.at("group_id").get<std::size_t>(),
                     u.at("bin_index").get<std::size_t>(),
                     u.at("delta_r").get<double>(),
                     u.at("cutoff").get<double>(),
                     u.at("n").get<std::size_t>(),
                     u.at("clamped").get<std::size_t>()};
    if (rec.pass >= t.passes.size()) {
      throw ValidationError("trace log references a missing pass");
    }
    t.passes[rec.pass].updates.push_back(rec);
  }
  if (j.contains("wall_time_seconds")) {
    t.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  }
  return t;
}

inline json to_json(const PostprocessParams& p) {
  json j = to_json(p.audit);
  j["mode"] = mode_name(p.mode);
  j["max_passes"] = p.max_passes;
  j["sample_fraction"] = p.sample_fraction;
  j["split"] = detail::optional_number(p.split);
  return j;
}

inline json postprocess_summary(const PostprocessParams& params,
                                const PostprocessResult& res,
                                bool with_timing = false) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kVersion;
  j["config"] = to_json(params);
  j["fit_rows"] = res.fit_rows.size();
  j["eval_rows"] = res.eval_rows.size();
  j["eval_fold"] = params.split ? "held_out" : "fit";
  j["trace"] = to_json(res.trace, with_timing);
  j["before"] = to_json(res.before);
  j["after"] = to_json(res.after);
  return j;
}

}  // namespace pmcal

#endif  // PMCAL_REPORT_HPP_
