#pragma once

// Suite dispatch behind the command-line tool. run() maps a RunConfig to
// module checks and returns the process exit status:
// 0 all checks pass, 1 a check failed, 2 usage or precondition error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hemi/models.hpp"
#include "hemi/report.hpp"
#include "hemi/verify.hpp"

namespace hemi {

enum class ExitStatus : int { pass = 0, check_failure = 1, usage = 2 };

struct RunConfig {
  std::string verb = "verify";  // verify | spectrum | chain | probe | report
  std::string suite = "all";    // cgb4 | cgb6 | f2 | spectrum | chain | identities | probe | all
  std::optional<std::string> model;
  int dim = 0;  // 0: 6 for cgb6, 4 otherwise
  Resolution resolution;
  std::uint64_t seed = 1;
  int probe_basis = 6;
  int probe_iterations = 500;
  std::string format = "json";
  std::string out;    // empty: stdout
  std::string input;  // report verb
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"cgb4",       "cgb6",  "f2",  "spectrum", "chain",
                                              "identities", "probe", "all"};
  return names;
}

/// Throws PreconditionError on an inconsistent configuration; returns the
/// effective dimension.
inline int validate_config(const RunConfig& c) {
  if (std::find(suite_names().begin(), suite_names().end(), c.suite) == suite_names().end())
    throw PreconditionError("unknown suite '" + c.suite + "'");
  if (c.dim != 0 && c.dim != 4 && c.dim != 6) throw PreconditionError("--dim must be 4 or 6");
  if (c.resolution.refine < 1 || c.resolution.refine > 3)
    throw PreconditionError("--refine must be 1, 2 or 3");
  if (c.format != "json" && c.format != "csv") throw PreconditionError("--format must be json or csv");
  if (c.resolution.mesh < 16) throw PreconditionError("--mesh must be at least 16");
  if (!(c.resolution.fd_step > 0.0) || c.resolution.fd_step > 0.05)
    throw PreconditionError("--fd-step must lie in (0, 0.05]");
  if (c.resolution.radial < 4 || c.resolution.angular < 4)
    throw PreconditionError("--radial and --angular must be at least 4");
  const int dim = c.dim != 0 ? c.dim : (c.suite == "cgb6" ? 6 : 4);
  if (c.suite == "cgb6" && dim != 6) throw PreconditionError("suite cgb6 needs --dim 6");
  if (dim == 6 && c.suite != "cgb6" && c.suite != "identities" && c.suite != "all")
    throw PreconditionError("suite " + c.suite + " runs in dimension 4 only");
  return dim;
}

namespace detail {

template <class V>
void append(std::vector<CheckReport>& out, V&& more) {
  for (auto& r : more) out.push_back(std::move(r));
}

inline std::vector<std::string> default_cgb4_models() {
  return {"hemisphere", "flat", "cap(0.6)", "radial_bump(1,0.2)", "radial_bump(2,0.2)",
          "radial_bump(3,0.2)"};
}

template <int N>
std::vector<CheckReport> run_identities(const RunConfig& c) {
  std::vector<CheckReport> out;
  const auto pointwise = model<N>(c.model.value_or("generic_bump(5,0.3)"));
  for (const auto& id : pointwise_identities<N>())
    out.push_back(pointwise_identity_check<N>(id, pointwise, c.resolution, c.seed));
  const auto integrated = model<N>(c.model.value_or("radial_bump(11,0.15)"));
  if (N == 4 || integrated.rotationally_symmetric)
    out.push_back(tr_e3_identity_check<N>(integrated, c.resolution));
  return out;
}

inline std::vector<CheckReport> run_dim4(const RunConfig& c, const std::string& suite) {
  constexpr int N = 4;
  const Resolution& res = c.resolution;
  std::vector<CheckReport> out;
  if (suite == "cgb4") {
    if (c.model) {
      out.push_back(cgb4_check<N>(model<N>(*c.model), res));
    } else {
      for (const auto& name : default_cgb4_models()) out.push_back(cgb4_check<N>(model<N>(name), res));
      append(out, flat_boundary_checks<N>(res));
    }
  } else if (suite == "f2") {
    if (c.model) {
      out.push_back(f2_check<N>(model<N>(*c.model), res));
    } else {
      out.push_back(f2_check<N>(hemisphere_model<N>(), res));
      out.push_back(f2_check<N>(flat_model<N>(), res));
      out.push_back(f2_invariance_check<N>(res, 10, c.seed));
    }
  } else if (suite == "spectrum") {
    const std::vector<std::string> names =
        c.model ? std::vector<std::string>{*c.model} : std::vector<std::string>{"hemisphere", "flat"};
    for (const auto& name : names) {
      const auto m = model<N>(name);
      append(out, spectrum_checks<N>(m, res));
      out.push_back(gap_check<N>(m, res));
    }
    if (!c.model) append(out, gap_sweep_checks<N>(res));
  } else if (suite == "chain") {
    append(out, chain_checks<N>(res));
    out.push_back(yamabe_check<N>(hemisphere_model<N>(), res));
  } else if (suite == "identities") {
    append(out, run_identities<N>(c));
  } else if (suite == "probe") {
    out.push_back(rigidity_probe_check<N>(c.probe_basis, c.probe_iterations, c.seed, res));
  }
  return out;
}

inline std::vector<CheckReport> run_dim6(const RunConfig& c, const std::string& suite) {
  constexpr int N = 6;
  const Resolution& res = c.resolution;
  std::vector<CheckReport> out;
  if (suite == "cgb6") {
    const std::vector<std::string> names =
        c.model ? std::vector<std::string>{*c.model}
                : std::vector<std::string>{"hemisphere", "geodesic_bump(4,0.2)"};
    for (const auto& name : names) {
      const auto m = model<N>(name);
      out.push_back(cgb6_check<N>(m, res));
      out.push_back(cgb6_gradient_check<N>(m, res));
    }
    if (!c.model) {
      append(out, constant_scalar_checks<N>(hemisphere_model<N>(), res));
      out.push_back(yamabe_check<N>(hemisphere_model<N>(), res));
    }
  } else if (suite == "identities") {
    append(out, run_identities<N>(c));
  }
  return out;
}

}  // namespace detail

/// Runs the configured suites and returns the sorted checks.
inline Report run_checks(const RunConfig& c) {
  const int dim = validate_config(c);
  Report report;
  report.started_at = utc_timestamp();
  char buf[32];
  report.config = {{"verb", c.verb},
                   {"suite", c.suite},
                   {"model", c.model.value_or("")},
                   {"dim", std::to_string(dim)},
                   {"radial", std::to_string(c.resolution.radial)},
                   {"angular", std::to_string(c.resolution.angular)}};
  std::snprintf(buf, sizeof buf, "%.17g", c.resolution.fd_step);
  report.config.emplace_back("fd_step", buf);
  report.config.emplace_back("mesh", std::to_string(c.resolution.mesh));
  report.config.emplace_back("refine", std::to_string(c.resolution.refine));
  report.config.emplace_back("seed", std::to_string(c.seed));

  std::vector<std::string> suites;
  if (c.suite == "all")
    suites = dim == 6 ? std::vector<std::string>{"cgb6", "identities"}
                      : std::vector<std::string>{"cgb4", "f2", "spectrum", "chain", "identities", "probe"};
  else
    suites = {c.suite};
  for (const auto& s : suites)
    detail::append(report.checks, dim == 6 ? detail::run_dim6(c, s) : detail::run_dim4(c, s));
  report.sort_checks();
  return report;
}

/// Re-asserts every check of a JSON report from its computed, target,
/// tolerance and relation fields. Returns failing ids; throws on malformed input.
inline std::vector<std::string> recheck_report(const std::string& text, std::ostream& log) {
  const auto doc = nlohmann::json::parse(text);
  if (!doc.contains("checks") || !doc["checks"].is_array())
    throw PreconditionError("report has no checks array");
  std::vector<std::string> failing;
  for (const auto& c : doc["checks"]) {
    CheckReport r;
    r.id = c.at("id").get<std::string>();
    auto num = [&](const char* key) {
      return c.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN() : c.at(key).get<double>();
    };
    r.computed = num("computed");
    r.target = c.at("target").is_null() ? -std::numeric_limits<double>::infinity() : num("target");
    r.abs_tol = num("abs_tol");
    r.rel_tol = num("rel_tol");
    const std::string rel = c.at("relation").get<std::string>();
    r.relation = rel == "le" ? Relation::le : rel == "ge" ? Relation::ge : rel == "gt" ? Relation::gt : Relation::eq;
    if (!c.at("min_order").is_null()) r.min_order = c.at("min_order").get<double>();
    if (!c.at("order_estimate").is_null()) r.order_estimate = c.at("order_estimate").get<double>();
    r.finalize();
    const bool stored = c.at("pass").get<bool>();
    log << (r.pass ? "PASS " : "FAIL ") << r.id;
    if (stored != r.pass) log << "  (stored pass flag disagrees)";
    log << "\n";
    if (!r.pass || stored != r.pass) failing.push_back(r.id);
  }
  return failing;
}

inline void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw PreconditionError("cannot write '" + path + "'");
  f << text;
}

/// Executes a configuration; diagnostics go to `err`.
inline int run(const RunConfig& c, std::ostream& err = std::cerr) {
  try {
    if (c.verb == "report") {
      std::ifstream f(c.input);
      if (!f) throw PreconditionError("cannot read report '" + c.input + "'");
      std::stringstream text;
      text << f.rdbuf();
      const auto failing = recheck_report(text.str(), err);
      return failing.empty() ? static_cast<int>(ExitStatus::pass)
                             : static_cast<int>(ExitStatus::check_failure);
    }
    const Report report = run_checks(c);
    write_output(c.format == "csv" ? to_csv(report) : to_json(report), c.out);
    for (const auto& r : report.checks)
      if (!r.pass) err << "FAIL " << r.id << "\n";
    return report.all_pass() ? static_cast<int>(ExitStatus::pass)
                             : static_cast<int>(ExitStatus::check_failure);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::usage);
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed report: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::usage);
  }
}

}  // namespace hemi
