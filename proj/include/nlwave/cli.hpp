#pragma once

// Batch front end: resolves a scenario plus overrides, runs one command and
// writes its artifacts into an output directory.
//
//   certify       certificate.json
//   axioms        axioms.json
//   solve         trajectory.csv, iterations.csv
//   converge      convergence.csv
//   manufactured  trajectory.csv, iterations.csv (with the exact solution)
//
// Every run writes manifest.json; every failure also writes error.json.
// Requires nlohmann/json (json.hpp on the include path).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlwave/config.hpp"
#include "nlwave/forms.hpp"
#include "nlwave/kernel.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/nonlocal_solver.hpp"
#include "nlwave/propagator.hpp"
#include "nlwave/scenarios.hpp"

namespace nlwave::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, config_error = 1, certification_failure = 2, nonconvergence = 3 };

struct RunConfig {
  std::string command;               ///< certify | axioms | solve | converge | manufactured
  std::string scenario;              ///< shipped scenario name
  std::string config;                ///< scenario file; takes precedence over `scenario`
  std::optional<int> m;
  std::optional<double> h;
  std::optional<double> tol;
  std::optional<int> intervals;
  std::optional<std::vector<int>> m_list;
  std::string out = "out";
  std::uint64_t seed = 1;
  std::string dump_fs;               ///< binary fundamental-solution dump path (solve, axioms)

  void validate() const {
    static const std::vector<std::string> commands{"certify", "axioms", "solve", "converge", "manufactured"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
      throw ConfigError("unknown command '" + command + "' (expected certify, axioms, solve, converge or manufactured)");
    if (scenario.empty() && config.empty()) throw ConfigError("no scenario given (use --scenario or --config)");
    if (m && (*m < 1 || *m > 512)) throw ConfigError("--m must lie in [1, 512]");
    if (h && !(*h >= 1e-6 && *h <= 1.0)) throw ConfigError("--h must lie in [1e-6, 1]");
    if (tol && !(*tol > 0.0 && std::isfinite(*tol))) throw ConfigError("--tol must be positive");
    if (intervals && (*intervals < 2 || *intervals > 100000)) throw ConfigError("--intervals must lie in [2, 100000]");
    if (m_list)
      for (int k : *m_list)
        if (k < 1 || k > 512) throw ConfigError("--m-list entries must lie in [1, 512]");
    if (out.empty()) throw ConfigError("--out must not be empty");
  }
};

/// Thresholds applied by the axioms command.
struct AxiomThresholds {
  double boundary = 1e-12;
  double second_derivative = 1e-5;
  double composition = 1e-6;
  double adjoint = 1e-6;
  double lipschitz_drift = 0.10;  ///< relative change of M_1, C_1 under grid halving
};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const CoefficientWitness& w) {
  return Json{{"symbol", w.symbol}, {"t", w.t}, {"x", w.x}, {"y", w.y}, {"value", number(w.value)}};
}

inline Json to_json(const FormCertificate& c) {
  Json j;
  j["bound_C"] = number(c.bound_C);
  j["coercivity_alpha"] = number(c.coercivity_alpha);
  j["shift"] = c.shift;
  j["gradient_alpha"] = number(c.gradient_alpha);
  j["alpha_time"] = c.alpha_time;
  j["alpha_witness"] = std::vector<double>(c.alpha_witness.data(), c.alpha_witness.data() + c.alpha_witness.size());
  j["omega_delta"] = c.omega_delta;
  j["omega_value"] = c.omega_value;
  j["dini_integral_1"] = number(c.dini_integral_1);
  j["dini_integral_2"] = number(c.dini_integral_2);
  j["dini_divergence_flag"] = c.dini_divergence_flag;
  j["omega_exponent"] = number(c.omega_exponent);
  j["sample_times"] = c.sample_times;
  Json ranges = Json::array();
  for (const auto& w : c.coefficient_ranges) ranges.push_back(to_json(w));
  j["coefficient_minima"] = ranges;
  j["square_root_property"] = c.square_root_property;
  j["norm_convention"] = c.norm_convention;
  return j;
}

inline Json to_json(const AxiomReport& r) {
  return Json{{"s1_boundary", number(r.s1_boundary)},
              {"s1_velocity", number(r.s1_velocity)},
              {"s1_c_definition", number(r.s1_c_definition)},
              {"s2a", number(r.s2a)},
              {"s2b", number(r.s2b)},
              {"s2c", number(r.s2c)},
              {"s3a", number(r.s3a)},
              {"s3b", number(r.s3b)},
              {"s4", number(r.s4)},
              {"composition", number(r.composition)},
              {"lipschitz_S", number(r.lipschitz_S)},
              {"lipschitz_C", number(r.lipschitz_C)},
              {"sup_S", number(r.sup_S)},
              {"sup_C", number(r.sup_C)},
              {"sup_dS", number(r.sup_dS)},
              {"sup_dC", number(r.sup_dC)},
              {"fd_delta", r.fd_delta},
              {"triples", r.triples}};
}

inline Json to_json(const FixedPointReport& r) {
  Json j;
  j["method"] = r.method;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["predicted_q"] = number(r.predicted_q);
  j["measured_ratio"] = number(r.measured_ratio);
  j["last_ratio"] = number(r.last_ratio);
  j["M1"] = r.M1;
  j["M2"] = r.M2;
  j["M2T"] = r.M2T;
  j["Lg"] = r.Lg;
  j["Lh"] = r.Lh;
  j["L"] = r.L;
  j["T_star"] = r.T_star;
  j["partition"] = r.partition;
  j["residual_equation"] = number(r.residual_equation);
  j["residual_g"] = number(r.residual_g);
  j["residual_h"] = number(r.residual_h);
  j["fixed_point_residual"] = number(r.fixed_point_residual);
  j["ball"] = Json{{"M1", r.M1},     {"M2", r.ball_M2}, {"r1", r.r1},
                   {"r2", r.r2},     {"b_l1", r.b_l1},  {"a", r.growth_a},
                   {"bound", number(r.gronwall_bound)}, {"max_iterate_norm", number(r.max_iterate_norm)},
                   {"inside", r.inside_ball}};
  j["lambda_reached"] = r.lambda_reached;
  Json cands = Json::array();
  for (const auto& c : r.candidates)
    cands.push_back(Json{{"residual", c.residual}, {"sup_norm", c.sup_norm}, {"u0_norm", c.u0_norm}});
  j["candidates"] = cands;
  j["message"] = r.message;
  return j;
}

inline Json parameters(const Scenario& sc) {
  return Json{{"m", sc.disc.m},
              {"h", sc.disc.h},
              {"horizon", sc.horizon()},
              {"intervals", sc.disc.intervals},
              {"axiom_intervals", sc.disc.axiom_intervals},
              {"converge_intervals", sc.disc.converge_intervals},
              {"m_list", sc.disc.m_list},
              {"method", to_string(sc.method)},
              {"tol", sc.solver.tol},
              {"max_iter", sc.solver.max_iter},
              {"q_target", sc.solver.q_target},
              {"theta", sc.solver.theta},
              {"shift", sc.shift}};
}

/// M_1, M_2, M_{2,T}, kernel and nonlinearity constants and the predicted
/// contraction coefficient on [0, T], measured on a given table.
inline Json measured_constants(const SemilinearProblem& p, const FundamentalSolution& fs) {
  const PropagatorNorms norms(fs);
  const auto nodes = fs.grid().nodes();
  const auto c = contraction_coefficient(norms, kernel_sup_profile(p.k1, *p.basis, nodes),
                                         kernel_sup_profile(p.k2, *p.basis, nodes), p.f.lipschitz, fs.grid().step(),
                                         fs.nodes() - 1);
  const auto k1 = kernel_lipschitz(p.k1, *p.basis, p.horizon);
  const auto k2 = kernel_lipschitz(p.k2, *p.basis, p.horizon);
  return Json{{"grid_intervals", fs.nodes() - 1},
              {"M1", c.M1},
              {"M2", c.M2},
              {"M2T", c.M2T},
              {"Lg_into_H", k1.into_h},
              {"Lg_into_V", k1.into_v},
              {"Lh_into_H", k2.into_h},
              {"Lh_into_V", k2.into_v},
              {"L", p.f.lipschitz},
              {"growth_a", p.f.effective_a()},
              {"predicted_q", c.q}};
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// CSV with leading "# key=value" lines carrying the constants of the table.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& meta,
                      const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  for (const auto& [k, v] : meta) s += "# " + k + "=" + v + "\n";
  for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) s += (c ? "," : "") + r[c];
    s += "\n";
  }
  write_text(path, s);
}

inline std::vector<std::pair<std::string, std::string>> csv_meta(const Scenario& sc, const RunConfig& cfg) {
  return {{"scenario", sc.name},       {"command", cfg.command},           {"m", std::to_string(sc.disc.m)},
          {"h", fmt(sc.disc.h)},       {"horizon", fmt(sc.horizon())},     {"intervals", std::to_string(sc.disc.intervals)},
          {"tol", fmt(sc.solver.tol)}, {"method", to_string(sc.method)},   {"seed", std::to_string(cfg.seed)}};
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& u,
                             std::vector<std::pair<std::string, std::string>> meta,
                             const std::function<Vector(double)>& exact = {}) {
  const int m = u.modes();
  std::vector<std::string> header{"t", "u_norm", "v_norm"};
  if (exact) header.push_back("error");
  for (int k = 0; k < m; ++k) header.push_back("u" + std::to_string(k));
  for (int k = 0; k < m; ++k) header.push_back("v" + std::to_string(k));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::vector<std::string> r{fmt(u.time[i]), fmt(u.u[i].norm()), fmt(u.v[i].norm())};
    if (exact) r.push_back(fmt((u.u[i] - exact(u.time[i])).norm()));
    for (int k = 0; k < m; ++k) r.push_back(fmt(u.u[i][k]));
    for (int k = 0; k < m; ++k) r.push_back(fmt(u.v[i][k]));
    rows.push_back(std::move(r));
  }
  write_csv(path, meta, header, rows);
}

inline void write_iterations(const std::filesystem::path& path, const FixedPointReport& rep,
                             std::vector<std::pair<std::string, std::string>> meta) {
  meta.emplace_back("predicted_q", fmt(rep.predicted_q));
  meta.emplace_back("T_star", fmt(rep.T_star));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < rep.updates.size(); ++k) rows.push_back({std::to_string(k + 1), fmt(rep.updates[k])});
  write_csv(path, meta, {"iteration", "update"}, rows);
}

inline Scenario resolve(const RunConfig& cfg) {
  Scenario sc = cfg.config.empty() ? scenario_by_name(cfg.scenario) : load_scenario(cfg.config);
  if (cfg.m) sc.disc.m = *cfg.m;
  if (cfg.h) sc.disc.h = *cfg.h;
  if (cfg.tol) sc.solver.tol = *cfg.tol;
  if (cfg.intervals) sc.disc.intervals = *cfg.intervals;
  if (cfg.m_list) sc.disc.m_list = *cfg.m_list;
  validate(sc);
  return sc;
}

inline FundamentalOptions fs_options(const Scenario& sc) {
  FundamentalOptions o;
  o.h = sc.disc.h;
  return o;
}

/// Thrown by a command to leave with a given status and diagnostic payload.
struct Failure {
  int code;
  std::string kind;
  std::string message;
  Json details;
};

inline Json certify_or_fail(const Scenario& sc, const SpectralBasis& basis) {
  CertifyOptions o;
  o.shift = sc.shift;
  try {
    return to_json(certify(sc.form, basis, o));
  } catch (const CertificationError& e) {
    Json d;
    d["certificate"] = to_json(e.certificate());
    if (e.coefficient_witness()) d["witness"] = to_json(*e.coefficient_witness());
    else
      d["witness"] = Json{{"t", e.certificate().alpha_time},
                          {"vector", std::vector<double>(e.certificate().alpha_witness.data(),
                                                         e.certificate().alpha_witness.data() +
                                                             e.certificate().alpha_witness.size())}};
    throw Failure{certification_failure, "certification", e.what(), d};
  }
}

inline void run_certify(const Scenario& sc, const RunConfig&, const std::filesystem::path& out, Json& manifest) {
  const Instance inst = instantiate(sc, sc.disc.m);
  const Json cert = certify_or_fail(sc, *inst.basis);
  write_json(out / "certificate.json", cert);
  const auto fs = fundamental_solution(inst.problem.op, TimeGrid::on(sc.horizon(), sc.disc.axiom_intervals),
                                       fs_options(sc));
  manifest["constants"] = measured_constants(inst.problem, fs);
  manifest["results"] = Json{{"bound_C", cert["bound_C"]},
                             {"coercivity_alpha", cert["coercivity_alpha"]},
                             {"gradient_alpha", cert["gradient_alpha"]},
                             {"dini_divergence_flag", cert["dini_divergence_flag"]}};
}

inline void run_axioms(const Scenario& sc, const RunConfig& cfg, const std::filesystem::path& out, Json& manifest) {
  const AxiomThresholds th;
  const Instance inst = instantiate(sc, sc.disc.m);
  const auto& op = inst.problem.op;
  const auto fs = fundamental_solution(op, TimeGrid::on(sc.horizon(), sc.disc.axiom_intervals), fs_options(sc));
  const auto fine = fundamental_solution(op, TimeGrid::on(sc.horizon(), 2 * sc.disc.axiom_intervals), fs_options(sc));
  const AxiomReport rep = check_axioms(fs, op);
  const AxiomReport rep2 = check_axioms(fine, op);
  if (!cfg.dump_fs.empty()) dump_fundamental_solution(fs, cfg.dump_fs);
  auto drift = [](double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); };

  Json j;
  j["grid_intervals"] = sc.disc.axiom_intervals;
  j["report"] = to_json(rep);
  j["halved_grid_report"] = to_json(rep2);
  j["lipschitz_drift"] = Json{{"S", drift(rep.lipschitz_S, rep2.lipschitz_S)}, {"C", drift(rep.lipschitz_C, rep2.lipschitz_C)}};
  std::optional<double> adjoint;
  if (op.kind == BlockKind::undamped) adjoint = adjoint_check(fs, op, fs_options(sc));
  j["adjoint_defect"] = adjoint ? Json(*adjoint) : Json(nullptr);
  j["thresholds"] = Json{{"boundary", th.boundary},
                         {"second_derivative", th.second_derivative},
                         {"composition", th.composition},
                         {"adjoint", th.adjoint},
                         {"lipschitz_drift", th.lipschitz_drift}};
  Json checks;
  checks["s1_boundary"] = rep.s1_boundary <= th.boundary;
  checks["s2a"] = rep.s2a < th.second_derivative;
  checks["s2b"] = rep.s2b < th.second_derivative;
  checks["s4"] = rep.s4 < th.composition;
  checks["composition"] = rep.composition < th.composition;
  checks["lipschitz_finite"] = std::isfinite(rep.lipschitz_S) && std::isfinite(rep.lipschitz_C);
  checks["lipschitz_stable"] = drift(rep.lipschitz_S, rep2.lipschitz_S) <= th.lipschitz_drift &&
                               drift(rep.lipschitz_C, rep2.lipschitz_C) <= th.lipschitz_drift;
  if (adjoint) checks["adjoint"] = *adjoint < th.adjoint;
  bool pass = true;
  for (const auto& [k, v] : checks.items()) pass = pass && v.get<bool>();
  j["checks"] = checks;
  j["pass"] = pass;
  write_json(out / "axioms.json", j);
  manifest["constants"] = measured_constants(inst.problem, fs);
  manifest["results"] = Json{{"pass", pass}, {"checks", checks}};
  if (!pass) throw Failure{certification_failure, "axioms", "axiom checks failed", j};
}

struct SolveOutcome {
  Instance inst;
  Trajectory u;
  FixedPointReport rep;
};

inline SolveOutcome solve_scenario(const Scenario& sc, const RunConfig& cfg, const std::filesystem::path& out,
                                   Json& manifest) {
  Instance inst = instantiate(sc, sc.disc.m);
  const Json cert = certify_or_fail(sc, *inst.basis);
  const auto fs = fundamental_solution(inst.problem.op, TimeGrid::on(sc.horizon(), sc.disc.intervals), fs_options(sc));
  if (!cfg.dump_fs.empty()) dump_fundamental_solution(fs, cfg.dump_fs);
  const auto check = verify_nonlinearity(inst.problem.f, sc.disc.m, sc.horizon(), cfg.seed);
  auto [u, rep] = solve_nonlocal(inst.problem, fs, sc.method, sc.solver);
  manifest["constants"] = measured_constants(inst.problem, fs);
  manifest["certificate"] = Json{{"bound_C", cert["bound_C"]}, {"coercivity_alpha", cert["coercivity_alpha"]}};
  manifest["nonlinearity_probe"] = Json{{"probes", check.probes},
                                        {"worst_growth_excess", number(check.worst_growth_excess)},
                                        {"worst_lipschitz_ratio", number(check.worst_lipschitz_ratio)},
                                        {"ok", check.ok}};
  manifest["results"] = to_json(rep);
  auto meta = csv_meta(sc, cfg);
  meta.emplace_back("M1", fmt(rep.M1));
  meta.emplace_back("M2", fmt(rep.M2));
  write_iterations(out / "iterations.csv", rep, meta);
  return {std::move(inst), std::move(u), std::move(rep)};
}

/// A converged solution is certified when the nonlocal data and the equation
/// are met and every iterate stayed in the a-priori ball.
struct SolveThresholds {
  double nonlocal = 1e-6;
  double equation = 1e-4;
};

inline void certify_solution(const FixedPointReport& rep, Json& manifest) {
  const SolveThresholds th;
  if (!rep.converged) {
    Json d = to_json(rep);
    d["updates"] = rep.updates;
    throw Failure{nonconvergence, "nonconvergence", rep.message.empty() ? "fixed-point iteration did not converge" : rep.message, d};
  }
  const bool certified = rep.residual_g < th.nonlocal && rep.residual_h < th.nonlocal &&
                         rep.residual_equation < th.equation && rep.inside_ball;
  manifest["certified"] = certified;
  manifest["certification_thresholds"] = Json{{"nonlocal", th.nonlocal}, {"equation", th.equation}};
  if (!certified) throw Failure{certification_failure, "solution_certificate", "converged solution failed its certificate", to_json(rep)};
}

inline void run_solve(const Scenario& sc, const RunConfig& cfg, const std::filesystem::path& out, Json& manifest) {
  auto res = solve_scenario(sc, cfg, out, manifest);
  auto meta = csv_meta(sc, cfg);
  meta.emplace_back("M1", fmt(res.rep.M1));
  meta.emplace_back("M2", fmt(res.rep.M2));
  meta.emplace_back("predicted_q", fmt(res.rep.predicted_q));
  meta.emplace_back("residual_equation", fmt(res.rep.residual_equation));
  write_trajectory(out / "trajectory.csv", res.u, meta);
  certify_solution(res.rep, manifest);
}

inline void run_manufactured(const Scenario& sc, const RunConfig& cfg, const std::filesystem::path& out,
                             Json& manifest) {
  if (!sc.manufactured) throw ConfigError("manufactured: the scenario has no [manufactured] section");
  auto res = solve_scenario(sc, cfg, out, manifest);
  double err = 0.0, err_v = 0.0;
  for (std::size_t i = 0; i < res.u.size(); ++i) {
    err = std::max(err, (res.u.u[i] - res.inst.exact_u(res.u.time[i])).norm());
    err_v = std::max(err_v, (res.u.v[i] - res.inst.exact_v(res.u.time[i])).norm());
  }
  manifest["manufactured"] = Json{{"u_star", sc.manufactured->u_star.source},
                                  {"projection_defect", res.inst.projection_defect},
                                  {"sup_error_u", err},
                                  {"sup_error_v", err_v}};
  auto meta = csv_meta(sc, cfg);
  meta.emplace_back("u_star", sc.manufactured->u_star.source);
  meta.emplace_back("projection_defect", fmt(res.inst.projection_defect));
  meta.emplace_back("sup_error_u", fmt(err));
  write_trajectory(out / "trajectory.csv", res.u, meta, res.inst.exact_u);
  certify_solution(res.rep, manifest);
}

inline void run_converge(const Scenario& sc, const RunConfig& cfg, const std::filesystem::path& out, Json& manifest) {
  RefinementSettings rs;
  rs.horizon = sc.horizon();
  rs.intervals = sc.disc.converge_intervals;
  rs.fs_options = fs_options(sc);
  rs.solver = sc.solver;
  rs.method = sc.method;
  rs.seed = cfg.seed;
  const auto rows = galerkin_refine([&sc](int m) { return instantiate(sc, m).problem; }, sc.disc.m_list, rs);
  auto meta = csv_meta(sc, cfg);
  meta.emplace_back("converge_intervals", std::to_string(rs.intervals));
  meta.emplace_back("action_samples", std::to_string(rs.action_samples));
  meta.emplace_back("norm", "L2(0,T;H)");
  std::vector<std::vector<std::string>> table;
  Json jrows = Json::array();
  bool all = true;
  for (const auto& r : rows) {
    table.push_back({std::to_string(r.m), r.converged ? "1" : "0", std::to_string(r.iterations), fmt(r.diff_to_previous),
                     fmt(r.diff_to_finest), fmt(r.action_diff), fmt(r.residual_equation)});
    jrows.push_back(Json{{"m", r.m},
                         {"converged", r.converged},
                         {"iterations", r.iterations},
                         {"diff_to_previous", number(r.diff_to_previous)},
                         {"diff_to_finest", number(r.diff_to_finest)},
                         {"action_diff", number(r.action_diff)},
                         {"residual_equation", number(r.residual_equation)},
                         {"message", r.message}});
    all = all && r.converged;
  }
  write_csv(out / "convergence.csv", meta,
            {"m", "converged", "iterations", "diff_to_previous", "diff_to_finest", "action_diff", "residual_equation"},
            table);
  manifest["results"] = Json{{"rows", jrows}};
  if (!all) throw Failure{nonconvergence, "nonconvergence", "at least one refinement level did not converge", jrows};
}

}  // namespace detail

/// Runs one command; returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  namespace fs = std::filesystem;
  const fs::path out = cfg.out.empty() ? fs::path("out") : fs::path(cfg.out);
  Json manifest;
  manifest["program"] = "nlwave";
  manifest["command"] = cfg.command;
  manifest["source"] = cfg.config.empty() ? cfg.scenario : cfg.config;
  manifest["seed"] = cfg.seed;

  auto fail = [&](int code, const std::string& kind, const std::string& message, const Json& details) {
    Json e{{"command", cfg.command}, {"exit_code", code}, {"kind", kind}, {"message", message}};
    if (!details.is_null()) e["details"] = details;
    manifest["status"] = kind;
    manifest["exit_code"] = code;
    try {
      fs::create_directories(out);
      detail::write_json(out / "error.json", e);
      detail::write_json(out / "manifest.json", manifest);
    } catch (const std::exception& x) {
      log << "nlwave: cannot write diagnostics: " << x.what() << "\n";
    }
    log << "nlwave: " << kind << ": " << message << "\n";
    return code;
  };

  try {
    cfg.validate();
    const Scenario sc = detail::resolve(cfg);
    manifest["scenario"] = sc.name;
    manifest["parameters"] = parameters(sc);
    manifest["scenario_config"] = serialize(sc);
    fs::create_directories(out);
    if (cfg.command == "certify") detail::run_certify(sc, cfg, out, manifest);
    else if (cfg.command == "axioms") detail::run_axioms(sc, cfg, out, manifest);
    else if (cfg.command == "solve") detail::run_solve(sc, cfg, out, manifest);
    else if (cfg.command == "converge") detail::run_converge(sc, cfg, out, manifest);
    else detail::run_manufactured(sc, cfg, out, manifest);
    manifest["status"] = "ok";
    manifest["exit_code"] = 0;
    detail::write_json(out / "manifest.json", manifest);
    return ok;
  } catch (const detail::Failure& f) {
    return fail(f.code, f.kind, f.message, f.details);
  } catch (const CertificationError& e) {
    return fail(certification_failure, "certification", e.what(), nullptr);
  } catch (const ConfigError& e) {
    return fail(config_error, "configuration", e.what(), nullptr);
  } catch (const fs::filesystem_error& e) {
    return fail(config_error, "configuration", e.what(), nullptr);
  } catch (const Error& e) {
    return fail(nonconvergence, "numerical", e.what(), nullptr);
  }
}

}  // namespace nlwave::cli
