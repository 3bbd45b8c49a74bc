#pragma once

// Ready-made problem descriptions, manufactured solutions, and their
// configuration-file form.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/config.hpp"
#include "nlwave/expression.hpp"
#include "nlwave/forms.hpp"
#include "nlwave/kernel.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/nonlocal_solver.hpp"
#include "nlwave/propagator.hpp"
#include "nlwave/spectral_space.hpp"

namespace nlwave {

struct NonlinearitySpec {
  Profile profile = Profile::zero;
  double scale = 1.0;
  NonlinearityKind kind = NonlinearityKind::lipschitz;
};

struct ManufacturedSpec {
  NamedExpression u_star{"0"};
  bool allow_outside_span = false;
};

struct Discretization {
  int m = 16;
  double h = 1e-3;             ///< RK4 step
  int intervals = 200;         ///< fundamental-solution / trajectory grid on [0, T]
  int axiom_intervals = 20;    ///< grid for the axiom checks
  int converge_intervals = 100;
  std::vector<int> m_list{4, 8, 16, 32};
};

struct Scenario {
  std::string name = "custom";
  SpatialDomain domain = SpatialDomain::interval(std::numbers::pi);
  FormSpec form;
  double shift = 0.0;  ///< coercivity shift reported by certify
  NonlinearitySpec nonlinearity;
  NonlocalKernel kernel1;
  NonlocalKernel kernel2;
  Discretization disc;
  SolverMethod method = SolverMethod::contraction;
  SolverSettings solver;
  std::optional<ManufacturedSpec> manufactured;

  double horizon() const { return form.horizon; }
};

/// Undamped Neumann problem on (0, pi):
///   u_tt - ((1 + t/2) u_x)_x + u = tanh(u),
///   u(0) = int kappa u ds + 1 + cos(x)/2,  u_t(0) = int kappa u ds + cos(x)/4,  kappa = 1/(2T).
inline Scenario scenario_undamped_neumann() {
  Scenario s;
  s.name = "undamped_neumann";
  s.domain = SpatialDomain::interval(std::numbers::pi);
  s.form.horizon = 1.0;
  s.form.gradient_coef = {"a", "1 + t/2", 1.0, 1.5};
  s.form.zeroth_coef = {"c", "1", 1.0, 1.0};
  s.nonlinearity = {Profile::tanh, 1.0, NonlinearityKind::sublinear_growth};
  s.kernel1 = {"0.5", NamedExpression("0.25 + 0.25*cos(x)")};
  s.kernel2 = {"0.5", NamedExpression("0.1*cos(x)")};
  s.disc.m = 16;
  s.disc.h = 1e-3;
  s.method = SolverMethod::relaxed;
  return s;
}

/// Damped population model on (0, pi):
///   0.5 u_t + u_tt - ((1 + 0.1 sin t) u_x)_x + 0.2 u = u / (1 + u^2),
///   u(0) = int e^{-s}/T u ds + (1 + cos x)/2,  u_t(0) = int e^{-s}/T u ds.
inline Scenario scenario_population() {
  Scenario s;
  s.name = "population";
  s.domain = SpatialDomain::interval(std::numbers::pi);
  s.form.horizon = 1.0;
  s.form.gradient_coef = {"d", "1 + 0.1*sin(t)", 0.9, 1.1};
  s.form.zeroth_coef = {"mu", "0.2", 0.0, 0.2};
  s.form.damping_coef = CoefficientField{"sigma", "0.5", 0.0, 0.5};
  s.nonlinearity = {Profile::logistic, 1.0, NonlinearityKind::lipschitz};
  s.kernel1 = {"exp(-s)", NamedExpression("0.5 + 0.5*cos(x)")};
  s.kernel2 = {"exp(-s)", std::nullopt};
  s.disc.m = 16;
  s.disc.h = 1e-3;
  s.method = SolverMethod::contraction;
  return s;
}

inline std::vector<std::string> scenario_names() { return {"undamped_neumann", "population"}; }

inline Scenario scenario_by_name(const std::string& name) {
  if (name == "undamped_neumann") return scenario_undamped_neumann();
  if (name == "population") return scenario_population();
  throw ConfigError("unknown scenario '" + name + "' (expected undamped_neumann or population)");
}

/// The skeleton with its exact solution set to u_star. The forcing and the
/// kernel offsets are derived when the scenario is instantiated.
inline Scenario manufactured(const NamedExpression& u_star, Scenario skeleton, bool allow_outside_span = false) {
  skeleton.manufactured = ManufacturedSpec{u_star, allow_outside_span};
  skeleton.name += "+manufactured";
  return skeleton;
}

/// A scenario bound to a mode count.
struct Instance {
  std::shared_ptr<const SpectralBasis> basis;
  SemilinearProblem problem;
  double projection_defect = 0.0;  ///< manufactured only: sup_t ||u* - P u*||_H (quadrature)
  std::function<Vector(double)> exact_u;  ///< manufactured only: P u*(t)
  std::function<Vector(double)> exact_v;  ///< manufactured only: P u*_t(t)
};

namespace detail {

/// Samples of u'' + sigma u' - div(a grad u) + c u for a closed-form u at the quadrature nodes.
inline Vector strong_form(const Scenario& sc, const SpectralBasis& basis, const Expression& u, double t) {
  const Expression ut = u.derivative(Variable::t);
  const Expression utt = ut.derivative(Variable::t);
  const Expression ux = u.derivative(Variable::x), uy = u.derivative(Variable::y);
  const Expression uxx = ux.derivative(Variable::x), uyy = uy.derivative(Variable::y);
  const Expression& a = sc.form.gradient_coef.evaluator.expr;
  const Expression ax = a.derivative(Variable::x), ay = a.derivative(Variable::y);
  const bool rect = sc.domain.kind == SpatialDomain::Kind::rectangle;
  Vector out(static_cast<Eigen::Index>(basis.node_count()));
  for (std::size_t q = 0; q < basis.node_count(); ++q) {
    const double x = basis.nodes()[q][0], y = basis.nodes()[q][1];
    double div = ax(t, x, y) * ux(t, x, y) + a(t, x, y) * uxx(t, x, y);
    if (rect) div += ay(t, x, y) * uy(t, x, y) + a(t, x, y) * uyy(t, x, y);
    double r = utt(t, x, y) - div + sc.form.zeroth_coef(t, x, y) * u(t, x, y);
    if (sc.form.damping_coef) r += (*sc.form.damping_coef)(t, x, y) * ut(t, x, y);
    out[static_cast<Eigen::Index>(q)] = r;
  }
  return out;
}

/// int_0^T P[kappa(s) * Phi w(s)] ds by Gauss-Legendre in s.
inline Vector kernel_action(const NonlocalKernel& k, const SpectralBasis& basis, double T,
                            const std::function<Vector(double)>& w) {
  const auto rule = gauss_legendre(64, 0.0, T);
  Vector acc = Vector::Zero(basis.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = rule.nodes[i];
    const Vector vals = basis.values() * w(s);
    const Vector kv = sample(basis, [&](double x, double y) { return k.kappa(s, x, y); });
    acc += rule.weights[i] * project_samples(basis, kv.cwiseProduct(vals));
  }
  return acc;
}

}  // namespace detail

inline Instance instantiate(const Scenario& sc, int m) {
  if (m < 1 || m > 512) throw ConfigError("mode count must lie in [1, 512]");
  sc.form.validate();
  Instance inst;
  auto basis = std::make_shared<const SpectralBasis>(sc.domain, m);
  inst.basis = basis;
  auto& p = inst.problem;
  p.basis = basis;
  p.op = make_block_operator(sc.form, *basis);
  p.f = pointwise_nonlinearity(sc.nonlinearity.profile, *basis, sc.nonlinearity.scale, sc.nonlinearity.kind);
  p.k1 = sc.kernel1;
  p.k2 = sc.kernel2;
  p.horizon = sc.horizon();
  if (!sc.manufactured) return inst;

  const Expression u = sc.manufactured->u_star.expr;
  const Expression ut = u.derivative(Variable::t);
  const double T = sc.horizon();
  auto proj = [basis](const Expression& e, double t) {
    return project(*basis, [&](double x, double y) { return e(t, x, y); });
  };
  for (int k = 0; k <= 10; ++k) {
    const double t = T * k / 10.0;
    const Vector s = sample(*basis, [&](double x, double y) { return u(t, x, y); });
    const Vector back = basis->values() * project_samples(*basis, s);
    const double defect = std::sqrt((s - back).cwiseAbs2().dot(basis->weights()));
    inst.projection_defect = std::max(inst.projection_defect, defect);
  }
  if (inst.projection_defect > 1e-10 && !sc.manufactured->allow_outside_span)
    throw ConfigError("manufactured solution is outside the span of the first " + std::to_string(m) +
                      " modes (projection defect " + std::to_string(inst.projection_defect) + ")");

  inst.exact_u = [proj, u](double t) { return proj(u, t); };
  inst.exact_v = [proj, ut](double t) { return proj(ut, t); };
  const auto base = p.f;
  const Scenario scc = sc;
  auto forcing = [scc, basis, u, base, proj](double t) -> Vector {
    Vector f = project_samples(*basis, detail::strong_form(scc, *basis, u, t));
    f -= base(t, proj(u, t));
    return f;
  };
  p.f = with_forcing(base, forcing);
  p.offset1 = inst.exact_u(0.0) - detail::kernel_action(sc.kernel1, *basis, T, inst.exact_u);
  p.offset2 = inst.exact_v(0.0) - detail::kernel_action(sc.kernel2, *basis, T, inst.exact_u);
  return inst;
}

// Configuration-file form.

inline IniDocument to_ini(const Scenario& sc) {
  IniDocument d;
  auto num = IniDocument::format_number;
  d.set("scenario", "name", sc.name);
  d.set("scenario", "horizon", num(sc.form.horizon));
  d.set("domain", "kind", sc.domain.kind == SpatialDomain::Kind::interval ? "interval" : "rectangle");
  d.set("domain", "length_x", num(sc.domain.length_x));
  if (sc.domain.kind == SpatialDomain::Kind::rectangle) d.set("domain", "length_y", num(sc.domain.length_y));
  d.set("domain", "quadrature_order", std::to_string(sc.domain.quadrature_order));
  auto field = [&](const std::string& key, const CoefficientField& f) {
    d.set("form", key, f.evaluator.source);
    d.set("form", key + "_symbol", f.symbol);
    d.set("form", key + "_lower", num(f.lower_bound));
    if (std::isfinite(f.upper_bound)) d.set("form", key + "_upper", num(f.upper_bound));
  };
  field("gradient", sc.form.gradient_coef);
  field("zeroth", sc.form.zeroth_coef);
  if (sc.form.damping_coef) field("damping", *sc.form.damping_coef);
  d.set("form", "shift", num(sc.shift));
  d.set("nonlinearity", "profile", to_string(sc.nonlinearity.profile));
  d.set("nonlinearity", "scale", num(sc.nonlinearity.scale));
  d.set("nonlinearity", "kind", to_string(sc.nonlinearity.kind));
  auto kernel = [&](const std::string& sec, const NonlocalKernel& k) {
    d.set(sec, "kappa", k.kappa.source);
    if (k.offset) d.set(sec, "offset", k.offset->source);
  };
  kernel("kernel1", sc.kernel1);
  kernel("kernel2", sc.kernel2);
  d.set("discretization", "m", std::to_string(sc.disc.m));
  d.set("discretization", "h", num(sc.disc.h));
  d.set("discretization", "intervals", std::to_string(sc.disc.intervals));
  d.set("discretization", "axiom_intervals", std::to_string(sc.disc.axiom_intervals));
  d.set("discretization", "converge_intervals", std::to_string(sc.disc.converge_intervals));
  std::string ml;
  for (std::size_t i = 0; i < sc.disc.m_list.size(); ++i) ml += (i ? "," : "") + std::to_string(sc.disc.m_list[i]);
  d.set("discretization", "m_list", ml);
  d.set("solver", "method", to_string(sc.method));
  d.set("solver", "tol", num(sc.solver.tol));
  d.set("solver", "max_iter", std::to_string(sc.solver.max_iter));
  d.set("solver", "q_target", num(sc.solver.q_target));
  if (sc.solver.subinterval) d.set("solver", "subinterval", num(*sc.solver.subinterval));
  d.set("solver", "theta", num(sc.solver.theta));
  d.set("solver", "lambda_step", num(sc.solver.lambda_step));
  if (sc.manufactured) {
    d.set("manufactured", "u_star", sc.manufactured->u_star.source);
    d.set("manufactured", "allow_outside_span", sc.manufactured->allow_outside_span ? "true" : "false");
  }
  return d;
}

inline std::string serialize(const Scenario& sc) { return to_ini(sc).serialize(); }

inline void validate(const Scenario& sc) {
  sc.domain.validate();
  sc.form.validate();
  if (sc.disc.m < 1 || sc.disc.m > 512) throw ConfigError("discretization.m must lie in [1, 512]");
  if (!(sc.disc.h >= 1e-6)) throw ConfigError("discretization.h must be at least 1e-6");
  if (sc.disc.intervals < 2) throw ConfigError("discretization.intervals must be at least 2");
  if (sc.disc.axiom_intervals < 3) throw ConfigError("discretization.axiom_intervals must be at least 3");
  if (sc.disc.converge_intervals < 2) throw ConfigError("discretization.converge_intervals must be at least 2");
  for (int m : sc.disc.m_list)
    if (m < 1 || m > 512) throw ConfigError("discretization.m_list entries must lie in [1, 512]");
  if (!(sc.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (sc.solver.max_iter < 1) throw ConfigError("solver.max_iter must be positive");
  if (!(sc.solver.theta > 0.0 && sc.solver.theta <= 1.0)) throw ConfigError("solver.theta must lie in (0, 1]");
}

/// Reads a scenario. A [scenario] base key starts from a shipped scenario and
/// the remaining keys override it.
inline Scenario from_ini(const IniDocument& d) {
  d.reject_unknown_sections(
      {"scenario", "domain", "form", "nonlinearity", "kernel1", "kernel2", "discretization", "solver", "manufactured"});
  d.reject_unknown("scenario", {"name", "base", "horizon"});
  d.reject_unknown("domain", {"kind", "length_x", "length_y", "quadrature_order"});
  d.reject_unknown("form", {"gradient", "gradient_symbol", "gradient_lower", "gradient_upper", "zeroth", "zeroth_symbol",
                            "zeroth_lower", "zeroth_upper", "damping", "damping_symbol", "damping_lower",
                            "damping_upper", "shift"});
  d.reject_unknown("nonlinearity", {"profile", "scale", "kind"});
  d.reject_unknown("kernel1", {"kappa", "offset"});
  d.reject_unknown("kernel2", {"kappa", "offset"});
  d.reject_unknown("discretization", {"m", "h", "intervals", "axiom_intervals", "converge_intervals", "m_list"});
  d.reject_unknown("solver", {"method", "tol", "max_iter", "q_target", "subinterval", "theta", "lambda_step"});
  d.reject_unknown("manufactured", {"u_star", "allow_outside_span"});

  Scenario sc = d.has("scenario", "base") ? scenario_by_name(d.get("scenario", "base")) : Scenario{};
  sc.name = d.get_or("scenario", "name", sc.name);
  sc.form.horizon = d.number_or("scenario", "horizon", sc.form.horizon);

  if (d.has_section("domain")) {
    const std::string kind = d.get_or("domain", "kind", "interval");
    if (kind != "interval" && kind != "rectangle") throw ConfigError("domain.kind must be interval or rectangle");
    sc.domain.kind = kind == "interval" ? SpatialDomain::Kind::interval : SpatialDomain::Kind::rectangle;
    sc.domain.length_x = d.number_or("domain", "length_x", sc.domain.length_x);
    sc.domain.length_y = sc.domain.kind == SpatialDomain::Kind::rectangle
                             ? d.number_or("domain", "length_y", std::numbers::pi)
                             : 0.0;
    sc.domain.quadrature_order = d.integer_or("domain", "quadrature_order", sc.domain.quadrature_order);
  }
  auto field = [&](const std::string& key, CoefficientField& f) {
    try {
      if (d.has("form", key)) f.evaluator = NamedExpression(d.get("form", key));
    } catch (const ParseError& e) {
      throw ConfigError("form." + key + ": " + e.what());
    }
    f.symbol = d.get_or("form", key + "_symbol", f.symbol);
    f.lower_bound = d.number_or("form", key + "_lower", f.lower_bound);
    f.upper_bound = d.number_or("form", key + "_upper", f.upper_bound);
  };
  field("gradient", sc.form.gradient_coef);
  field("zeroth", sc.form.zeroth_coef);
  if (d.has("form", "damping")) {
    if (!sc.form.damping_coef) sc.form.damping_coef = CoefficientField{"sigma", "0", 0.0};
    field("damping", *sc.form.damping_coef);
  }
  sc.shift = d.number_or("form", "shift", sc.shift);

  if (d.has("nonlinearity", "profile")) sc.nonlinearity.profile = parse_profile(d.get("nonlinearity", "profile"));
  sc.nonlinearity.scale = d.number_or("nonlinearity", "scale", sc.nonlinearity.scale);
  if (d.has("nonlinearity", "kind")) {
    const auto& k = d.get("nonlinearity", "kind");
    if (k == "lipschitz") sc.nonlinearity.kind = NonlinearityKind::lipschitz;
    else if (k == "sublinear_growth" || k == "growth") sc.nonlinearity.kind = NonlinearityKind::sublinear_growth;
    else throw ConfigError("nonlinearity.kind must be lipschitz or sublinear_growth");
  }
  auto kernel = [&](const std::string& sec, NonlocalKernel& k) {
    try {
      if (d.has(sec, "kappa")) k.kappa = NamedExpression(d.get(sec, "kappa"));
      if (d.has(sec, "offset")) k.offset = NamedExpression(d.get(sec, "offset"));
    } catch (const ParseError& e) {
      throw ConfigError(sec + ": " + e.what());
    }
  };
  kernel("kernel1", sc.kernel1);
  kernel("kernel2", sc.kernel2);

  sc.disc.m = d.integer_or("discretization", "m", sc.disc.m);
  sc.disc.h = d.number_or("discretization", "h", sc.disc.h);
  sc.disc.intervals = d.integer_or("discretization", "intervals", sc.disc.intervals);
  sc.disc.axiom_intervals = d.integer_or("discretization", "axiom_intervals", sc.disc.axiom_intervals);
  sc.disc.converge_intervals = d.integer_or("discretization", "converge_intervals", sc.disc.converge_intervals);
  if (d.has("discretization", "m_list")) sc.disc.m_list = d.integer_list("discretization", "m_list");

  if (d.has("solver", "method")) sc.method = parse_method(d.get("solver", "method"));
  sc.solver.tol = d.number_or("solver", "tol", sc.solver.tol);
  sc.solver.max_iter = d.integer_or("solver", "max_iter", sc.solver.max_iter);
  sc.solver.q_target = d.number_or("solver", "q_target", sc.solver.q_target);
  if (d.has("solver", "subinterval")) sc.solver.subinterval = d.number("solver", "subinterval");
  sc.solver.theta = d.number_or("solver", "theta", sc.solver.theta);
  sc.solver.lambda_step = d.number_or("solver", "lambda_step", sc.solver.lambda_step);

  if (d.has_section("manufactured")) {
    try {
      sc.manufactured = ManufacturedSpec{NamedExpression(d.get("manufactured", "u_star")),
                                         d.boolean_or("manufactured", "allow_outside_span", false)};
    } catch (const ParseError& e) {
      throw ConfigError(std::string("manufactured.u_star: ") + e.what());
    }
  }
  validate(sc);
  return sc;
}

inline Scenario parse_scenario(const std::string& text) { return from_ini(IniDocument::parse(text)); }
inline Scenario load_scenario(const std::string& path) { return from_ini(IniDocument::load(path)); }

}  // namespace nlwave
