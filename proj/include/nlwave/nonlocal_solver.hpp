#pragma once

// Semilinear problems with nonlocal initial conditions
//   u'' + B(t)u' + A(t)u = f(t, u),  u(0) = g(u),  u'(0) = h(u)
// solved by fixed-point iteration of the variation-of-constants map
//   P(w)(t) = E_uu(t,0) g(w) + E_uv(t,0) h(w) + int_0^t E_uv(t,s) f(s, w(s)) ds
// on the trajectory space C([0,T]; H_m) with the sup norm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlwave/kernel.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/propagator.hpp"
#include "nlwave/voc_solver.hpp"

namespace nlwave {

struct SemilinearProblem {
  std::shared_ptr<const SpectralBasis> basis;
  BlockOperator op;
  Nonlinearity f;
  NonlocalKernel k1;                 ///< u(0) = g(u)
  NonlocalKernel k2;                 ///< u'(0) = h(u)
  std::optional<Vector> offset1;     ///< coefficient-space offset overriding k1.offset
  std::optional<Vector> offset2;
  double horizon = 1.0;

  int modes() const { return op.m; }
};

struct SolverSettings {
  double tol = 1e-8;        ///< absolute sup-norm update (or fixed-point residual) tolerance
  int max_iter = 200;
  double q_target = 0.9;    ///< subinterval coefficient target when the global one is >= 1
  std::optional<double> subinterval;  ///< force a subinterval length (contraction only)
  double theta = 1.0;       ///< relaxation weight
  double lambda_step = 0.1;
  double min_lambda_step = 1e-3;
  int stall_window = 25;
};

struct FixedPointCandidate {
  double residual = 0.0;  ///< sup ||w - T(w)||
  double sup_norm = 0.0;
  double u0_norm = 0.0;
};

struct FixedPointReport {
  std::string method;
  bool converged = false;
  int iterations = 0;
  std::vector<double> updates;      ///< sup-norm update (contraction) or fixed-point residual (relaxed)
  double predicted_q = std::numeric_limits<double>::quiet_NaN();
  double measured_ratio = 0.0;      ///< max ratio of successive updates after the first 3 iterations
  double last_ratio = 0.0;
  double M1 = 0.0;                  ///< sup_t ||E_uu(t,0)||
  double M2 = 0.0;                  ///< sup_t ||E_uv(t,0)||
  double M2T = 0.0;                 ///< sup_t int_0^t ||E_uv(t,s)|| ds
  double Lg = 0.0, Lh = 0.0, L = 0.0;
  double T_star = 0.0;
  std::vector<double> partition;
  double residual_equation = 0.0;
  double residual_g = 0.0;          ///< ||u(0) - g(u)||_H
  double residual_h = 0.0;          ///< ||u'(0) - h(u)||_H
  double fixed_point_residual = 0.0;
  // A-priori ball (M1 r1 + M2 r2 + M2 ||b||_L1) exp(M2 a T) with M2 = sup over all pairs.
  double ball_M2 = 0.0;
  double r1 = 0.0, r2 = 0.0, b_l1 = 0.0, growth_a = 0.0;
  double gronwall_bound = 0.0;
  double max_iterate_norm = 0.0;
  bool inside_ball = true;
  double lambda_reached = 0.0;
  std::vector<FixedPointCandidate> candidates;
  std::string message;
};

/// Block-norm tables of a fundamental solution used by the a-priori estimates.
class PropagatorNorms {
 public:
  explicit PropagatorNorms(const FundamentalSolution& fs) : n_(fs.nodes()), step_(fs.grid().step()) {
    uu_.resize(n_ * (n_ + 1) / 2);
    uv_.resize(uu_.size());
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        uu_[idx(i, j)] = op_norm(fs.C(i, j));
        uv_[idx(i, j)] = op_norm(fs.S(i, j));
      }
  }

  double uu(std::size_t i, std::size_t j) const { return uu_[idx(i, j)]; }
  double uv(std::size_t i, std::size_t j) const { return uv_[idx(i, j)]; }

  /// sup over starts a and a <= i <= a + len of ||E_uu(i,a)||.
  double sup_uu(std::size_t start, std::size_t len) const { return window_sup(uu_, start, len); }
  double sup_uv(std::size_t start, std::size_t len) const { return window_sup(uv_, start, len); }
  /// sup over a <= i <= a + len of int_{t_a}^{t_i} ||E_uv(t_i, s)|| ds.
  double sup_uv_integral(std::size_t start, std::size_t len) const {
    double best = 0.0;
    for (std::size_t i = start + 1; i <= std::min(n_ - 1, start + len); ++i) {
      const auto w = composite_weights(start, i, step_);
      double acc = 0.0;
      for (std::size_t j = start; j <= i; ++j) acc += w[j - start] * uv(i, j);
      best = std::max(best, acc);
    }
    return best;
  }
  double sup_uv_all() const { return *std::max_element(uv_.begin(), uv_.end()); }
  std::size_t nodes() const { return n_; }

 private:
  std::size_t idx(std::size_t i, std::size_t j) const { return i * (i + 1) / 2 + j; }
  double window_sup(const std::vector<double>& t, std::size_t start, std::size_t len) const {
    double best = 0.0;
    for (std::size_t i = start; i <= std::min(n_ - 1, start + len); ++i) best = std::max(best, t[idx(i, start)]);
    return best;
  }

  std::size_t n_;
  double step_;
  std::vector<double> uu_, uv_;
};

/// Grönwall-type bound (M1 r1 + M2 r2 + M2 ||b||_L1) exp(M2 a T).
inline double gronwall_bound(double M1, double M2, double r1, double r2, double b_l1, double a, double T) {
  return (M1 * r1 + M2 * r2 + M2 * b_l1) * std::exp(M2 * a * T);
}

/// The variation-of-constants fixed-point map of a semilinear problem bound to
/// a fundamental solution table.
class FixedPointMap {
 public:
  FixedPointMap(const SemilinearProblem& p, const FundamentalSolution& fs) : p_(&p), fs_(&fs) {
    if (!p.basis) throw InputError("SemilinearProblem: missing basis");
    if (fs.modes() != p.modes()) throw InputError("fixed point: fundamental solution dimension does not match");
    if (fs.kind() != p.op.kind) throw InputError("fixed point: fundamental solution kind does not match");
    const double T = fs.grid().end();
    if (std::abs(T - p.horizon) > 1e-9 * std::max(1.0, p.horizon) || std::abs(fs.grid().start()) > 1e-12)
      throw ConfigError("fixed point: fundamental solution grid must cover [0, T]");
    g_ = DiscreteKernel(p.k1, *p.basis, fs.grid());
    h_ = DiscreteKernel(p.k2, *p.basis, fs.grid());
    if (p.offset1) g_.set_offset(*p.offset1);
    if (p.offset2) h_.set_offset(*p.offset2);
  }

  const FundamentalSolution& fs() const { return *fs_; }
  std::size_t nodes() const { return fs_->nodes(); }
  int modes() const { return fs_->modes(); }

  Vector g(const Trajectory& w) const { return g_(w); }
  Vector h(const Trajectory& w) const { return h_(w); }

  /// f(t_i, w_i) for i in [first, last]; zeros elsewhere (full fs length).
  std::vector<Vector> forcing(const Trajectory& w, std::size_t first = 0,
                              std::size_t last = static_cast<std::size_t>(-1)) const {
    last = std::min(last, nodes() - 1);
    std::vector<Vector> f(nodes(), Vector::Zero(modes()));
    for (std::size_t i = first; i <= last; ++i) f[i] = p_->f(w.time[i], w.u[i]);
    return f;
  }

  /// lambda * P(w).
  Trajectory apply(const Trajectory& w, double lambda = 1.0) const {
    Trajectory out = represent(*fs_, g(w), h(w), forcing(w));
    if (lambda != 1.0)
      for (std::size_t i = 0; i < out.size(); ++i) {
        out.u[i] *= lambda;
        out.v[i] *= lambda;
      }
    return out;
  }

  Trajectory zero() const { return Trajectory::zeros(fs_->grid().nodes(), modes()); }

 private:
  const SemilinearProblem* p_;
  const FundamentalSolution* fs_;
  DiscreteKernel g_, h_;
};

namespace detail {

inline double sup_update(const Trajectory& a, const Trajectory& b) { return sup_distance(a, b); }

inline void finish_report(FixedPointReport& rep, const SemilinearProblem& p, const FixedPointMap& map,
                          const Trajectory& u) {
  const auto f = map.forcing(u);
  const auto res = residual(u, p.op, f, map.g(u), map.h(u));
  rep.residual_equation = res.equation;
  rep.residual_g = res.initial_u;
  rep.residual_h = res.initial_v;
  rep.fixed_point_residual = sup_distance(u, map.apply(u));
  for (std::size_t k = 3; k < rep.updates.size(); ++k) {
    if (rep.updates[k - 1] <= 1e-12) continue;
    rep.measured_ratio = std::max(rep.measured_ratio, rep.updates[k] / rep.updates[k - 1]);
  }
  const std::size_t n = rep.updates.size();
  if (n >= 2 && rep.updates[n - 2] > 0.0) rep.last_ratio = rep.updates[n - 1] / rep.updates[n - 2];
}

inline void ball_setup(FixedPointReport& rep, const SemilinearProblem& p, const FundamentalSolution& fs,
                       const PropagatorNorms& norms) {
  rep.ball_M2 = norms.sup_uv_all();
  rep.growth_a = p.f.effective_a();
  const auto w = composite_weights(0, fs.nodes() - 1, fs.grid().step());
  rep.b_l1 = 0.0;
  for (std::size_t i = 0; i < fs.nodes(); ++i) rep.b_l1 += w[i] * p.f.b(fs.grid()[i]);
}

inline void ball_track(FixedPointReport& rep, const FixedPointMap& map, const Trajectory& w) {
  rep.r1 = std::max(rep.r1, map.g(w).norm());
  rep.r2 = std::max(rep.r2, map.h(w).norm());
}

inline void ball_finish(FixedPointReport& rep, double T, const std::vector<double>& iterate_norms) {
  rep.gronwall_bound = gronwall_bound(rep.M1, rep.ball_M2, rep.r1, rep.r2, rep.b_l1, rep.growth_a, T);
  rep.max_iterate_norm = iterate_norms.empty() ? 0.0 : *std::max_element(iterate_norms.begin(), iterate_norms.end());
  rep.inside_ball = rep.max_iterate_norm <= rep.gronwall_bound * (1.0 + 1e-9) + 1e-9;
}

}  // namespace detail

/// Coefficient (M1 Lg + M2 Lh) tau^{1/2} + L M2T for windows of `len` grid
/// steps (sup over all window starts), with Lg, Lh the into-V kernel constants
/// restricted to the window.
struct ContractionCoefficient {
  double q = 0.0, M1 = 0.0, M2 = 0.0, M2T = 0.0, Lg = 0.0, Lh = 0.0;
};

inline ContractionCoefficient contraction_coefficient(const PropagatorNorms& norms, const KernelSupProfile& k1,
                                                      const KernelSupProfile& k2, double L, double step,
                                                      std::size_t len) {
  ContractionCoefficient c;
  const std::size_t n = norms.nodes();
  len = std::min(len, n - 1);
  auto windowed = [&](const KernelSupProfile& k, std::size_t a) {
    const auto w = composite_weights(a, a + len, step);
    double acc = 0.0;
    for (std::size_t j = a; j <= a + len; ++j)
      acc += w[j - a] * (k.value[j] * k.value[j] + k.gradient[j] * k.gradient[j]);
    return std::sqrt(acc);
  };
  for (std::size_t a = 0; a + len < n; ++a) {
    c.M1 = std::max(c.M1, norms.sup_uu(a, len));
    c.M2 = std::max(c.M2, norms.sup_uv(a, len));
    c.M2T = std::max(c.M2T, norms.sup_uv_integral(a, len));
    c.Lg = std::max(c.Lg, windowed(k1, a));
    c.Lh = std::max(c.Lh, windowed(k2, a));
  }
  c.q = (c.M1 * c.Lg + c.M2 * c.Lh) * std::sqrt(len * step) + L * c.M2T;
  return c;
}

/// Banach iteration of P from w0 = 0. When the predicted coefficient is >= 1
/// the horizon is split into subintervals of length T* with q(T*) <= q_target:
/// for fixed nonlocal data (g(w), h(w)) the local problems are solved by
/// contraction and concatenated forward, and the data are updated until the
/// sup-norm update falls below tol.
inline std::pair<Trajectory, FixedPointReport> contraction_solve(const SemilinearProblem& p,
                                                                 const FundamentalSolution& fs,
                                                                 const SolverSettings& cfg = {}) {
  if (p.f.kind != NonlinearityKind::lipschitz)
    throw ConfigError("contraction_solve: requires a Lipschitz nonlinearity");
  FixedPointMap map(p, fs);
  FixedPointReport rep;
  rep.method = "contraction";
  const std::size_t n = fs.nodes();
  const double step = fs.grid().step();
  const double T = fs.grid().end();
  const PropagatorNorms norms(fs);
  const auto nodes = fs.grid().nodes();
  const auto prof1 = kernel_sup_profile(p.k1, *p.basis, nodes);
  const auto prof2 = kernel_sup_profile(p.k2, *p.basis, nodes);
  rep.L = p.f.lipschitz;

  const auto global = contraction_coefficient(norms, prof1, prof2, rep.L, step, n - 1);
  rep.predicted_q = global.q;
  rep.M1 = global.M1;
  rep.M2 = global.M2;
  rep.M2T = global.M2T;
  rep.Lg = global.Lg;
  rep.Lh = global.Lh;
  detail::ball_setup(rep, p, fs, norms);

  std::size_t len = n - 1;
  if (cfg.subinterval) {
    len = static_cast<std::size_t>(std::floor(*cfg.subinterval / step + 1e-9));
    if (len < 1) throw ConfigError("contraction_solve: subinterval shorter than one grid step");
    len = std::min(len, n - 1);
  } else if (global.q >= 1.0) {
    len = 0;
    for (std::size_t l = 1; l < n; ++l) {
      if (contraction_coefficient(norms, prof1, prof2, rep.L, step, l).q > cfg.q_target) break;
      len = l;
    }
    if (len == 0) {
      rep.message = "no admissible subinterval: q exceeds the target already on one grid step";
      len = 1;
    }
  }
  rep.T_star = len * step;
  std::vector<std::size_t> cuts{0};
  while (cuts.back() < n - 1) cuts.push_back(std::min(n - 1, cuts.back() + len));
  for (auto c : cuts) rep.partition.push_back(fs.grid()[c]);

  std::vector<double> iterate_norms;
  Trajectory w = map.zero();
  bool converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Trajectory next;
    detail::ball_track(rep, map, w);
    if (cuts.size() == 2) {
      next = map.apply(w);
    } else {
      // Forward concatenation of local Banach solves for fixed data. The local
      // solves only need to be accurate relative to the current outer update.
      const double local_tol = std::max(0.1 * cfg.tol, rep.updates.empty() ? 0.0 : 1e-3 * rep.updates.back());
      next = w;
      Vector u0 = map.g(w), u1 = map.h(w);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const std::size_t a = cuts[k], b = cuts[k + 1];
        const Vector ua = k == 0 ? u0 : Vector(next.u[a]);
        const Vector va = k == 0 ? u1 : Vector(next.v[a]);
        for (int local = 0; local < cfg.max_iter; ++local) {
          const Trajectory piece = represent(fs, ua, va, map.forcing(next, a, b), a, b);
          double upd = 0.0;
          for (std::size_t i = a; i <= b; ++i) {
            upd = std::max(upd, (piece.u[i - a] - next.u[i]).norm());
            next.u[i] = piece.u[i - a];
            next.v[i] = piece.v[i - a];
          }
          double piece_norm = 0.0;
          for (const auto& x : piece.u) piece_norm = std::max(piece_norm, x.norm());
          iterate_norms.push_back(piece_norm);
          if (upd < local_tol) break;
        }
      }
    }
    if (!std::isfinite(sup_norm(next))) {
      rep.message = "iteration produced non-finite values";
      break;
    }
    const double upd = detail::sup_update(next, w);
    rep.updates.push_back(upd);
    iterate_norms.push_back(sup_norm(next));
    w = std::move(next);
    rep.iterations = it;
    if (upd < cfg.tol) {
      converged = true;
      break;
    }
  }
  detail::ball_track(rep, map, w);
  rep.converged = converged;
  rep.lambda_reached = 1.0;
  if (!converged && rep.message.empty())
    rep.message = "no convergence after " + std::to_string(rep.iterations) + " iterations (predicted q = " +
                  std::to_string(rep.predicted_q) + ")";
  detail::finish_report(rep, p, map, w);
  if (converged) rep.candidates.push_back({rep.fixed_point_residual, sup_norm(w), w.u.front().norm()});
  detail::ball_finish(rep, T, iterate_norms);
  return {std::move(w), std::move(rep)};
}

/// Relaxed iteration w <- (1 - theta) w + theta T(w) from w = 0; on
/// stagnation, continuation in lambda for w = lambda T(w), warm-started from
/// the previous lambda. Success means sup ||w - T(w)|| < tol.
inline std::pair<Trajectory, FixedPointReport> relaxed_solve(const SemilinearProblem& p,
                                                             const FundamentalSolution& fs,
                                                             const SolverSettings& cfg = {}) {
  if (p.op.kind != BlockKind::undamped) throw InputError("relaxed_solve: requires an undamped problem");
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw ConfigError("relaxed_solve: theta must lie in (0, 1]");
  FixedPointMap map(p, fs);
  FixedPointReport rep;
  rep.method = "relaxed";
  const double T = fs.grid().end();
  const PropagatorNorms norms(fs);
  rep.M1 = norms.sup_uu(0, fs.nodes() - 1);
  rep.M2 = norms.sup_uv(0, fs.nodes() - 1);
  rep.M2T = norms.sup_uv_integral(0, fs.nodes() - 1);
  rep.Lg = kernel_lipschitz(p.k1, *p.basis, T).into_v;
  rep.Lh = kernel_lipschitz(p.k2, *p.basis, T).into_v;
  rep.L = p.f.kind == NonlinearityKind::lipschitz ? p.f.lipschitz : 0.0;
  rep.predicted_q = (rep.M1 * rep.Lg + rep.M2 * rep.Lh) * std::sqrt(T) + rep.L * rep.M2T;
  detail::ball_setup(rep, p, fs, norms);
  std::vector<double> iterate_norms{0.0};

  auto add_candidate = [&](const Trajectory& w, double res) {
    for (const auto& c : rep.candidates)
      if (std::abs(c.sup_norm - sup_norm(w)) < 10.0 * cfg.tol && std::abs(c.u0_norm - w.u.front().norm()) < 10.0 * cfg.tol)
        return;
    rep.candidates.push_back({res, sup_norm(w), w.u.front().norm()});
  };

  // Damped iteration for w = lambda T(w). Returns true on success.
  auto iterate = [&](Trajectory& w, double lambda, int budget) {
    std::vector<double> hist;
    for (int it = 0; it < budget; ++it) {
      detail::ball_track(rep, map, w);
      const Trajectory tw = map.apply(w, lambda);
      const double res = sup_distance(w, tw);
      if (!std::isfinite(res)) return false;
      rep.updates.push_back(res);
      hist.push_back(res);
      ++rep.iterations;
      if (res < cfg.tol) {
        if (lambda == 1.0) add_candidate(w, res);
        return true;
      }
      if (hist.size() > static_cast<std::size_t>(cfg.stall_window) &&
          res > 0.5 * hist[hist.size() - 1 - cfg.stall_window])
        return false;
      for (std::size_t i = 0; i < w.size(); ++i) {
        w.u[i] = (1.0 - cfg.theta) * w.u[i] + cfg.theta * tw.u[i];
        w.v[i] = (1.0 - cfg.theta) * w.v[i] + cfg.theta * tw.v[i];
      }
      iterate_norms.push_back(sup_norm(w));
    }
    return false;
  };

  Trajectory w = map.zero();
  bool ok = iterate(w, 1.0, cfg.max_iter);
  rep.lambda_reached = ok ? 1.0 : 0.0;
  if (!ok) {
    rep.message = "direct iteration stalled; continuation in lambda";
    Trajectory base = map.zero();  // the lambda = 0 fixed point
    double lambda = 0.0, dl = cfg.lambda_step;
    while (lambda < 1.0) {
      const double target = std::min(1.0, lambda + dl);
      Trajectory trial = base;
      if (iterate(trial, target, cfg.max_iter)) {
        base = std::move(trial);
        lambda = target;
      } else {
        dl *= 0.5;
        if (dl < cfg.min_lambda_step) break;
      }
    }
    rep.lambda_reached = lambda;
    ok = lambda >= 1.0;
    w = std::move(base);
    if (!ok) rep.message = "continuation stalled at lambda = " + std::to_string(lambda);
  }
  detail::ball_track(rep, map, w);
  rep.converged = ok;
  detail::finish_report(rep, p, map, w);
  detail::ball_finish(rep, T, iterate_norms);
  return {std::move(w), std::move(rep)};
}

enum class SolverMethod { contraction, relaxed };

inline SolverMethod parse_method(const std::string& s) {
  if (s == "contraction") return SolverMethod::contraction;
  if (s == "relaxed") return SolverMethod::relaxed;
  throw ConfigError("unknown solver method '" + s + "' (expected contraction or relaxed)");
}

inline const char* to_string(SolverMethod m) { return m == SolverMethod::contraction ? "contraction" : "relaxed"; }

inline std::pair<Trajectory, FixedPointReport> solve_nonlocal(const SemilinearProblem& p,
                                                              const FundamentalSolution& fs, SolverMethod method,
                                                              const SolverSettings& cfg = {}) {
  return method == SolverMethod::contraction ? contraction_solve(p, fs, cfg) : relaxed_solve(p, fs, cfg);
}

struct RefinementSettings {
  double horizon = 1.0;
  int intervals = 100;
  FundamentalOptions fs_options;
  SolverSettings solver;
  SolverMethod method = SolverMethod::contraction;
  std::uint64_t seed = 1;
  int action_samples = 5;
};

struct RefinementRow {
  int m = 0;
  bool converged = false;
  int iterations = 0;
  double diff_to_previous = std::numeric_limits<double>::quiet_NaN();  ///< L^2(0,T;H)
  double diff_to_finest = 0.0;                                         ///< L^2(0,T;H)
  double action_diff = 0.0;  ///< max over y and (t,s) of ||S_m P_m y - S_M y||
  double residual_equation = 0.0;
  std::string message;
};

/// Solves at each mode count and compares against the previous and the
/// finest level. Levels that fail are marked and the sweep continues.
inline std::vector<RefinementRow> galerkin_refine(const std::function<SemilinearProblem(int)>& build,
                                                  const std::vector<int>& m_list, const RefinementSettings& cfg) {
  if (m_list.size() < 2) throw ConfigError("galerkin_refine: need at least two mode counts");
  for (std::size_t k = 1; k < m_list.size(); ++k)
    if (m_list[k] < m_list[k - 1]) throw ConfigError("galerkin_refine: mode counts must be increasing");
  const int M = m_list.back();
  const TimeGrid grid = TimeGrid::on(cfg.horizon, cfg.intervals);

  // Smooth random test data in the finest space: N(0,1) / (1 + lambda_k).
  std::vector<Vector> ys;
  {
    const auto finest = build(M);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    for (int s = 0; s < cfg.action_samples; ++s) {
      Vector y(M);
      for (int k = 0; k < M; ++k) y[k] = normal(rng) / (1.0 + finest.basis->eigenvalue(k));
      ys.push_back(y / y.norm());
    }
  }

  std::vector<RefinementRow> rows;
  std::vector<std::optional<Trajectory>> sols;
  std::vector<std::vector<Vector>> actions;  // per level: S_m(i,j) P_m y for all pairs and samples
  for (int m : m_list) {
    RefinementRow row;
    row.m = m;
    std::vector<Vector> act;
    try {
      const SemilinearProblem p = build(m);
      const FundamentalSolution fs = fundamental_solution(p.op, grid, cfg.fs_options);
      for (const auto& y : ys) {
        const Vector py = y.head(m);
        for (std::size_t i = 0; i < fs.nodes(); ++i)
          for (std::size_t j = 0; j <= i; ++j) act.push_back(fs.S(i, j) * py);
      }
      auto [u, rep] = solve_nonlocal(p, fs, cfg.method, cfg.solver);
      row.converged = rep.converged;
      row.iterations = rep.iterations;
      row.residual_equation = rep.residual_equation;
      row.message = rep.message;
      sols.emplace_back(std::move(u));
    } catch (const Error& e) {
      row.message = e.what();
      sols.emplace_back(std::nullopt);
    }
    actions.push_back(std::move(act));
    rows.push_back(row);
  }

  const auto& finest_u = sols.back();
  const auto& finest_a = actions.back();
  auto padded_diff = [](const Vector& a, const Vector& b) {
    const auto c = std::min(a.size(), b.size());
    double sq = (a.head(c) - b.head(c)).squaredNorm();
    if (a.size() > c) sq += a.tail(a.size() - c).squaredNorm();
    if (b.size() > c) sq += b.tail(b.size() - c).squaredNorm();
    return std::sqrt(sq);
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto& row = rows[k];
    if (!sols[k]) {
      row.diff_to_finest = nan;
      row.action_diff = nan;
      continue;
    }
    if (k > 0) row.diff_to_previous = sols[k - 1] ? l2_distance(*sols[k], *sols[k - 1]) : nan;
    row.diff_to_finest = finest_u ? l2_distance(*sols[k], *finest_u) : nan;
    if (finest_a.size() == actions[k].size() && !finest_a.empty()) {
      double worst = 0.0;
      for (std::size_t q = 0; q < finest_a.size(); ++q) worst = std::max(worst, padded_diff(actions[k][q], finest_a[q]));
      row.action_diff = worst;
    } else {
      row.action_diff = nan;
    }
  }
  return rows;
}

}  // namespace nlwave
