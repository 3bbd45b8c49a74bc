#pragma once

// Linear inhomogeneous solves
//   u'' + B(t) u' + A(t) u = f(t),  u(0) = u0,  u'(0) = u1
// through the variation-of-constants representation on a fundamental
// solution table, a direct RK4 oracle, and a discrete equation residual.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nlwave/propagator.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/spectral_space.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

template <class Scalar>
struct BasicLinearProblem {
  using Vec = VectorT<Scalar>;

  BasicBlockOperator<Scalar> op;
  Vec u0;
  Vec u1;
  std::function<Vec(double)> forcing;  ///< empty means f = 0
  double horizon = 1.0;

  Vec f(double t) const {
    if (!forcing) return Vec::Zero(op.m);
    Vec v = forcing(t);
    if (v.size() != op.m) throw InputError("LinearProblem: forcing has wrong dimension");
    if (!v.allFinite()) throw InputError("LinearProblem: forcing not finite at t = " + std::to_string(t));
    return v;
  }

  void validate() const {
    if (op.m < 1) throw InputError("LinearProblem: empty operator");
    if (u0.size() != op.m || u1.size() != op.m) throw InputError("LinearProblem: initial data dimension mismatch");
    if (!(horizon > 0.0)) throw ConfigError("LinearProblem: horizon must be positive");
  }
};

using LinearProblem = BasicLinearProblem<double>;

/// Variation-of-constants representation on the fs grid, starting at node
/// `start` with data (u0, u1) and forcing samples f_j at every fs node
/// (empty = no forcing):
///   u(t_i) = E_uu(i,s) u0 + E_uv(i,s) u1 + sum_j w_j E_uv(i,j) f_j
///   u'(t_i) = E_vu(i,s) u0 + E_vv(i,s) u1 + sum_j w_j E_vv(i,j) f_j
/// with composite Simpson weights on [t_s, t_i]. On the first interval after
/// t_s the integrand is instead interpolated quadratically through s = t_s,
/// t_{s+1}, t_{s+2}, using the backward map E(t_{s+1}, t_{s+2}). Returns nodes
/// start..end (or start..stop when stop is given).
template <class Scalar>
BasicTrajectory<Scalar> represent(const BasicFundamentalSolution<Scalar>& fs, const VectorT<Scalar>& u0,
                                  const VectorT<Scalar>& u1, const std::vector<VectorT<Scalar>>& f,
                                  std::size_t start = 0, std::size_t stop = static_cast<std::size_t>(-1)) {
  const std::size_t n = fs.nodes();
  const int m = fs.modes();
  if (stop == static_cast<std::size_t>(-1)) stop = n - 1;
  if (start > stop || stop >= n) throw InputError("represent: node range outside the grid");
  if (u0.size() != m || u1.size() != m) throw InputError("represent: initial data dimension mismatch");
  if (!f.empty() && f.size() != n) throw InputError("represent: forcing samples must cover the fs grid");
  const double dt = fs.grid().step();
  BasicTrajectory<Scalar> tr;
  for (std::size_t i = start; i <= stop; ++i) {
    VectorT<Scalar> u = fs.C(i, start) * u0 + fs.S(i, start) * u1;
    VectorT<Scalar> v = fs.dC(i, start) * u0 + fs.dS(i, start) * u1;
    if (!f.empty() && i == start + 1 && stop >= start + 2 && fs.prepared()) {
      // int_0^dt q(s) ds = dt (5 q_0 + 8 q_1 - q_2) / 12 for the quadratic through 0, dt, 2 dt.
      const auto& back = fs.backward(i);
      u.noalias() += (5.0 * dt / 12.0) * (fs.S(i, start) * f[start]);
      v.noalias() += (5.0 * dt / 12.0) * (fs.dS(i, start) * f[start]);
      v += (8.0 * dt / 12.0) * f[i];
      u.noalias() -= (dt / 12.0) * (back.topRightCorner(m, m) * f[i + 1]);
      v.noalias() -= (dt / 12.0) * (back.bottomRightCorner(m, m) * f[i + 1]);
    } else if (!f.empty() && i > start) {
      const auto w = composite_weights(start, i, dt);
      for (std::size_t j = start; j < i; ++j) {
        u.noalias() += w[j - start] * (fs.S(i, j) * f[j]);
        v.noalias() += w[j - start] * (fs.dS(i, j) * f[j]);
      }
      v += w[i - start] * f[i];  // E_uv(t,t) = 0, E_vv(t,t) = I
    }
    tr.time.push_back(fs.grid()[i]);
    tr.u.push_back(std::move(u));
    tr.v.push_back(std::move(v));
  }
  return tr;
}

namespace detail {

template <class Scalar>
std::vector<std::size_t> output_indices(const BasicFundamentalSolution<Scalar>& fs, const std::vector<double>& grid) {
  std::vector<std::size_t> idx;
  for (double t : grid) {
    const long k = fs.grid().index_of(t);
    if (k < 0)
      throw ConfigError("solve: output node t = " + std::to_string(t) +
                        " is not a node of the fundamental-solution grid (fs grid must refine the output grid)");
    idx.push_back(static_cast<std::size_t>(k));
  }
  return idx;
}

template <class Scalar>
BasicTrajectory<Scalar> solve_on(const BasicLinearProblem<Scalar>& p, const BasicFundamentalSolution<Scalar>& fs,
                                 const std::vector<double>& grid) {
  p.validate();
  if (fs.modes() != p.op.m) throw InputError("solve: fundamental solution dimension does not match the problem");
  const auto idx = output_indices(fs, grid);
  std::vector<VectorT<Scalar>> f;
  if (p.forcing) {
    f.reserve(fs.nodes());
    for (std::size_t j = 0; j < fs.nodes(); ++j) f.push_back(p.f(fs.grid()[j]));
  }
  const std::size_t last = idx.empty() ? 0 : *std::max_element(idx.begin(), idx.end());
  const auto full = represent(fs, p.u0, p.u1, f, 0, last);
  BasicTrajectory<Scalar> out;
  for (std::size_t k : idx) {
    out.time.push_back(full.time[k]);
    out.u.push_back(full.u[k]);
    out.v.push_back(full.v[k]);
  }
  return out;
}

}  // namespace detail

/// u(t) = C(t,0)u0 + S(t,0)u1 + int_0^t S(t,s) f(s) ds on the output grid.
template <class Scalar>
BasicTrajectory<Scalar> solve_undamped(const BasicLinearProblem<Scalar>& p, const BasicFundamentalSolution<Scalar>& fs,
                                       const std::vector<double>& grid) {
  if (fs.kind() != BlockKind::undamped || p.op.kind != BlockKind::undamped)
    throw InputError("solve_undamped: requires an undamped problem and fundamental solution");
  return detail::solve_on(p, fs, grid);
}

/// u(t) = v1(t,0)u0 + v2(t,0)u1 + int_0^t v2(t,s) f(s) ds on the output grid.
template <class Scalar>
BasicTrajectory<Scalar> solve_damped(const BasicLinearProblem<Scalar>& p, const BasicFundamentalSolution<Scalar>& fs,
                                     const std::vector<double>& grid) {
  if (fs.kind() != BlockKind::damped || p.op.kind != BlockKind::damped)
    throw InputError("solve_damped: requires a damped problem and fundamental solution");
  return detail::solve_on(p, fs, grid);
}

/// Direct RK4 integration of the inhomogeneous block system, reported at the
/// nodes of `grid` (steps of at most h inside each grid interval).
template <class Scalar>
BasicTrajectory<Scalar> direct_integrate(const BasicLinearProblem<Scalar>& p, double h, const TimeGrid& grid) {
  p.validate();
  if (!(h > 0.0)) throw ConfigError("direct_integrate: step must be positive");
  const int m = p.op.m;
  VectorT<Scalar> U(2 * m);
  U.head(m) = p.u0;
  U.tail(m) = p.u1;
  BasicTrajectory<Scalar> tr;
  tr.time.push_back(grid[0]);
  tr.u.push_back(U.head(m));
  tr.v.push_back(U.tail(m));
  std::function<VectorT<Scalar>(double)> f;
  if (p.forcing) f = [&p](double t) { return p.f(t); };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    U = propagate(p.op, grid[i], grid[i + 1], U, h, f);
    tr.time.push_back(grid[i + 1]);
    tr.u.push_back(U.head(m));
    tr.v.push_back(U.tail(m));
  }
  return tr;
}

struct ResidualReport {
  double equation = 0.0;   ///< discrete L^2(0,T;H) norm of u'' + B u' + A u - f
  double initial_u = 0.0;  ///< ||u(0) - u0||_H
  double initial_v = 0.0;  ///< ||u'(0) - u1||_H
};

/// Residual of u'' + B(t)u' + A(t)u = f with u'' from second differences of
/// the u-track and u' from the velocity track; f given as samples at the
/// trajectory nodes (empty = zero).
template <class Scalar>
ResidualReport residual(const BasicTrajectory<Scalar>& tr, const BasicBlockOperator<Scalar>& op,
                        const std::vector<VectorT<Scalar>>& f, const VectorT<Scalar>& u0, const VectorT<Scalar>& u1) {
  tr.check();
  if (tr.size() < 3) throw ConfigError("residual: need a uniform grid with at least 3 nodes");
  const double dt = (tr.time.back() - tr.time.front()) / static_cast<double>(tr.size() - 1);
  for (std::size_t i = 1; i < tr.size(); ++i)
    if (std::abs(tr.time[i] - tr.time[i - 1] - dt) > 1e-9 * dt) throw ConfigError("residual: grid must be uniform");
  if (!f.empty() && f.size() != tr.size()) throw InputError("residual: forcing samples must match the trajectory");
  ResidualReport rep;
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
    const double t = tr.time[i];
    VectorT<Scalar> r = (tr.u[i + 1] - 2.0 * tr.u[i] + tr.u[i - 1]) / (dt * dt);
    r.noalias() += op.stiffness(t) * tr.u[i];
    if (op.kind == BlockKind::damped) r.noalias() += op.damping(t) * tr.v[i];
    if (!f.empty()) r -= f[i];
    acc += dt * r.squaredNorm();
  }
  rep.equation = std::sqrt(acc);
  rep.initial_u = (tr.u.front() - u0).norm();
  rep.initial_v = (tr.v.front() - u1).norm();
  return rep;
}

template <class Scalar>
ResidualReport residual(const BasicTrajectory<Scalar>& tr, const BasicLinearProblem<Scalar>& p) {
  std::vector<VectorT<Scalar>> f;
  if (p.forcing)
    for (double t : tr.time) f.push_back(p.f(t));
  return residual(tr, p.op, f, p.u0, p.u1);
}

}  // namespace nlwave
