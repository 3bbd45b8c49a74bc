#pragma once

// Neumann-Laplacian eigenbases on intervals and rectangles, the canonical
// projection onto span{Psi_0, ..., Psi_{m-1}}, and the H / V coordinate norms.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "nlwave/quadrature.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

struct SpatialDomain {
  enum class Kind { interval, rectangle };

  Kind kind = Kind::interval;
  double length_x = std::numbers::pi;
  double length_y = std::numbers::pi;
  /// Gauss points per dimension; 0 selects 2 * (highest 1D index + 1) + 16.
  int quadrature_order = 0;

  static SpatialDomain interval(double length, int quadrature_order = 0) {
    return {Kind::interval, length, 0.0, quadrature_order};
  }
  static SpatialDomain rectangle(double lx, double ly, int quadrature_order = 0) {
    return {Kind::rectangle, lx, ly, quadrature_order};
  }

  int dimension() const noexcept { return kind == Kind::interval ? 1 : 2; }

  void validate() const {
    auto bad = [](double l) { return !(std::isfinite(l) && l > 0.0); };
    if (bad(length_x)) throw ConfigError("SpatialDomain: length must be finite and positive");
    if (kind == Kind::rectangle && bad(length_y))
      throw ConfigError("SpatialDomain: rectangle side lengths must be finite and positive");
    if (quadrature_order < 0) throw ConfigError("SpatialDomain: quadrature order must be positive");
  }
};

/// Orthonormal Neumann eigenbasis. Immutable after construction.
class SpectralBasis {
 public:
  SpectralBasis(const SpatialDomain& domain, int modes) : domain_(domain), m_(modes) {
    domain.validate();
    if (modes < 1) throw ConfigError("build_basis: mode count must be at least 1");
    select_modes();
    build_quadrature();
    tabulate();
  }

  const SpatialDomain& domain() const noexcept { return domain_; }
  int size() const noexcept { return m_; }
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  double eigenvalue(int k) const { return eigenvalues_[k]; }
  /// 1D indices (k_x, k_y) of mode k; k_y is 0 on intervals.
  std::pair<int, int> mode_index(int k) const { return indices_[k]; }

  std::size_t node_count() const noexcept { return weights_.size(); }
  const std::vector<std::array<double, 2>>& nodes() const noexcept { return nodes_; }
  const Vector& weights() const noexcept { return weights_; }
  /// node_count x m table of Psi_k at quadrature nodes.
  const Matrix& values() const noexcept { return values_; }
  /// node_count x m tables of d/dx Psi_k and d/dy Psi_k.
  const Matrix& gradient_x() const noexcept { return grad_x_; }
  const Matrix& gradient_y() const noexcept { return grad_y_; }

  /// Diagonal of the V-inner-product operator in coordinates: 1 + lambda_k.
  Vector v_weights() const { return (eigenvalues_.array() + 1.0).matrix(); }

  double psi(int k, double x, double y = 0.0) const {
    const auto [kx, ky] = indices_[k];
    double v = psi_1d(kx, domain_.length_x, x);
    if (domain_.kind == SpatialDomain::Kind::rectangle) v *= psi_1d(ky, domain_.length_y, y);
    return v;
  }
  std::array<double, 2> grad_psi(int k, double x, double y = 0.0) const {
    const auto [kx, ky] = indices_[k];
    if (domain_.kind == SpatialDomain::Kind::interval) return {dpsi_1d(kx, domain_.length_x, x), 0.0};
    return {dpsi_1d(kx, domain_.length_x, x) * psi_1d(ky, domain_.length_y, y),
            psi_1d(kx, domain_.length_x, x) * dpsi_1d(ky, domain_.length_y, y)};
  }

  /// Gram matrix of the basis under the stored quadrature.
  Matrix gram() const { return values_.transpose() * weights_.asDiagonal() * values_; }

 private:
  static double psi_1d(int k, double length, double x) {
    if (k == 0) return 1.0 / std::sqrt(length);
    return std::sqrt(2.0 / length) * std::cos(k * std::numbers::pi * x / length);
  }
  static double dpsi_1d(int k, double length, double x) {
    if (k == 0) return 0.0;
    const double w = k * std::numbers::pi / length;
    return -std::sqrt(2.0 / length) * w * std::sin(w * x);
  }

  void select_modes() {
    std::vector<std::tuple<double, int, int>> pool;
    const double lx = domain_.length_x;
    if (domain_.kind == SpatialDomain::Kind::interval) {
      for (int k = 0; k < m_; ++k) pool.emplace_back(std::pow(k * std::numbers::pi / lx, 2), k, 0);
    } else {
      const double ly = domain_.length_y;
      for (int k = 0; k < m_; ++k)
        for (int l = 0; l < m_; ++l)
          pool.emplace_back(std::pow(k * std::numbers::pi / lx, 2) + std::pow(l * std::numbers::pi / ly, 2), k, l);
      // Ties broken by (k_x, k_y) so truncations at different m are nested.
      std::stable_sort(pool.begin(), pool.end());
    }
    eigenvalues_.resize(m_);
    indices_.resize(m_);
    for (int k = 0; k < m_; ++k) {
      eigenvalues_[k] = std::get<0>(pool[k]);
      indices_[k] = {std::get<1>(pool[k]), std::get<2>(pool[k])};
      max_index_ = std::max({max_index_, std::get<1>(pool[k]), std::get<2>(pool[k])});
    }
  }

  void build_quadrature() {
    const int needed = 2 * (max_index_ + 1);
    int order = domain_.quadrature_order;
    if (order == 0) order = needed + 16;
    if (order < needed)
      throw ConfigError("build_basis: quadrature order " + std::to_string(order) + " too small, need at least " +
                        std::to_string(needed));
    const auto qx = gauss_legendre(order, 0.0, domain_.length_x);
    if (domain_.kind == SpatialDomain::Kind::interval) {
      nodes_.resize(order);
      weights_.resize(order);
      for (int i = 0; i < order; ++i) {
        nodes_[i] = {qx.nodes[i], 0.0};
        weights_[i] = qx.weights[i];
      }
      return;
    }
    const auto qy = gauss_legendre(order, 0.0, domain_.length_y);
    nodes_.resize(static_cast<std::size_t>(order) * order);
    weights_.resize(static_cast<Eigen::Index>(order) * order);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        nodes_[i * order + j] = {qx.nodes[i], qy.nodes[j]};
        weights_[i * order + j] = qx.weights[i] * qy.weights[j];
      }
  }

  void tabulate() {
    const auto nq = static_cast<Eigen::Index>(nodes_.size());
    values_.resize(nq, m_);
    grad_x_.resize(nq, m_);
    grad_y_.resize(nq, m_);
    for (Eigen::Index q = 0; q < nq; ++q)
      for (int k = 0; k < m_; ++k) {
        values_(q, k) = psi(k, nodes_[q][0], nodes_[q][1]);
        const auto g = grad_psi(k, nodes_[q][0], nodes_[q][1]);
        grad_x_(q, k) = g[0];
        grad_y_(q, k) = g[1];
      }
  }

  SpatialDomain domain_;
  int m_;
  int max_index_ = 0;
  Vector eigenvalues_;
  std::vector<std::pair<int, int>> indices_;
  std::vector<std::array<double, 2>> nodes_;
  Vector weights_;
  Matrix values_, grad_x_, grad_y_;
};

inline SpectralBasis build_basis(const SpatialDomain& domain, int modes) { return SpectralBasis(domain, modes); }

/// Canonical projection of quadrature-node samples: c_k = sum_q w_q f_q Psi_k(x_q).
inline CoefVector project_samples(const SpectralBasis& basis, const Vector& samples) {
  if (samples.size() != static_cast<Eigen::Index>(basis.node_count()))
    throw InputError("project: sample count does not match quadrature node count");
  if (!samples.allFinite()) throw InputError("project: non-finite sample value");
  return basis.values().transpose() * (basis.weights().array() * samples.array()).matrix();
}

template <class F>
Vector sample(const SpectralBasis& basis, F&& f) {
  Vector s(static_cast<Eigen::Index>(basis.node_count()));
  for (std::size_t q = 0; q < basis.node_count(); ++q) s[q] = f(basis.nodes()[q][0], basis.nodes()[q][1]);
  return s;
}

/// Projection of a point function f(x, y) onto the basis.
template <class F>
CoefVector project(const SpectralBasis& basis, F&& f) {
  return project_samples(basis, sample(basis, std::forward<F>(f)));
}

/// Values of sum_k c_k Psi_k at the quadrature nodes.
inline Vector evaluate(const SpectralBasis& basis, const CoefVector& c) {
  if (c.size() != basis.size()) throw InputError("evaluate: coefficient length does not match basis");
  return basis.values() * c;
}

inline double evaluate_at(const SpectralBasis& basis, const CoefVector& c, double x, double y = 0.0) {
  double v = 0.0;
  for (int k = 0; k < basis.size(); ++k) v += c[k] * basis.psi(k, x, y);
  return v;
}

struct Norms {
  double h = 0.0;
  double v = 0.0;
};

/// ||u||_H and ||u||_V with ||u||_V^2 = sum (1 + lambda_k) |u_k|^2.
template <class Scalar>
Norms norms(const SpectralBasis& basis, const VectorT<Scalar>& u) {
  if (u.size() != basis.size()) throw InputError("norms: coefficient length does not match basis");
  Norms n;
  n.h = u.norm();
  n.v = std::sqrt((basis.v_weights().array() * u.array().abs2()).sum());
  return n;
}

/// Discrete trajectory: coefficient vectors of u and du/dt on a time grid.
template <class Scalar>
struct BasicTrajectory {
  std::vector<double> time;
  std::vector<VectorT<Scalar>> u;
  std::vector<VectorT<Scalar>> v;

  std::size_t size() const noexcept { return time.size(); }
  int modes() const { return u.empty() ? 0 : static_cast<int>(u.front().size()); }

  static BasicTrajectory zeros(const std::vector<double>& grid, int m) {
    BasicTrajectory tr;
    tr.time = grid;
    tr.u.assign(grid.size(), VectorT<Scalar>::Zero(m));
    tr.v.assign(grid.size(), VectorT<Scalar>::Zero(m));
    return tr;
  }

  void check() const {
    if (u.size() != time.size() || v.size() != time.size())
      throw InputError("Trajectory: u and v must match the time grid length");
    for (std::size_t i = 1; i < time.size(); ++i)
      if (!(time[i] > time[i - 1])) throw InputError("Trajectory: time grid must be strictly increasing");
  }
};

using Trajectory = BasicTrajectory<double>;

/// max_i ||a.u_i - b.u_i||_H over a shared grid.
template <class Scalar>
double sup_distance(const BasicTrajectory<Scalar>& a, const BasicTrajectory<Scalar>& b) {
  if (a.size() != b.size()) throw InputError("sup_distance: trajectories on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ma = a.u[i].size(), mb = b.u[i].size();
    const auto common = std::min(ma, mb);
    double sq = (a.u[i].head(common) - b.u[i].head(common)).squaredNorm();
    if (ma > common) sq += a.u[i].tail(ma - common).squaredNorm();
    if (mb > common) sq += b.u[i].tail(mb - common).squaredNorm();
    d = std::max(d, std::sqrt(sq));
  }
  return d;
}

template <class Scalar>
double sup_norm(const BasicTrajectory<Scalar>& a) {
  double d = 0.0;
  for (const auto& x : a.u) d = std::max(d, x.norm());
  return d;
}

/// Discrete L^2(0,T;H) distance (trapezoid in time). Trajectories of
/// different mode counts are compared by zero-padding the shorter one.
template <class Scalar>
double l2_distance(const BasicTrajectory<Scalar>& a, const BasicTrajectory<Scalar>& b) {
  if (a.size() != b.size()) throw InputError("l2_distance: trajectories on different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ma = a.u[i].size(), mb = b.u[i].size();
    const auto common = std::min(ma, mb);
    double sq = (a.u[i].head(common) - b.u[i].head(common)).squaredNorm();
    if (ma > common) sq += a.u[i].tail(ma - common).squaredNorm();
    if (mb > common) sq += b.u[i].tail(mb - common).squaredNorm();
    double w = 0.0;
    if (i > 0) w += 0.5 * (a.time[i] - a.time[i - 1]);
    if (i + 1 < a.size()) w += 0.5 * (a.time[i + 1] - a.time[i]);
    acc += w * sq;
  }
  return std::sqrt(acc);
}

}  // namespace nlwave
