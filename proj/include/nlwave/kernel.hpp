#pragma once

// Nonlocal initial-condition operators g(u) = int_0^T kappa(s, .) u(s, .) ds + beta.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "nlwave/expression.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/spectral_space.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

struct NonlocalKernel {
  NamedExpression kappa{"0"};
  std::optional<NamedExpression> offset;  ///< affine part beta(x, y), projected onto the basis
};

struct KernelLipschitz {
  double into_h = 0.0;    ///< ||kappa||_{L^2(0,T; L^inf)}
  double gradient = 0.0;  ///< ||grad kappa||_{L^2(0,T; L^inf)}
  double into_v = 0.0;    ///< sqrt(into_h^2 + gradient^2)
};

namespace detail {

/// Spatial sample points: the quadrature nodes plus a uniform grid.
inline std::vector<std::array<double, 2>> kernel_probe_points(const SpectralBasis& basis) {
  const auto& dom = basis.domain();
  const bool rect = dom.kind == SpatialDomain::Kind::rectangle;
  std::vector<std::array<double, 2>> points = basis.nodes();
  const int fine = rect ? 101 : 401;
  for (int i = 0; i < fine; ++i) {
    const double x = dom.length_x * i / (fine - 1);
    if (!rect) {
      points.push_back({x, 0.0});
      continue;
    }
    for (int j = 0; j < fine; ++j) points.push_back({x, dom.length_y * j / (fine - 1)});
  }
  return points;
}

}  // namespace detail

/// sup_x |kappa(s, x)| and sup_x |grad kappa(s, x)| at each requested time.
struct KernelSupProfile {
  std::vector<double> value;
  std::vector<double> gradient;
};

inline KernelSupProfile kernel_sup_profile(const NonlocalKernel& kernel, const SpectralBasis& basis,
                                           const std::vector<double>& times) {
  const bool rect = basis.domain().kind == SpatialDomain::Kind::rectangle;
  const auto points = detail::kernel_probe_points(basis);
  const Expression dx = kernel.kappa.expr.derivative(Variable::x);
  const Expression dy = kernel.kappa.expr.derivative(Variable::y);
  KernelSupProfile out;
  for (double s : times) {
    double sup_k = 0.0, sup_g = 0.0;
    for (const auto& p : points) {
      const double k = kernel.kappa(s, p[0], p[1]);
      const double gx = dx(s, p[0], p[1]);
      const double gy = rect ? dy(s, p[0], p[1]) : 0.0;
      if (!std::isfinite(k) || !std::isfinite(gx) || !std::isfinite(gy))
        throw InputError("kernel_lipschitz: kernel is not finite at s = " + std::to_string(s));
      sup_k = std::max(sup_k, std::abs(k));
      sup_g = std::max(sup_g, std::hypot(gx, gy));
    }
    out.value.push_back(sup_k);
    out.gradient.push_back(sup_g);
  }
  return out;
}

/// Lipschitz constants of g: L^2(0,T;H) -> H and -> V.
inline KernelLipschitz kernel_lipschitz(const NonlocalKernel& kernel, const SpectralBasis& basis, double horizon) {
  if (!(horizon > 0.0)) throw ConfigError("kernel_lipschitz: horizon must be positive");
  const auto rule = gauss_legendre(64, 0.0, horizon);
  const auto prof = kernel_sup_profile(kernel, basis, rule.nodes);
  double acc_h = 0.0, acc_g = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc_h += rule.weights[i] * prof.value[i] * prof.value[i];
    acc_g += rule.weights[i] * prof.gradient[i] * prof.gradient[i];
  }
  KernelLipschitz out;
  out.into_h = std::sqrt(acc_h);
  out.gradient = std::sqrt(acc_g);
  out.into_v = std::hypot(out.into_h, out.gradient);
  return out;
}

/// A kernel bound to a basis and a uniform time grid: g(u) = sum_i w_i K_i u_i + beta,
/// with composite Simpson weights w_i and K_i the Galerkin matrix of kappa(s_i, .).
class DiscreteKernel {
 public:
  DiscreteKernel() = default;

  DiscreteKernel(const NonlocalKernel& kernel, const SpectralBasis& basis, const TimeGrid& grid) {
    if (grid.intervals() < 2) throw ConfigError("apply_kernel: time grid too coarse for Simpson quadrature (need >= 2 intervals)");
    m_ = basis.size();
    weights_ = composite_weights(0, grid.size() - 1, grid.step());
    spatial_ = kernel.kappa.expr.depends_on(Variable::x) || kernel.kappa.expr.depends_on(Variable::y);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = grid[i];
      if (!spatial_) {
        const double k = kernel.kappa(s, 0.0, 0.0);
        if (!std::isfinite(k)) throw InputError("apply_kernel: kernel not finite");
        scalars_.push_back(k);
        continue;
      }
      const Vector kw = sample(basis, [&](double x, double y) { return kernel.kappa(s, x, y); });
      if (!kw.allFinite()) throw InputError("apply_kernel: kernel not finite");
      matrices_.push_back(basis.values().transpose() * (kw.cwiseProduct(basis.weights())).asDiagonal() *
                          basis.values());
    }
    offset_ = kernel.offset ? project(basis, [&](double x, double y) { return (*kernel.offset)(0.0, x, y); })
                            : Vector::Zero(m_);
  }

  int modes() const noexcept { return m_; }
  const Vector& offset() const noexcept { return offset_; }
  void set_offset(Vector beta) { offset_ = std::move(beta); }

  /// Linear part only: sum_i w_i K_i u_i.
  Vector linear(const std::vector<Vector>& u) const {
    if (u.size() != weights_.size()) throw InputError("apply_kernel: trajectory does not cover the kernel grid");
    Vector acc = Vector::Zero(m_);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (weights_[i] == 0.0) continue;
      if (spatial_) acc.noalias() += weights_[i] * (matrices_[i] * u[i]);
      else acc += (weights_[i] * scalars_[i]) * u[i];
    }
    return acc;
  }

  Vector operator()(const std::vector<Vector>& u) const { return linear(u) + offset_; }
  Vector operator()(const Trajectory& tr) const { return (*this)(tr.u); }

 private:
  int m_ = 0;
  bool spatial_ = false;
  std::vector<double> weights_;
  std::vector<double> scalars_;
  std::vector<Matrix> matrices_;
  Vector offset_;
};

/// g(u) evaluated on a trajectory over a uniform grid covering [0, T].
inline CoefVector apply_kernel(const NonlocalKernel& kernel, const Trajectory& traj, const SpectralBasis& basis) {
  traj.check();
  if (traj.size() < 3) throw ConfigError("apply_kernel: time grid too coarse for Simpson quadrature");
  const TimeGrid grid(traj.time.front(), traj.time.back(), static_cast<int>(traj.size()) - 1);
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (std::abs(grid[i] - traj.time[i]) > 1e-9 * grid.step())
      throw ConfigError("apply_kernel: trajectory grid must be uniform");
  return DiscreteKernel(kernel, basis, grid)(traj);
}

}  // namespace nlwave
