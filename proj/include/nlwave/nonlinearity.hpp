#pragma once

// Nemytskii nonlinearities f(t, u) acting pointwise in space, realized on the
// Galerkin space as P_m phi(u(x)) by quadrature, plus an optional additive
// forcing F(t).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nlwave/spectral_space.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

enum class NonlinearityKind { sublinear_growth, lipschitz };

inline const char* to_string(NonlinearityKind k) {
  return k == NonlinearityKind::lipschitz ? "lipschitz" : "sublinear_growth";
}

/// Pointwise profiles phi with |phi(z)| <= |z| and Lipschitz constant 1.
enum class Profile { zero, identity, tanh, sin, logistic };

inline Profile parse_profile(const std::string& name) {
  if (name == "zero") return Profile::zero;
  if (name == "identity" || name == "linear") return Profile::identity;
  if (name == "tanh") return Profile::tanh;
  if (name == "sin") return Profile::sin;
  if (name == "logistic") return Profile::logistic;
  throw ConfigError("unknown nonlinearity '" + name + "' (expected zero, identity, tanh, sin or logistic)");
}

inline const char* to_string(Profile p) {
  switch (p) {
    case Profile::zero: return "zero";
    case Profile::identity: return "identity";
    case Profile::tanh: return "tanh";
    case Profile::sin: return "sin";
    case Profile::logistic: return "logistic";
  }
  return "zero";
}

inline double apply_profile(Profile p, double z) {
  switch (p) {
    case Profile::zero: return 0.0;
    case Profile::identity: return z;
    case Profile::tanh: return std::tanh(z);
    case Profile::sin: return std::sin(z);
    case Profile::logistic: return z / (1.0 + z * z);
  }
  return 0.0;
}

/// f(t, u) with declared constants: growth ||f(t,u)|| <= a||u|| + b(t), or a
/// uniform Lipschitz constant L in u.
struct Nonlinearity {
  std::string name = "zero";
  NonlinearityKind kind = NonlinearityKind::lipschitz;
  double growth_a = 0.0;
  std::function<double(double)> growth_b;  ///< empty means b = 0
  double lipschitz = 0.0;
  std::function<Vector(double, const Vector&)> evaluator;

  Vector operator()(double t, const Vector& u) const {
    if (!evaluator) return Vector::Zero(u.size());
    Vector out = evaluator(t, u);
    if (out.size() != u.size()) throw InputError("Nonlinearity: output dimension mismatch");
    return out;
  }
  double b(double t) const { return growth_b ? growth_b(t) : 0.0; }
  /// Growth constant a usable in either kind (a Lipschitz f has a = L, b = ||f(t,0)||).
  double effective_a() const { return kind == NonlinearityKind::lipschitz ? lipschitz : growth_a; }
};

/// f(t, u) = scale * P phi(u(x)) on the basis. Declares a = L = |scale|, b = 0.
inline Nonlinearity pointwise_nonlinearity(Profile profile, const SpectralBasis& basis, double scale = 1.0,
                                           NonlinearityKind kind = NonlinearityKind::lipschitz) {
  if (!std::isfinite(scale)) throw ConfigError("nonlinearity scale must be finite");
  Nonlinearity f;
  f.name = to_string(profile);
  f.kind = kind;
  f.growth_a = profile == Profile::zero ? 0.0 : std::abs(scale);
  f.lipschitz = f.growth_a;
  if (profile == Profile::zero) return f;
  auto b = std::make_shared<const SpectralBasis>(basis);
  f.evaluator = [b, profile, scale](double, const Vector& u) -> Vector {
    if (profile == Profile::identity) return scale * u;
    Vector vals = b->values() * u;
    for (Eigen::Index q = 0; q < vals.size(); ++q) vals[q] = scale * apply_profile(profile, vals[q]);
    return b->values().transpose() * b->weights().cwiseProduct(vals);
  };
  return f;
}

/// f + F(t). The growth term b(t) is raised by ||F(t)||; the Lipschitz constant is unchanged.
inline Nonlinearity with_forcing(Nonlinearity f, std::function<Vector(double)> forcing) {
  auto base = f.evaluator;
  auto base_b = f.growth_b;
  f.name += "+forcing";
  f.evaluator = [base, forcing](double t, const Vector& u) -> Vector {
    Vector out = forcing(t);
    if (base) out += base(t, u);
    return out;
  };
  f.growth_b = [base_b, forcing](double t) { return (base_b ? base_b(t) : 0.0) + forcing(t).norm(); };
  return f;
}

/// Samples of f(t_i, u_i) along a trajectory, with the declared growth bound checked on every sample.
struct Superposition {
  std::vector<Vector> values;
  bool growth_violation = false;
  double worst_excess = -std::numeric_limits<double>::infinity();  ///< max ||f|| - (a||u|| + b)
};

inline Superposition superpose(const Nonlinearity& f, const Trajectory& traj) {
  traj.check();
  Superposition out;
  out.values.reserve(traj.size());
  const double a = f.effective_a();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Vector v = f(traj.time[i], traj.u[i]);
    if (!v.allFinite()) throw InputError("superpose: non-finite value at t = " + std::to_string(traj.time[i]));
    const double excess = v.norm() - (a * traj.u[i].norm() + f.b(traj.time[i]));
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > 1e-9) out.growth_violation = true;
    out.values.push_back(std::move(v));
  }
  return out;
}

struct NonlinearityCheck {
  int probes = 0;
  double worst_growth_excess = -std::numeric_limits<double>::infinity();
  double worst_lipschitz_ratio = 0.0;  ///< max ||f(u)-f(w)|| / ||u-w||
  bool ok = true;
};

/// Samples the declared constants on seeded random probes whose magnitudes
/// range over several decades.
inline NonlinearityCheck verify_nonlinearity(const Nonlinearity& f, int m, double horizon, std::uint64_t seed,
                                             int probes = 200) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NonlinearityCheck c;
  c.probes = probes;
  const double a = f.effective_a();
  for (int p = 0; p < probes; ++p) {
    const double t = horizon * unit(rng);
    const double mag = std::pow(10.0, -2.0 + 4.0 * unit(rng));
    Vector u(m), w(m);
    for (int k = 0; k < m; ++k) u[k] = normal(rng);
    for (int k = 0; k < m; ++k) w[k] = normal(rng);
    u *= mag / std::max(u.norm(), 1e-300);
    w = u + (mag * std::pow(10.0, -3.0 * unit(rng)) / std::max(w.norm(), 1e-300)) * w;
    const Vector fu = f(t, u);
    const Vector fw = f(t, w);
    const double excess = fu.norm() - (a * u.norm() + f.b(t));
    c.worst_growth_excess = std::max(c.worst_growth_excess, excess);
    if (excess > 1e-9) c.ok = false;
    const double d = (u - w).norm();
    if (d > 0.0) {
      const double ratio = (fu - fw).norm() / d;
      c.worst_lipschitz_ratio = std::max(c.worst_lipschitz_ratio, ratio);
      if (f.kind == NonlinearityKind::lipschitz && ratio > f.lipschitz * (1.0 + 1e-9) + 1e-12) c.ok = false;
    }
  }
  return c;
}

}  // namespace nlwave
