#pragma once

// Time-dependent forms
//   a(t; u, v) = int a(t,x) grad u . grad v + int c(t,x) u v
//   b(t; u, v) = int sigma(t,x) u v
// assembled on a SpectralBasis, the projected operators A_m(t), and numerical
// certificates for boundedness, (shifted) coercivity and the time-modulus.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/expression.hpp"
#include "nlwave/spectral_space.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

struct CoefficientField {
  std::string symbol;  ///< a, c, d, mu, sigma or beta
  NamedExpression evaluator;
  double lower_bound = 0.0;
  double upper_bound = std::numeric_limits<double>::infinity();

  double operator()(double t, double x, double y = 0.0) const { return evaluator(t, x, y); }
};

struct FormSpec {
  CoefficientField gradient_coef{"a", "1", 1.0};
  CoefficientField zeroth_coef{"c", "0", 0.0};
  std::optional<CoefficientField> damping_coef;
  double horizon = 1.0;

  bool damped() const noexcept { return damping_coef.has_value(); }

  void validate() const {
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("FormSpec: horizon must be positive");
  }
};

struct OperatorMatrix {
  Matrix entries;
  double time = 0.0;
};

namespace detail {

inline Vector sample_field(const CoefficientField& f, const SpectralBasis& basis, double t) {
  Vector s(static_cast<Eigen::Index>(basis.node_count()));
  for (std::size_t q = 0; q < basis.node_count(); ++q) s[q] = f(t, basis.nodes()[q][0], basis.nodes()[q][1]);
  if (!s.allFinite())
    throw AssemblyError("assemble: coefficient '" + f.symbol + "' is not finite at t = " + std::to_string(t),
                        f.symbol);
  return s;
}

inline void check_time(const FormSpec& form, double t) {
  const double slack = 1e-12 * form.horizon;
  if (!(t >= -slack && t <= form.horizon + slack))
    throw InputError("assemble: time " + std::to_string(t) + " outside [0, T]");
}

inline Matrix weighted_gram(const Matrix& left, const Vector& weights, const Matrix& right) {
  return left.transpose() * weights.asDiagonal() * right;
}

}  // namespace detail

/// Gradient part int a grad Psi_k . grad Psi_j only.
inline Matrix assemble_gradient_part(const FormSpec& form, const SpectralBasis& basis, double t) {
  detail::check_time(form, t);
  const Vector aw = detail::sample_field(form.gradient_coef, basis, t).cwiseProduct(basis.weights());
  Matrix k = detail::weighted_gram(basis.gradient_x(), aw, basis.gradient_x());
  if (basis.domain().kind == SpatialDomain::Kind::rectangle)
    k += detail::weighted_gram(basis.gradient_y(), aw, basis.gradient_y());
  if (!k.allFinite()) throw AssemblyError("assemble: non-finite entry from coefficient 'a'", form.gradient_coef.symbol);
  return k;
}

/// Matrix of a(t; Psi_k, Psi_j): entry (j, k).
inline OperatorMatrix assemble(const FormSpec& form, const SpectralBasis& basis, double t) {
  Matrix k = assemble_gradient_part(form, basis, t);
  const Vector cw = detail::sample_field(form.zeroth_coef, basis, t).cwiseProduct(basis.weights());
  k += detail::weighted_gram(basis.values(), cw, basis.values());
  if (!k.allFinite())
    throw AssemblyError("assemble: non-finite entry from coefficient '" + form.zeroth_coef.symbol + "'",
                        form.zeroth_coef.symbol);
  // Symmetrize away quadrature round-off; the forms here are symmetric.
  return {0.5 * (k + k.transpose()), t};
}

/// Matrix of the damping form b(t; Psi_k, Psi_j); zero if the form is undamped.
inline OperatorMatrix assemble_damping(const FormSpec& form, const SpectralBasis& basis, double t) {
  detail::check_time(form, t);
  if (!form.damping_coef) return {Matrix::Zero(basis.size(), basis.size()), t};
  const Vector sw = detail::sample_field(*form.damping_coef, basis, t).cwiseProduct(basis.weights());
  Matrix b = detail::weighted_gram(basis.values(), sw, basis.values());
  if (!b.allFinite())
    throw AssemblyError("assemble: non-finite entry from coefficient '" + form.damping_coef->symbol + "'",
                        form.damping_coef->symbol);
  return {0.5 * (b + b.transpose()), t};
}

/// A_m(t) = P A(t) P + alpha (I - P) B (I - P), with P the projection onto the
/// first m_sub modes and B = diag(1 + lambda_k) the V-inner-product operator.
inline OperatorMatrix build_Am(const OperatorMatrix& stiffness, const SpectralBasis& basis, int m_sub,
                               double alpha) {
  const int m = basis.size();
  if (stiffness.entries.rows() != m || stiffness.entries.cols() != m)
    throw InputError("build_Am: stiffness dimension does not match basis");
  if (m_sub < 1 || m_sub > m) throw ConfigError("build_Am: sub-dimension out of range");
  if (!(alpha > 0.0)) throw ConfigError("build_Am: alpha must be positive");
  OperatorMatrix out{Matrix::Zero(m, m), stiffness.time};
  out.entries.topLeftCorner(m_sub, m_sub) = stiffness.entries.topLeftCorner(m_sub, m_sub);
  for (int k = m_sub; k < m; ++k) out.entries(k, k) = alpha * (1.0 + basis.eigenvalue(k));
  return out;
}

struct CoefficientWitness {
  std::string symbol;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

struct FormCertificate {
  double bound_C = 0.0;           ///< max_t ||A(t)|| measured V -> V' in coordinates
  double coercivity_alpha = 0.0;  ///< min_t min Rayleigh quotient of Re a + shift |.|_H^2 against |.|_V^2
  double shift = 0.0;
  double gradient_alpha = 0.0;  ///< min_t min Rayleigh quotient of the gradient part against |grad .|^2
  double alpha_time = 0.0;      ///< time attaining coercivity_alpha
  Vector alpha_witness;         ///< coefficient vector attaining coercivity_alpha
  std::vector<double> omega_delta;
  std::vector<double> omega_value;  ///< nondecreasing in delta
  double dini_integral_1 = 0.0;     ///< int omega(t) / t^{3/2} over [delta_min, T]
  double dini_integral_2 = 0.0;     ///< int (omega(t) / t)^2 over [delta_min, T]
  bool dini_divergence_flag = false;
  double omega_exponent = 0.0;  ///< local log-log slope of omega near delta_min
  std::vector<double> sample_times;
  std::vector<CoefficientWitness> coefficient_ranges;  ///< observed min per field
  std::string square_root_property = "satisfied by construction (finite dimension)";
  std::string norm_convention = "V->V' operator norm in coordinates: ||W^-1/2 A W^-1/2||_2, W = diag(1 + lambda_k)";
};

class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, FormCertificate cert, std::optional<CoefficientWitness> coefficient)
      : Error(what), certificate_(std::move(cert)), coefficient_(std::move(coefficient)) {}
  const FormCertificate& certificate() const noexcept { return certificate_; }
  const std::optional<CoefficientWitness>& coefficient_witness() const noexcept { return coefficient_; }

 private:
  FormCertificate certificate_;
  std::optional<CoefficientWitness> coefficient_;
};

struct CertifyOptions {
  int sample_count = 21;
  double shift = 0.0;
  int omega_points = 33;
  double delta_min_fraction = 1e-4;
};

namespace detail {

inline Matrix v_scaled(const Matrix& a, const Vector& inv_sqrt_w) {
  return inv_sqrt_w.asDiagonal() * a * inv_sqrt_w.asDiagonal();
}

inline double sym_norm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
}

/// Observed minimum (with location) of a field over sample times and nodes.
inline CoefficientWitness field_minimum(const CoefficientField& f, const SpectralBasis& basis,
                                        const std::vector<double>& times) {
  CoefficientWitness w{f.symbol, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
  std::vector<std::array<double, 2>> points = basis.nodes();
  // Include the domain corners, where extremes of smooth fields often sit.
  const auto& d = basis.domain();
  points.push_back({0.0, 0.0});
  points.push_back({d.length_x, 0.0});
  if (d.kind == SpatialDomain::Kind::rectangle) {
    points.push_back({0.0, d.length_y});
    points.push_back({d.length_x, d.length_y});
  }
  for (double t : times)
    for (const auto& p : points) {
      const double v = f(t, p[0], p[1]);
      if (!(v >= w.value)) {
        w = {f.symbol, t, p[0], p[1], v};
        if (!std::isfinite(v)) return w;
      }
    }
  return w;
}

inline double field_maximum(const CoefficientField& f, const SpectralBasis& basis, const std::vector<double>& times) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : times)
    for (const auto& p : basis.nodes()) m = std::max(m, f(t, p[0], p[1]));
  return m;
}

}  // namespace detail

/// Numerical certificate for boundedness, shifted coercivity and the
/// continuity modulus omega of the form. Throws CertificationError when a
/// coefficient violates its declared bounds or coercivity fails.
inline FormCertificate certify(const FormSpec& form, const SpectralBasis& basis, const CertifyOptions& opts = {}) {
  form.validate();
  if (opts.sample_count < 2) throw ConfigError("certify: sample_count must be at least 2");
  const double T = form.horizon;
  FormCertificate cert;
  cert.shift = opts.shift;
  for (int i = 0; i < opts.sample_count; ++i) cert.sample_times.push_back(T * i / (opts.sample_count - 1));

  // Coefficient bounds first: a violation there is reported with its (t, x).
  std::vector<const CoefficientField*> fields{&form.gradient_coef, &form.zeroth_coef};
  if (form.damping_coef) fields.push_back(&*form.damping_coef);
  for (const auto* f : fields) {
    const auto lo = detail::field_minimum(*f, basis, cert.sample_times);
    cert.coefficient_ranges.push_back(lo);
    const bool principal = f == &form.gradient_coef;
    if (!std::isfinite(lo.value) || lo.value < f->lower_bound - 1e-12 || (principal && !(lo.value > 0.0))) {
      throw CertificationError("certify: coefficient '" + f->symbol + "' = " + std::to_string(lo.value) +
                                   " violates its lower bound " + std::to_string(f->lower_bound) +
                                   (principal ? " (must be > 0)" : ""),
                               cert, lo);
    }
    if (std::isfinite(f->upper_bound)) {
      const double hi = detail::field_maximum(*f, basis, cert.sample_times);
      if (hi > f->upper_bound + 1e-12)
        throw CertificationError("certify: coefficient '" + f->symbol + "' exceeds its declared sup", cert, lo);
    }
  }

  const Vector inv_sqrt_w = basis.v_weights().cwiseSqrt().cwiseInverse();
  const int m = basis.size();
  std::vector<int> nonconstant;
  for (int k = 0; k < m; ++k)
    if (basis.eigenvalue(k) > 1e-14) nonconstant.push_back(k);

  cert.coercivity_alpha = std::numeric_limits<double>::infinity();
  cert.gradient_alpha = std::numeric_limits<double>::infinity();
  for (double t : cert.sample_times) {
    const Matrix a = assemble(form, basis, t).entries;
    const Matrix scaled = detail::v_scaled(a, inv_sqrt_w);
    cert.bound_C = std::max(cert.bound_C, op_norm(scaled));
    Matrix shifted = detail::v_scaled(0.5 * (a + a.transpose()) + opts.shift * Matrix::Identity(m, m), inv_sqrt_w);
    Eigen::SelfAdjointEigenSolver<Matrix> es(shifted);
    if (es.eigenvalues()[0] < cert.coercivity_alpha) {
      cert.coercivity_alpha = es.eigenvalues()[0];
      cert.alpha_time = t;
      cert.alpha_witness = inv_sqrt_w.asDiagonal() * es.eigenvectors().col(0);
    }
    if (!nonconstant.empty()) {
      const Matrix g = assemble_gradient_part(form, basis, t);
      const auto n = static_cast<Eigen::Index>(nonconstant.size());
      Matrix r(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          r(i, j) = g(nonconstant[i], nonconstant[j]) /
                    std::sqrt(basis.eigenvalue(nonconstant[i]) * basis.eigenvalue(nonconstant[j]));
      Eigen::SelfAdjointEigenSolver<Matrix> gs(0.5 * (r + r.transpose()), Eigen::EigenvaluesOnly);
      cert.gradient_alpha = std::min(cert.gradient_alpha, gs.eigenvalues()[0]);
    }
  }
  if (nonconstant.empty()) cert.gradient_alpha = 0.0;

  // omega(delta) = sup_{|t-s| = delta} ||A(t) - A(s)||_{V->V'}, made nondecreasing.
  const double delta_min = opts.delta_min_fraction * T;
  const int nd = std::max(2, opts.omega_points);
  double running = 0.0;
  for (int k = 0; k < nd; ++k) {
    const double delta = delta_min * std::pow(T / delta_min, static_cast<double>(k) / (nd - 1));
    double w = 0.0;
    for (int j = 0; j < opts.sample_count; ++j) {
      const double s = (T - delta) * j / (opts.sample_count - 1);
      const Matrix diff = assemble(form, basis, std::min(s + delta, T)).entries - assemble(form, basis, s).entries;
      w = std::max(w, detail::sym_norm(detail::v_scaled(diff, inv_sqrt_w)));
    }
    running = std::max(running, w);
    cert.omega_delta.push_back(delta);
    cert.omega_value.push_back(running);
  }
  // Trapezoid rule in log(delta).
  for (int k = 0; k + 1 < nd; ++k) {
    const double d0 = cert.omega_delta[k], d1 = cert.omega_delta[k + 1];
    const double w0 = cert.omega_value[k], w1 = cert.omega_value[k + 1];
    const double du = std::log(d1) - std::log(d0);
    cert.dini_integral_1 += 0.5 * du * (w0 / std::sqrt(d0) + w1 / std::sqrt(d1));
    cert.dini_integral_2 += 0.5 * du * (w0 * w0 / d0 + w1 * w1 / d1);
  }
  // Both integrals converge at 0 iff omega(delta) ~ delta^p with p > 1/2.
  const double w0 = cert.omega_value[0], w1 = cert.omega_value[1];
  if (w0 > 0.0 && w1 > 0.0) {
    cert.omega_exponent = std::log(w1 / w0) / std::log(cert.omega_delta[1] / cert.omega_delta[0]);
    cert.dini_divergence_flag = cert.omega_exponent <= 0.55;
  } else {
    cert.omega_exponent = std::numeric_limits<double>::infinity();
  }

  if (!(cert.coercivity_alpha > 0.0)) {
    throw CertificationError("certify: coercivity fails (alpha = " + std::to_string(cert.coercivity_alpha) +
                                 " at t = " + std::to_string(cert.alpha_time) + ", shift " +
                                 std::to_string(opts.shift) + ")",
                             cert, std::nullopt);
  }
  return cert;
}

}  // namespace nlwave
