#pragma once

// Shared builders for the test suite.

#include <cmath>
#include <random>
#include <vector>

#include "nlwave/nlwave.hpp"

namespace nlwave::fixtures {

inline Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v[i++] = x;
  return v.asDiagonal();
}

/// sin(sqrt(l) tau) / sqrt(l), with the l = 0 limit tau.
inline double sine_family(double l, double tau) { return l == 0.0 ? tau : std::sin(std::sqrt(l) * tau) / std::sqrt(l); }
inline double cosine_family(double l, double tau) { return std::cos(std::sqrt(l) * tau); }

/// Scalar u'' + (1 + t) u = 0 on [0, T].
inline BlockOperator airy_operator(double T) {
  BlockOperator op;
  op.kind = BlockKind::undamped;
  op.m = 1;
  op.t_min = 0.0;
  op.t_max = T;
  op.A = [](double t) { return Matrix::Constant(1, 1, 1.0 + t); };
  return op;
}

/// Random smooth symmetric time-dependent operator: diagonal (1 + k^2)(1 + eps sin) plus a small coupling.
inline BlockOperator random_operator(int m, double T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector d(m), phase(m);
  Matrix c(m, m);
  for (int k = 0; k < m; ++k) {
    d[k] = 1.0 + k * k * (1.0 + 0.2 * u(rng));
    phase[k] = 3.0 * u(rng);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) c(i, j) = 0.1 * u(rng);
  c = 0.5 * (c + c.transpose()).eval();
  BlockOperator op;
  op.kind = BlockKind::undamped;
  op.m = m;
  op.t_min = 0.0;
  op.t_max = T;
  op.A = [d, phase, c](double t) {
    Matrix a = c * std::cos(t);
    for (Eigen::Index k = 0; k < d.size(); ++k) a(k, k) += d[k] * (1.0 + 0.3 * std::sin(t + phase[k]));
    return a;
  };
  return op;
}

inline Vector random_vector(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vector v(m);
  for (int k = 0; k < m; ++k) v[k] = n(rng);
  return v;
}

}  // namespace nlwave::fixtures
