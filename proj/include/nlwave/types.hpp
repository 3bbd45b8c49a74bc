#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace nlwave {

template <class Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorT<double>;
using Matrix = MatrixT<double>;
using Complex = std::complex<double>;

/// Basis coordinates of an element of H_m.
using CoefVector = Vector;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters (bad domain, out-of-range sizes, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rejected input data (non-finite samples, dimension mismatch, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, std::string coefficient)
      : Error(what), coefficient_(std::move(coefficient)) {}
  const std::string& coefficient() const noexcept { return coefficient_; }

 private:
  std::string coefficient_;
};

/// Thrown when the time integrator produces a non-finite state.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, long step, double time)
      : Error(what), step_(step), time_(time) {}
  long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  long step_;
  double time_;
};

/// Spectral (operator 2-) norm of a dense matrix.
template <class Derived>
double op_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  using S = typename Derived::Scalar;
  const MatrixT<S> g = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<MatrixT<S>> es(g, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace nlwave
