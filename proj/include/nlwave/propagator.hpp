#pragma once

// Evolution families of the first-order block systems
//   undamped:  d/dt (u, v) = (v, -A(t) u) + (0, f)
//   damped:    d/dt (u, v) = (v, -A(t) u - B(t) v) + (0, f)
// integrated with the classical fourth-order Runge-Kutta method, fundamental
// solution tables E(t_i, t_j) on a grid, and checks of the fundamental-solution
// identities on those tables.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/forms.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/spectral_space.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

enum class BlockKind { undamped, damped };

inline const char* to_string(BlockKind k) { return k == BlockKind::undamped ? "undamped" : "damped"; }

template <class Scalar>
struct BasicBlockOperator {
  using Mat = MatrixT<Scalar>;

  BlockKind kind = BlockKind::undamped;
  int m = 0;
  std::function<Mat(double)> A;
  std::function<Mat(double)> B;  ///< damped only
  double t_min = 0.0;
  double t_max = 1.0;

  Mat stiffness(double t) const {
    Mat a = A(t);
    if (a.rows() != m || a.cols() != m) throw InputError("BlockOperator: A(t) has wrong dimension");
    return a;
  }
  Mat damping(double t) const {
    if (kind == BlockKind::undamped || !B) return Mat::Zero(m, m);
    Mat b = B(t);
    if (b.rows() != m || b.cols() != m) throw InputError("BlockOperator: B(t) has wrong dimension");
    return b;
  }
};

using BlockOperator = BasicBlockOperator<double>;

/// Galerkin block operator of a form on a basis. Damped iff the form carries a
/// damping coefficient.
inline BlockOperator make_block_operator(const FormSpec& form, const SpectralBasis& basis) {
  auto f = std::make_shared<const FormSpec>(form);
  auto b = std::make_shared<const SpectralBasis>(basis);
  BlockOperator op;
  op.kind = form.damped() ? BlockKind::damped : BlockKind::undamped;
  op.m = basis.size();
  op.t_min = 0.0;
  op.t_max = form.horizon;
  op.A = [f, b](double t) { return assemble(*f, *b, t).entries; };
  if (form.damped()) op.B = [f, b](double t) { return assemble_damping(*f, *b, t).entries; };
  return op;
}

/// Block operator for the projected operators A_m(t) of a form.
inline BlockOperator make_projected_operator(const FormSpec& form, const SpectralBasis& basis, int m_sub,
                                             double alpha) {
  BlockOperator op = make_block_operator(form, basis);
  auto b = std::make_shared<const SpectralBasis>(basis);
  auto full = op.A;
  op.A = [full, b, m_sub, alpha](double t) { return build_Am({full(t), t}, *b, m_sub, alpha).entries; };
  return op;
}

/// Time-independent operator (A, B) on [t_min, t_max].
template <class Scalar>
BasicBlockOperator<Scalar> constant_operator(const MatrixT<Scalar>& a, std::optional<MatrixT<Scalar>> b = std::nullopt,
                                             double t_min = 0.0, double t_max = 1.0) {
  BasicBlockOperator<Scalar> op;
  op.kind = b ? BlockKind::damped : BlockKind::undamped;
  op.m = static_cast<int>(a.rows());
  op.t_min = t_min;
  op.t_max = t_max;
  op.A = [a](double) { return a; };
  if (b) op.B = [bb = *b](double) { return bb; };
  return op;
}

/// Returned adjoint: A_r(t) = A(T - t)^H, the operator of conj(a(T - t; v, u)).
template <class Scalar>
BasicBlockOperator<Scalar> returned_adjoint(const BasicBlockOperator<Scalar>& op) {
  if (op.kind != BlockKind::undamped) throw InputError("returned_adjoint: only defined for undamped operators");
  BasicBlockOperator<Scalar> r = op;
  const double lo = op.t_min, hi = op.t_max;
  auto a = op.A;
  r.A = [a, lo, hi](double t) -> MatrixT<Scalar> { return a(hi + lo - t).adjoint(); };
  return r;
}

namespace detail {

template <class Scalar>
struct Stage {
  MatrixT<Scalar> A, B;
  bool damped = false;
};

template <class Scalar>
Stage<Scalar> stage_at(const BasicBlockOperator<Scalar>& op, double t) {
  Stage<Scalar> s;
  s.A = op.stiffness(t);
  s.damped = op.kind == BlockKind::damped;
  if (s.damped) s.B = op.damping(t);
  return s;
}

/// d/dt X for a 2m x k state block X = (X_u; X_v).
template <class Scalar>
MatrixT<Scalar> block_rhs(const Stage<Scalar>& st, const MatrixT<Scalar>& x) {
  const Eigen::Index m = st.A.rows();
  MatrixT<Scalar> out(x.rows(), x.cols());
  out.topRows(m) = x.bottomRows(m);
  out.bottomRows(m).noalias() = -st.A * x.topRows(m);
  if (st.damped) out.bottomRows(m).noalias() -= st.B * x.bottomRows(m);
  return out;
}

/// One classical RK4 step with pre-evaluated stage operators at t, t + h/2, t + h.
/// `forcing` (if any) is a 2m x k block per stage time.
template <class Scalar>
void rk4_step(const Stage<Scalar>& s0, const Stage<Scalar>& sh, const Stage<Scalar>& s1, double h,
              MatrixT<Scalar>& x, const MatrixT<Scalar>* f0 = nullptr, const MatrixT<Scalar>* fh = nullptr,
              const MatrixT<Scalar>* f1 = nullptr) {
  MatrixT<Scalar> k1 = block_rhs(s0, x);
  if (f0) k1 += *f0;
  MatrixT<Scalar> k2 = block_rhs(sh, MatrixT<Scalar>(x + (0.5 * h) * k1));
  if (fh) k2 += *fh;
  MatrixT<Scalar> k3 = block_rhs(sh, MatrixT<Scalar>(x + (0.5 * h) * k2));
  if (fh) k3 += *fh;
  MatrixT<Scalar> k4 = block_rhs(s1, MatrixT<Scalar>(x + h * k3));
  if (f1) k4 += *f1;
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Propagate a state block from s to t (either direction) with n equal steps.
template <class Scalar>
MatrixT<Scalar> propagate_block(const BasicBlockOperator<Scalar>& op, double s, double t, int steps,
                                MatrixT<Scalar> x) {
  if (steps < 1) return x;
  const double h = (t - s) / steps;
  Stage<Scalar> s0 = stage_at(op, s);
  for (int k = 0; k < steps; ++k) {
    const double tk = s + k * h;
    const double tk1 = (k + 1 == steps) ? t : tk + h;
    const Stage<Scalar> sh = stage_at(op, tk + 0.5 * h);
    Stage<Scalar> s1 = stage_at(op, tk1);
    rk4_step(s0, sh, s1, h, x);
    if (!x.allFinite()) throw PropagationError("propagate: non-finite state", k, tk1);
    s0 = std::move(s1);
  }
  return x;
}

inline int steps_for(double span, double h) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(span) / h - 1e-9)));
}

}  // namespace detail

/// Upper bound for the RK4 stability product h (sqrt(rho(A)) + rho(B)) over
/// the supplied times. rho is bounded by the maximum absolute row sum.
template <class Scalar>
double stability_product(const BasicBlockOperator<Scalar>& op, double h, const std::vector<double>& times) {
  double worst = 0.0;
  for (double t : times) {
    const double ra = op.stiffness(t).cwiseAbs().rowwise().sum().maxCoeff();
    double rb = 0.0;
    if (op.kind == BlockKind::damped) rb = op.damping(t).cwiseAbs().rowwise().sum().maxCoeff();
    worst = std::max(worst, h * (std::sqrt(ra) + rb));
  }
  return worst;
}

/// Rejects step sizes outside the RK4 stability region of the largest mode.
template <class Scalar>
void validate_step(const BasicBlockOperator<Scalar>& op, double h, const std::vector<double>& times) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size must be positive");
  const double p = stability_product(op, h, times);
  if (p > 2.5)
    throw ConfigError("step size h = " + std::to_string(h) + " too large for the spectrum (h*(sqrt(rho(A))+rho(B)) = " +
                      std::to_string(p) + " > 2.5)");
}

/// Integrate the block system from s to t with step at most h. `forcing(t)`
/// returns the m-vector f(t) entering the velocity row.
template <class Scalar>
VectorT<Scalar> propagate(const BasicBlockOperator<Scalar>& op, double s, double t, const VectorT<Scalar>& U0,
                          double h, const std::function<VectorT<Scalar>(double)>& forcing = {}) {
  if (t < s) throw InputError("propagate: requires s <= t");
  if (U0.size() != 2 * op.m) throw InputError("propagate: initial state must have length 2m");
  if (!(h > 0.0)) throw ConfigError("propagate: step must be positive");
  if (t == s) return U0;
  const int n = detail::steps_for(t - s, h);
  if (!forcing) return detail::propagate_block<Scalar>(op, s, t, n, U0);
  const double step = (t - s) / n;
  const int m = op.m;
  auto lift = [&](double tau) {
    MatrixT<Scalar> f = MatrixT<Scalar>::Zero(2 * m, 1);
    const VectorT<Scalar> v = forcing(tau);
    if (v.size() != m) throw InputError("propagate: forcing has wrong dimension");
    f.bottomRows(m) = v;
    return f;
  };
  MatrixT<Scalar> x = U0;
  auto s0 = detail::stage_at(op, s);
  MatrixT<Scalar> f0 = lift(s);
  for (int k = 0; k < n; ++k) {
    const double tk = s + k * step;
    const double tk1 = (k + 1 == n) ? t : tk + step;
    const auto sh = detail::stage_at(op, tk + 0.5 * step);
    auto s1 = detail::stage_at(op, tk1);
    const MatrixT<Scalar> fh = lift(tk + 0.5 * step);
    MatrixT<Scalar> f1 = lift(tk1);
    detail::rk4_step(s0, sh, s1, step, x, &f0, &fh, &f1);
    if (!x.allFinite()) throw PropagationError("propagate: non-finite state", k, tk1);
    s0 = std::move(s1);
    f0 = std::move(f1);
  }
  return x;
}

struct FundamentalOptions {
  double h = 1e-3;
  std::size_t max_table_bytes = std::size_t{1} << 30;
  bool validate_step = true;
};

/// Tabulated evolution family E(t_i, t_j), j <= i, on a uniform grid. Blocks:
///   undamped: E = (C  S; dC/dt  dS/dt)      damped: E = (v1 v2; v3 v4)
template <class Scalar>
class BasicFundamentalSolution {
 public:
  using Mat = MatrixT<Scalar>;

  BasicFundamentalSolution() = default;
  BasicFundamentalSolution(BlockKind kind, int m, TimeGrid grid, double h)
      : kind_(kind), m_(m), grid_(grid), h_(h), table_(pair_count(grid.size())) {}

  BlockKind kind() const noexcept { return kind_; }
  int modes() const noexcept { return m_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t nodes() const noexcept { return grid_.size(); }
  double step() const noexcept { return h_; }

  const Mat& E(std::size_t i, std::size_t j) const { return table_.at(index(i, j)); }
  Mat& E(std::size_t i, std::size_t j) { return table_.at(index(i, j)); }

  auto C(std::size_t i, std::size_t j) const { return E(i, j).topLeftCorner(m_, m_); }
  auto S(std::size_t i, std::size_t j) const { return E(i, j).topRightCorner(m_, m_); }
  auto dC(std::size_t i, std::size_t j) const { return E(i, j).bottomLeftCorner(m_, m_); }
  auto dS(std::size_t i, std::size_t j) const { return E(i, j).bottomRightCorner(m_, m_); }
  auto v1(std::size_t i, std::size_t j) const { return C(i, j); }
  auto v2(std::size_t i, std::size_t j) const { return S(i, j); }
  auto v3(std::size_t i, std::size_t j) const { return dC(i, j); }
  auto v4(std::size_t i, std::size_t j) const { return dS(i, j); }

  /// Backward one-step maps E(t_i, t_{i+1}) = E(t_{i+1}, t_i)^{-1}; filled by prepare().
  const Mat& backward(std::size_t i) const { return backward_.at(i); }
  bool prepared() const noexcept { return backward_.size() + 1 == grid_.size(); }
  void prepare() {
    backward_.clear();
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) backward_.push_back(E(i + 1, i).partialPivLu().inverse());
  }

  static std::size_t pair_count(std::size_t n) { return n * (n + 1) / 2; }
  static std::size_t table_bytes(std::size_t n, int m) {
    return pair_count(n) * static_cast<std::size_t>(4) * m * m * sizeof(Scalar);
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (j > i || i >= grid_.size()) throw InputError("FundamentalSolution: pair outside {s <= t}");
    return i * (i + 1) / 2 + j;
  }

  BlockKind kind_ = BlockKind::undamped;
  int m_ = 0;
  TimeGrid grid_;
  double h_ = 0.0;
  std::vector<Mat> table_;
  std::vector<Mat> backward_;
};

using FundamentalSolution = BasicFundamentalSolution<double>;

/// Builds E(t_i, t_j) for all j <= i. Each grid interval is integrated once
/// with RK4 (steps of at most h) on the identity, and the table is filled by
/// chaining the interval propagators; this is the same linear map as RK4
/// propagation of unit data from t_j on the shared step lattice.
template <class Scalar>
BasicFundamentalSolution<Scalar> fundamental_solution(const BasicBlockOperator<Scalar>& op, const TimeGrid& grid,
                                                      const FundamentalOptions& opts = {}) {
  using Mat = MatrixT<Scalar>;
  const int m = op.m;
  if (m < 1) throw InputError("fundamental_solution: empty operator");
  const std::size_t n = grid.size();
  if (BasicFundamentalSolution<Scalar>::table_bytes(n, m) > opts.max_table_bytes)
    throw ConfigError("fundamental_solution: table of " +
                      std::to_string(BasicFundamentalSolution<Scalar>::table_bytes(n, m)) +
                      " bytes exceeds the configured cap");
  if (opts.validate_step) validate_step(op, std::min(opts.h, grid.step()), grid.nodes());

  BasicFundamentalSolution<Scalar> fs(op.kind, m, grid, opts.h);
  const Mat id = Mat::Identity(2 * m, 2 * m);
  std::vector<Mat> interval(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const int steps = detail::steps_for(grid[i + 1] - grid[i], opts.h);
    try {
      interval[i] = detail::propagate_block<Scalar>(op, grid[i], grid[i + 1], steps, id);
    } catch (const PropagationError& e) {
      throw PropagationError("fundamental_solution: propagation failed on interval " + std::to_string(i) + " (" +
                                 e.what() + ")",
                             e.step(), e.time());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    fs.E(i, i) = id;
    for (std::size_t j = 0; j < i; ++j) {
      fs.E(i, j).noalias() = interval[i - 1] * fs.E(i - 1, j);
      if (!fs.E(i, j).allFinite())
        throw PropagationError("fundamental_solution: non-finite block at (t, s) = (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")",
                               static_cast<long>(i), grid[i]);
    }
  }
  fs.prepare();
  return fs;
}

/// Defects of the fundamental-solution identities. Defects use the Frobenius
/// norm (an upper bound for the operator norm); Lipschitz constants and sup
/// norms use the operator 2-norm.
struct AxiomReport {
  double s1_boundary = 0.0;      ///< S(t,t)=0, C(t,t)=I, dS(t,t)=I, dC(t,t)=0
  double s1_velocity = 0.0;      ///< d/dt S - dS
  double s1_c_definition = 0.0;  ///< d/ds S + C - S B(s)   (C = -dS/ds when undamped)
  double s2a = 0.0;              ///< d/dt dS + A(t) S + B(t) dS
  double s2b = 0.0;              ///< d/ds C - S A(s)       (d2/ds2 S = -S A(s) when undamped)
  double s2c = 0.0;              ///< mixed derivative of S at t = s
  double s3a = 0.0;              ///< d/dt dC + A(t) C + B(t) dC
  double s3b = 0.0;              ///< d/ds dC - dS A(s)
  double s4 = 0.0;               ///< C(t,s)S(s,r) + S(t,s) dS(s,r) - S(t,r)
  double composition = 0.0;      ///< E(t,r) - E(t,s)E(s,r)
  double lipschitz_S = 0.0;      ///< M_1 in ||S(t1,s) - S(t2,s)|| <= M_1 |t1 - t2|
  double lipschitz_C = 0.0;      ///< C_1 in ||C(t1,s) - C(t2,s)|| <= C_1 |t1 - t2|
  double sup_S = 0.0, sup_C = 0.0, sup_dS = 0.0, sup_dC = 0.0;
  double fd_delta = 0.0;
  std::size_t triples = 0;

  double max_derivative_defect() const {
    return std::max({s1_velocity, s1_c_definition, s2a, s2b, s2c, s3a, s3b});
  }
};

struct AxiomOptions {
  double fd_delta = 5e-4;  ///< finite-difference step for the derivative identities
  int local_substeps = 2;  ///< RK4 steps per fd_delta when refining off the grid
};

namespace detail {

/// First-derivative weights for five-point stencils at offsets `off` (in units of delta).
struct Stencil {
  std::array<int, 5> offsets;
  std::array<double, 5> weights;  // divide by 12 delta
};
inline Stencil centered_stencil() { return {{-2, -1, 0, 1, 2}, {1.0, -8.0, 0.0, 8.0, -1.0}}; }
inline Stencil forward_stencil() { return {{0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0}}; }
inline Stencil backward_stencil() { return {{-4, -3, -2, -1, 0}, {3.0, -16.0, 36.0, -48.0, 25.0}}; }

inline Stencil stencil_for(double t, double delta, double lo, double hi) {
  if (t - 2.0 * delta < lo - 1e-14) return forward_stencil();
  if (t + 2.0 * delta > hi + 1e-14) return backward_stencil();
  return centered_stencil();
}

}  // namespace detail

/// Checks the fundamental-solution identities on the stored table. Derivatives
/// are five-point finite differences whose off-grid values come from short
/// RK4 refinements of the stored blocks.
template <class Scalar>
AxiomReport check_axioms(const BasicFundamentalSolution<Scalar>& fs, const BasicBlockOperator<Scalar>& op,
                         const AxiomOptions& opts = {}) {
  using Mat = MatrixT<Scalar>;
  const std::size_t n = fs.nodes();
  if (n < 4) throw ConfigError("check_axioms: need a grid with at least 4 nodes");
  const int m = fs.modes();
  const auto& grid = fs.grid();
  const double delta = opts.fd_delta;
  const double lo = grid.start(), hi = grid.end();
  const Mat id = Mat::Identity(2 * m, 2 * m);
  AxiomReport rep;
  rep.fd_delta = delta;

  // Per node: D_i ~ d/dt E(t, t_i)|_{t = t_i} from local propagators, so that
  // d/dt E(t_i, t_j) = D_i E(i, j); and R_j ~ d/ds E(t_j, s)|_{s = t_j}, so that
  // d/ds E(t_i, t_j) = E(i, j) R_j.
  std::vector<Mat> dt_gen(n), ds_gen(n), a_at(n), b_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid[i];
    const auto st = detail::stencil_for(t, delta, lo, hi);
    Mat dt = Mat::Zero(2 * m, 2 * m), ds = Mat::Zero(2 * m, 2 * m);
    for (int k = 0; k < 5; ++k) {
      const int off = st.offsets[k];
      if (off == 0) {
        dt += st.weights[k] * id;
        ds += st.weights[k] * id;
        continue;
      }
      const Mat phi = detail::propagate_block<Scalar>(op, t, t + off * delta,
                                                      opts.local_substeps * std::abs(off), id);
      dt += st.weights[k] * phi;
      // E(t_i, t_i + off*delta) is the inverse of E(t_i + off*delta, t_i).
      ds += st.weights[k] * Mat(phi.partialPivLu().inverse());
    }
    dt_gen[i] = dt / (12.0 * delta);
    ds_gen[i] = ds / (12.0 * delta);
    a_at[i] = op.stiffness(t);
    b_at[i] = op.damping(t);
  }

  auto block = [m](const Mat& e, int r, int c) { return e.block(r * m, c * m, m, m); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const Mat& e = fs.E(i, j);
      const Mat dte = dt_gen[i] * e;
      const Mat dse = e * ds_gen[j];
      const Mat C = block(e, 0, 0), S = block(e, 0, 1), dC = block(e, 1, 0), dS = block(e, 1, 1);
      const Mat& At = a_at[i];
      const Mat& Bt = b_at[i];
      const Mat& As = a_at[j];
      const Mat& Bs = b_at[j];
      rep.s1_velocity = std::max(rep.s1_velocity, (block(dte, 0, 1) - dS).norm());
      rep.s1_c_definition = std::max(rep.s1_c_definition, (block(dse, 0, 1) + C - S * Bs).norm());
      rep.s2a = std::max(rep.s2a, (block(dte, 1, 1) + At * S + Bt * dS).norm());
      rep.s2b = std::max(rep.s2b, (block(dse, 0, 0) - S * As).norm());
      rep.s3a = std::max(rep.s3a, (block(dte, 1, 0) + At * C + Bt * dC).norm());
      rep.s3b = std::max(rep.s3b, (block(dse, 1, 0) - dS * As).norm());
      if (i == j) {
        rep.s1_boundary = std::max({rep.s1_boundary, S.norm(), (C - Mat::Identity(m, m)).norm(),
                                    (dS - Mat::Identity(m, m)).norm(), dC.norm()});
        // d/dt (d/ds S) at t = s equals B(s) (zero when undamped).
        const Mat mixed = -block(dte, 0, 0) + block(dte, 0, 1) * Bs;
        rep.s2c = std::max(rep.s2c, (mixed - Bs).norm());
      }
      rep.sup_S = std::max(rep.sup_S, op_norm(S));
      rep.sup_C = std::max(rep.sup_C, op_norm(C));
      rep.sup_dS = std::max(rep.sup_dS, op_norm(dS));
      rep.sup_dC = std::max(rep.sup_dC, op_norm(dC));
      if (i > j || (i == j && i + 1 < n)) {
        // Lipschitz in t over consecutive nodes (t_i, t_{i+1}) with s = t_j.
        if (i + 1 < n) {
          const Mat& e1 = fs.E(i + 1, j);
          const double dt = grid[i + 1] - grid[i];
          rep.lipschitz_S = std::max(rep.lipschitz_S, op_norm(Mat(block(e1, 0, 1) - S)) / dt);
          rep.lipschitz_C = std::max(rep.lipschitz_C, op_norm(Mat(block(e1, 0, 0) - C)) / dt);
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t r = 0; r <= j; ++r) {
        const Mat& ets = fs.E(i, j);
        const Mat& esr = fs.E(j, r);
        const Mat& etr = fs.E(i, r);
        const Mat prod = ets * esr;
        rep.composition = std::max(rep.composition, (etr - prod).norm());
        rep.s4 = std::max(rep.s4, (block(prod, 0, 1) - block(etr, 0, 1)).norm());
        ++rep.triples;
      }
  return rep;
}

/// max over stored pairs of ||S(t,s)^H - S_r(T - s, T - t)|| (operator norm),
/// where fs_r is the fundamental solution of the returned adjoint on the same grid.
template <class Scalar>
double adjoint_defect(const BasicFundamentalSolution<Scalar>& fs, const BasicFundamentalSolution<Scalar>& fs_r) {
  if (fs.modes() != fs_r.modes() || fs.nodes() != fs_r.nodes())
    throw InputError("adjoint_check: dimension mismatch between the two fundamental solutions");
  if (fs.kind() != BlockKind::undamped || fs_r.kind() != BlockKind::undamped)
    throw InputError("adjoint_check: requires undamped fundamental solutions");
  const std::size_t last = fs.nodes() - 1;
  double worst = 0.0;
  for (std::size_t i = 0; i <= last; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const MatrixT<Scalar> d = fs.S(i, j).adjoint() - fs_r.S(last - j, last - i);
      worst = std::max(worst, op_norm(d));
    }
  return worst;
}

/// Builds the returned adjoint's fundamental solution on the same grid and
/// compares it with fs.
template <class Scalar>
double adjoint_check(const BasicFundamentalSolution<Scalar>& fs, const BasicBlockOperator<Scalar>& op,
                     const FundamentalOptions& opts = {}) {
  if (op.m != fs.modes()) throw InputError("adjoint_check: operator dimension does not match");
  const auto fs_r = fundamental_solution(returned_adjoint(op), fs.grid(), opts);
  return adjoint_defect(fs, fs_r);
}

// Binary table dump: little-endian.
//   char[8]  magic "NLWAVEFS"
//   uint32   version (1)
//   uint32   kind (0 undamped, 1 damped)
//   uint64   m
//   uint64   node count N
//   f64[N]   grid nodes
//   f64      RK4 step h
//   for i in [0, N), j in [0, i]: f64[2m * 2m] row-major E(t_i, t_j)
namespace detail {

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &value, sizeof(T));
    std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
  } else {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <class T>
T read_le(std::istream& is) {
  T value{};
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InputError("fundamental solution dump: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  std::memcpy(&value, b, sizeof(T));
  return value;
}

inline constexpr char kDumpMagic[8] = {'N', 'L', 'W', 'A', 'V', 'E', 'F', 'S'};

}  // namespace detail

inline void dump_fundamental_solution(const FundamentalSolution& fs, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.write(detail::kDumpMagic, 8);
  detail::write_le<std::uint32_t>(os, 1);
  detail::write_le<std::uint32_t>(os, fs.kind() == BlockKind::undamped ? 0 : 1);
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(fs.modes()));
  detail::write_le<std::uint64_t>(os, fs.nodes());
  for (std::size_t i = 0; i < fs.nodes(); ++i) detail::write_le<double>(os, fs.grid()[i]);
  detail::write_le<double>(os, fs.step());
  for (std::size_t i = 0; i < fs.nodes(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const Matrix& e = fs.E(i, j);
      for (Eigen::Index r = 0; r < e.rows(); ++r)
        for (Eigen::Index c = 0; c < e.cols(); ++c) detail::write_le<double>(os, e(r, c));
    }
  if (!os) throw ConfigError("failed writing " + path);
}

inline FundamentalSolution load_fundamental_solution(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, detail::kDumpMagic, 8) != 0)
    throw InputError(path + ": not a fundamental solution dump");
  if (detail::read_le<std::uint32_t>(is) != 1) throw InputError(path + ": unsupported dump version");
  const auto kind = detail::read_le<std::uint32_t>(is) == 0 ? BlockKind::undamped : BlockKind::damped;
  const auto m = static_cast<int>(detail::read_le<std::uint64_t>(is));
  const auto n = detail::read_le<std::uint64_t>(is);
  if (m < 1 || n < 2) throw InputError(path + ": invalid dimensions");
  std::vector<double> nodes(n);
  for (auto& t : nodes) t = detail::read_le<double>(is);
  const double h = detail::read_le<double>(is);
  FundamentalSolution fs(kind, m, TimeGrid(nodes.front(), nodes.back(), static_cast<int>(n - 1)), h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      Matrix e(2 * m, 2 * m);
      for (Eigen::Index r = 0; r < e.rows(); ++r)
        for (Eigen::Index c = 0; c < e.cols(); ++c) e(r, c) = detail::read_le<double>(is);
      fs.E(i, j) = std::move(e);
    }
  fs.prepare();
  return fs;
}

}  // namespace nlwave
