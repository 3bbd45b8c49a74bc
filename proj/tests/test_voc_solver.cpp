#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace nlwave;
using std::numbers::pi;

namespace {

LinearProblem scalar_problem(const BlockOperator& op, double u0, double u1, std::function<double(double)> f,
                             double T) {
  LinearProblem p;
  p.op = op;
  p.u0 = Vector::Constant(1, u0);
  p.u1 = Vector::Constant(1, u1);
  if (f) p.forcing = [f](double t) { return Vector::Constant(1, f(t)); };
  p.horizon = T;
  return p;
}

BlockOperator scalar(double a, std::optional<double> b, double T) {
  std::optional<Matrix> bm;
  if (b) bm = Matrix::Constant(1, 1, *b);
  return constant_operator<double>(Matrix::Constant(1, 1, a), bm, 0.0, T);
}

/// A random smooth linear problem: operator from support.hpp, data and a forcing of a few harmonics.
LinearProblem random_problem(int m, std::mt19937_64& rng) {
  LinearProblem p;
  p.op = fixtures::random_operator(m, 1.0, rng);
  p.u0 = fixtures::random_vector(m, rng);
  p.u1 = fixtures::random_vector(m, rng);
  const Vector a = fixtures::random_vector(m, rng), b = fixtures::random_vector(m, rng);
  p.forcing = [a, b](double t) { return (a * std::sin(2.0 * t) + b * std::cos(3.0 * t)).eval(); };
  p.horizon = 1.0;
  return p;
}

}  // namespace

TEST(SolveUndamped, HomogeneousIsExactRepresentation) {
  std::mt19937_64 rng(1);
  LinearProblem p = random_problem(4, rng);
  p.forcing = nullptr;
  const auto fs = fundamental_solution(p.op, TimeGrid::on(1.0, 10));
  const auto tr = solve_undamped(p, fs, fs.grid().nodes());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ((tr.u[i] - (fs.C(i, 0) * p.u0 + fs.S(i, 0) * p.u1)).norm(), 0.0);
    EXPECT_EQ((tr.v[i] - (fs.dC(i, 0) * p.u0 + fs.dS(i, 0) * p.u1)).norm(), 0.0);
  }
}

TEST(SolveUndamped, ConstantForcing) {
  // u'' + u = 1, u(0) = u'(0) = 0: u = 1 - cos t, u(pi) = 2.
  const auto p = scalar_problem(scalar(1.0, std::nullopt, pi), 0.0, 0.0, [](double) { return 1.0; }, pi);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(pi, 100));
  const auto tr = solve_undamped(p, fs, {0.0, pi});
  EXPECT_NEAR(tr.u.back()[0], 2.0, 1e-7);
}

TEST(SolveUndamped, ZeroProblem) {
  const auto p = scalar_problem(scalar(1.0, std::nullopt, 1.0), 0.0, 0.0, nullptr, 1.0);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(1.0, 10));
  EXPECT_EQ(sup_norm(solve_undamped(p, fs, fs.grid().nodes())), 0.0);
}

TEST(SolveUndamped, OutputGridMustBeOnFsGrid) {
  const auto p = scalar_problem(scalar(1.0, std::nullopt, 1.0), 1.0, 0.0, nullptr, 1.0);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(1.0, 10));
  EXPECT_THROW(solve_undamped(p, fs, {0.0, 0.05}), ConfigError);
  const auto damped = fundamental_solution(scalar(1.0, 2.0, 1.0), TimeGrid::on(1.0, 10));
  EXPECT_THROW(solve_undamped(p, damped, {0.0}), InputError);
}

TEST(SolveDamped, CriticallyDamped) {
  const auto p = scalar_problem(scalar(1.0, 2.0, 1.0), 1.0, 0.0, nullptr, 1.0);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(1.0, 10));
  EXPECT_NEAR(solve_damped(p, fs, {1.0}).u[0][0], 2.0 / std::exp(1.0), 1e-7);
}

TEST(SolveDamped, FirstOrderReduction) {
  // u'' + u' = 1: u = t - 1 + e^{-t}, u(1) = 1/e.
  const auto p = scalar_problem(scalar(0.0, 1.0, 1.0), 0.0, 0.0, [](double) { return 1.0; }, 1.0);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(1.0, 100));
  EXPECT_NEAR(solve_damped(p, fs, {1.0}).u[0][0], std::exp(-1.0), 1e-7);
}

TEST(SolveDamped, ZeroDampingMatchesUndamped) {
  std::mt19937_64 rng(2);
  LinearProblem p = random_problem(3, rng);
  LinearProblem q = p;
  q.op.kind = BlockKind::damped;
  q.op.B = [](double) { return Matrix::Zero(3, 3).eval(); };
  const TimeGrid g = TimeGrid::on(1.0, 40);
  const auto a = solve_undamped(p, fundamental_solution(p.op, g), g.nodes());
  const auto b = solve_damped(q, fundamental_solution(q.op, g), g.nodes());
  EXPECT_LT(sup_distance(a, b), 1e-9);
}

TEST(DirectIntegrate, AiryAgreesWithRepresentation) {
  const auto p = scalar_problem(fixtures::airy_operator(1.0), 1.0, 0.5, [](double t) { return std::cos(t); }, 1.0);
  const TimeGrid g = TimeGrid::on(1.0, 100);
  const auto a = solve_undamped(p, fundamental_solution(p.op, g, {1e-3}), g.nodes());
  const auto b = direct_integrate(p, 1e-3, g);
  EXPECT_LT(sup_distance(a, b), 1e-6);
}

TEST(DirectIntegrate, ZeroProblem) {
  const auto p = scalar_problem(fixtures::airy_operator(1.0), 0.0, 0.0, nullptr, 1.0);
  EXPECT_EQ(sup_norm(direct_integrate(p, 1e-2, TimeGrid::on(1.0, 10))), 0.0);
}

TEST(DirectIntegrate, Resonance) {
  // u'' + u = sin t: u = (sin t - t cos t) / 2, u(pi) = pi/2.
  const auto p = scalar_problem(scalar(1.0, std::nullopt, pi), 0.0, 0.0, [](double t) { return std::sin(t); }, pi);
  const auto tr = direct_integrate(p, 1e-3, TimeGrid::on(pi, 10));
  EXPECT_NEAR(tr.u.back()[0], pi / 2.0, 1e-6);
}

TEST(Residual, ClosedFormIsSecondOrder) {
  // u = 1 - cos t solves u'' + u = 1; the residual is the second-difference error only.
  const auto p = scalar_problem(scalar(1.0, std::nullopt, pi), 0.0, 0.0, [](double) { return 1.0; }, pi);
  auto res = [&](int n) {
    Trajectory tr;
    const TimeGrid g = TimeGrid::on(pi, n);
    for (double t : g.nodes()) {
      tr.time.push_back(t);
      tr.u.push_back(Vector::Constant(1, 1.0 - std::cos(t)));
      tr.v.push_back(Vector::Constant(1, std::sin(t)));
    }
    return residual(tr, p).equation;
  };
  double prev = res(25);
  for (int n : {50, 100, 200}) {
    const double r = res(n);
    EXPECT_NEAR(prev / r, 4.0, 0.2) << "n=" << n;
    prev = r;
  }
}

TEST(Residual, SolverOutputConvergesAtStencilOrder) {
  // The residual of an accurate solution is the second-difference floor: 4x per halving.
  std::mt19937_64 rng(3);
  const LinearProblem p = random_problem(6, rng);
  auto res = [&](int n) {
    const TimeGrid g = TimeGrid::on(1.0, n);
    const auto r = residual(solve_undamped(p, fundamental_solution(p.op, g), g.nodes()), p);
    EXPECT_EQ(r.initial_u, 0.0);
    EXPECT_EQ(r.initial_v, 0.0);
    return r.equation;
  };
  double prev = res(100);
  for (int n : {200, 400}) {
    const double r = res(n);
    EXPECT_NEAR(prev / r, 4.0, 0.3) << "n=" << n;
    prev = r;
  }
}

TEST(Residual, ZeroTrajectory) {
  const auto p = scalar_problem(scalar(1.0, std::nullopt, 1.0), 0.0, 0.0, nullptr, 1.0);
  const auto r = residual(Trajectory::zeros(TimeGrid::on(1.0, 10).nodes(), 1), p);
  EXPECT_EQ(r.equation, 0.0);
  EXPECT_EQ(r.initial_u, 0.0);
  EXPECT_EQ(r.initial_v, 0.0);
}

// Properties

TEST(VocProperty, OracleEquivalenceOnRandomProblems) {
  std::mt19937_64 rng(2024);
  const TimeGrid g = TimeGrid::on(1.0, 200);  // default trajectory grid
  for (int trial = 0; trial < 20; ++trial) {
    const LinearProblem p = random_problem(8, rng);
    const auto a = solve_undamped(p, fundamental_solution(p.op, g, {1e-3}), g.nodes());
    const auto b = direct_integrate(p, 1e-3, g);
    EXPECT_LT(sup_distance(a, b), 1e-6) << "trial " << trial;
  }
}

TEST(VocProperty, Linearity) {
  std::mt19937_64 rng(5);
  const TimeGrid g = TimeGrid::on(1.0, 30);
  LinearProblem p1 = random_problem(5, rng);
  LinearProblem p2 = random_problem(5, rng);
  p2.op = p1.op;
  const auto fs = fundamental_solution(p1.op, g);
  const double al = 1.7, be = -0.4;
  LinearProblem p = p1;
  p.u0 = al * p1.u0 + be * p2.u0;
  p.u1 = al * p1.u1 + be * p2.u1;
  p.forcing = [&](double t) { return (al * p1.f(t) + be * p2.f(t)).eval(); };
  const auto a = solve_undamped(p1, fs, g.nodes()), b = solve_undamped(p2, fs, g.nodes());
  const auto c = solve_undamped(p, fs, g.nodes());
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    worst = std::max(worst, (c.u[i] - al * a.u[i] - be * b.u[i]).norm());
    worst = std::max(worst, (c.v[i] - al * a.v[i] - be * b.v[i]).norm());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(VocProperty, GronwallBoundForLinearTrajectories) {
  // f(t, u) = F(t) has a = 0 and b = ||F||: bound M1 r1 + M2 r2 + M2 ||b||_L1.
  std::mt19937_64 rng(8);
  const TimeGrid g = TimeGrid::on(1.0, 50);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearProblem p = random_problem(5, rng);
    const auto fs = fundamental_solution(p.op, g);
    const PropagatorNorms n(fs);
    const auto w = composite_weights(0, g.size() - 1, g.step());
    double b_l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) b_l1 += w[i] * p.f(g[i]).norm();
    const double bound = gronwall_bound(n.sup_uu(0, g.size() - 1), n.sup_uv_all(), p.u0.norm(), p.u1.norm(), b_l1, 0.0, 1.0);
    EXPECT_LE(sup_norm(solve_undamped(p, fs, g.nodes())), bound + 1e-9);
  }
}
