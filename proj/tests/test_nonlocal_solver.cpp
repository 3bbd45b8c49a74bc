#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace nlwave;
using std::numbers::pi;

namespace {

/// u'' + u = 0 on one constant mode, u(0) = gamma int_0^T u ds + beta, u'(0) = 0.
SemilinearProblem affine_toy(double gamma, double beta = 1.0, double T = pi / 2) {
  SemilinearProblem p;
  p.basis = std::make_shared<const SpectralBasis>(SpatialDomain::interval(pi), 1);
  p.op = constant_operator<double>(Matrix::Identity(1, 1), std::nullopt, 0.0, T);
  p.k1 = {NamedExpression(IniDocument::format_number(gamma)), std::nullopt};
  p.offset1 = Vector::Constant(1, beta);
  p.horizon = T;
  return p;
}

Trajectory constant_trajectory(const TimeGrid& g, const Vector& u) {
  Trajectory tr;
  for (double t : g.nodes()) {
    tr.time.push_back(t);
    tr.u.push_back(u);
    tr.v.push_back(Vector::Zero(u.size()));
  }
  return tr;
}

}  // namespace

TEST(Kernel, AveragingAConstant) {
  const double T = 2.0;
  const SpectralBasis b(SpatialDomain::interval(pi), 4);
  const NonlocalKernel k{"1/2", std::nullopt};
  Vector one = Vector::Zero(4);
  one[0] = std::sqrt(pi);  // the function 1
  const Vector g = apply_kernel(k, constant_trajectory(TimeGrid::on(T, 10), one), b);
  EXPECT_LT((g - one).norm(), 1e-13);
}

TEST(Kernel, ZeroKernelReturnsOffset) {
  const SpectralBasis b(SpatialDomain::interval(pi), 4);
  const NonlocalKernel k{"0", NamedExpression("cos(x)")};
  const Vector g = apply_kernel(k, constant_trajectory(TimeGrid::on(1.0, 4), Vector::Ones(4)), b);
  EXPECT_NEAR(g[1], std::sqrt(pi / 2.0), 1e-13);
  EXPECT_NEAR(g[0], 0.0, 1e-13);
}

TEST(Kernel, IntegratesCosine) {
  const double gamma = 0.7;
  const SpectralBasis b(SpatialDomain::interval(pi), 1);
  const TimeGrid grid = TimeGrid::on(pi / 2, 100);
  Trajectory tr;
  for (double s : grid.nodes()) {
    tr.time.push_back(s);
    tr.u.push_back(Vector::Constant(1, std::cos(s)));
    tr.v.push_back(Vector::Zero(1));
  }
  EXPECT_NEAR(apply_kernel({"0.7", std::nullopt}, tr, b)[0], gamma, 1e-8);
}

TEST(Kernel, RejectsCoarseGrid) {
  const SpectralBasis b(SpatialDomain::interval(pi), 1);
  EXPECT_THROW(apply_kernel({"1", std::nullopt}, constant_trajectory(TimeGrid::on(1.0, 1), Vector::Ones(1)), b),
               ConfigError);
}

TEST(KernelLipschitz, Examples) {
  const SpectralBasis b(SpatialDomain::interval(pi), 8);
  const double T = 2.0;
  const auto zero = kernel_lipschitz({"0", std::nullopt}, b, T);
  EXPECT_EQ(zero.into_h, 0.0);
  EXPECT_EQ(zero.gradient, 0.0);
  EXPECT_NEAR(kernel_lipschitz({"1/2", std::nullopt}, b, T).into_h, 1.0 / std::sqrt(T), 1e-12);
  // |d/dx cos(x)/T| = |sin x| / T, sup 1/T.
  EXPECT_NEAR(kernel_lipschitz({"cos(x)/2", std::nullopt}, b, T).gradient, 1.0 / std::sqrt(T), 1e-6);
}

TEST(Nonlinearity, Examples) {
  const SpectralBasis b(SpatialDomain::interval(pi), 6);
  std::mt19937_64 rng(4);
  const TimeGrid g = TimeGrid::on(1.0, 5);
  Trajectory tr;
  for (double t : g.nodes()) {
    tr.time.push_back(t);
    tr.u.push_back(fixtures::random_vector(6, rng));
    tr.v.push_back(Vector::Zero(6));
  }
  for (const auto& v : superpose(pointwise_nonlinearity(Profile::zero, b), tr).values) EXPECT_EQ(v.norm(), 0.0);
  const auto id = superpose(pointwise_nonlinearity(Profile::identity, b), tr);
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_EQ((id.values[i] - tr.u[i]).norm(), 0.0);
  const auto s = superpose(pointwise_nonlinearity(Profile::sin, b, 1.0, NonlinearityKind::sublinear_growth), tr);
  EXPECT_FALSE(s.growth_violation);
  EXPECT_TRUE(verify_nonlinearity(pointwise_nonlinearity(Profile::sin, b), 6, 1.0, 17).ok);
}

TEST(Nonlinearity, DetectsUnderstatedConstants) {
  const SpectralBasis b(SpatialDomain::interval(pi), 4);
  Nonlinearity f = pointwise_nonlinearity(Profile::identity, b, 2.0);
  f.growth_a = f.lipschitz = 1.0;  // the truth is 2
  EXPECT_FALSE(verify_nonlinearity(f, 4, 1.0, 3).ok);
  Trajectory tr = constant_trajectory(TimeGrid::on(1.0, 2), Vector::Ones(4));
  EXPECT_TRUE(superpose(f, tr).growth_violation);
}

TEST(Contraction, AffineToyFixedPoint) {
  const auto p = affine_toy(0.5);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 200));
  const auto [u, rep] = contraction_solve(p, fs);
  ASSERT_TRUE(rep.converged) << rep.message;
  EXPECT_NEAR(u.u[0][0], 2.0, 1e-8);
  for (std::size_t i = 0; i < u.size(); i += 20) EXPECT_NEAR(u.u[i][0], 2.0 * std::cos(u.time[i]), 1e-8);
  EXPECT_NEAR(rep.predicted_q, 0.5 * (pi / 2), 1e-6);
  EXPECT_NEAR(rep.M1, 1.0, 1e-9);
  EXPECT_LE(rep.measured_ratio, rep.predicted_q + 0.02);
  EXPECT_EQ(rep.partition.size(), 2u);
}

TEST(Contraction, UncoupledToyIsImmediate) {
  const auto p = affine_toy(0.0);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 100));
  const auto [u, rep] = contraction_solve(p, fs);
  ASSERT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  for (std::size_t i = 0; i < u.size(); i += 10) EXPECT_NEAR(u.u[i][0], std::cos(u.time[i]), 1e-8);
}

TEST(Contraction, PartitionWhenCoefficientExceedsOne) {
  // gamma = 3/4: q = 3 pi / 8 > 1; the affine fixed point u(0) = 1 / (1 - 3/4) = 4.
  const auto p = affine_toy(0.75);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 200));
  const auto [u, rep] = contraction_solve(p, fs);
  ASSERT_TRUE(rep.converged) << rep.message;
  EXPECT_GE(rep.predicted_q, 1.0);
  EXPECT_LT(rep.T_star, p.horizon);
  EXPECT_GT(rep.partition.size(), 2u);
  EXPECT_NEAR(u.u[0][0], 4.0, 1e-6);
}

TEST(Contraction, DivergenceIsReported) {
  // gamma sin T = 3/2 > 1: the data map is expanding.
  const auto p = affine_toy(1.5);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 50));
  SolverSettings s;
  s.max_iter = 40;
  const auto [u, rep] = contraction_solve(p, fs, s);
  EXPECT_FALSE(rep.converged);
  EXPECT_FALSE(rep.message.empty());
  EXPECT_EQ(static_cast<int>(rep.updates.size()), rep.iterations);
}

TEST(Contraction, RequiresLipschitzNonlinearity) {
  auto p = affine_toy(0.5);
  p.f.kind = NonlinearityKind::sublinear_growth;
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 10));
  EXPECT_THROW(contraction_solve(p, fs), ConfigError);
}

TEST(Relaxed, ConstantDataInOneStep) {
  const auto p = affine_toy(0.0, 0.8);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 40));
  const auto [u, rep] = relaxed_solve(p, fs);
  ASSERT_TRUE(rep.converged);
  ASSERT_GE(rep.updates.size(), 2u);
  EXPECT_EQ(rep.updates[1], 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(u.u[i][0], (fs.C(i, 0) * p.offset1.value())[0]);
}

TEST(Relaxed, HomotopyStartIsZero) {
  const auto p = affine_toy(0.5);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 20));
  const FixedPointMap map(p, fs);
  const Trajectory w = map.apply(map.zero(), 0.0);
  EXPECT_EQ(sup_norm(w), 0.0);
}

TEST(Relaxed, UndampedNeumannAtEightModes) {
  const Scenario sc = scenario_undamped_neumann();
  const Instance inst = instantiate(sc, 8);
  const auto fs = fundamental_solution(inst.problem.op, TimeGrid::on(1.0, 200), {sc.disc.h});
  const auto [u, rep] = relaxed_solve(inst.problem, fs, sc.solver);
  ASSERT_TRUE(rep.converged) << rep.message;
  EXPECT_LT(rep.residual_g, 1e-6);
  EXPECT_LT(rep.residual_h, 1e-6);
  EXPECT_TRUE(rep.inside_ball);
  EXPECT_LE(rep.max_iterate_norm, rep.gronwall_bound);
  EXPECT_NEAR(rep.Lg, 0.5, 1e-12);
  EXPECT_EQ(rep.candidates.size(), 1u);
}

TEST(Relaxed, ContinuationReportsReachedLambda) {
  // Expanding data map: direct iteration stalls, and no lambda near 1 is reachable either.
  const auto p = affine_toy(1.5);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 20));
  SolverSettings s;
  s.max_iter = 60;
  const auto [u, rep] = relaxed_solve(p, fs, s);
  EXPECT_FALSE(rep.converged);
  EXPECT_LT(rep.lambda_reached, 1.0);
  EXPECT_FALSE(rep.message.empty());
}

// Properties

TEST(NonlocalProperty, ContractionHonesty) {
  for (double gamma : {0.1, 0.3, 0.5, 0.6}) {
    const auto p = affine_toy(gamma);
    const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 100));
    const auto [u, rep] = contraction_solve(p, fs);
    ASSERT_LT(rep.predicted_q, 1.0);
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(rep.measured_ratio, rep.predicted_q + 0.05) << "gamma=" << gamma;
    EXPECT_NEAR(u.u[0][0], 1.0 / (1.0 - gamma), 1e-7);
  }
}

TEST(NonlocalProperty, ConcatenationMatchesSingleInterval) {
  const auto p = affine_toy(0.4);
  const auto fs = fundamental_solution(p.op, TimeGrid::on(p.horizon, 120));
  SolverSettings single, split;
  split.subinterval = p.horizon / 4;
  const auto [a, ra] = contraction_solve(p, fs, single);
  const auto [b, rb] = contraction_solve(p, fs, split);
  ASSERT_TRUE(ra.converged && rb.converged);
  EXPECT_EQ(rb.partition.size(), 5u);
  EXPECT_LT(sup_distance(a, b), 10.0 * single.tol);
}

TEST(NonlocalProperty, CertificateOnConvergedSolutions) {
  const Scenario sc = scenario_population();
  const Instance inst = instantiate(sc, 8);
  const auto fs = fundamental_solution(inst.problem.op, TimeGrid::on(1.0, 200), {sc.disc.h});
  const auto [u, rep] = contraction_solve(inst.problem, fs, sc.solver);
  ASSERT_TRUE(rep.converged);
  EXPECT_LT(rep.residual_g, sc.solver.tol);
  EXPECT_LT(rep.residual_h, sc.solver.tol);
  EXPECT_LT(rep.residual_equation, 1e-4);
  EXPECT_TRUE(rep.inside_ball);
}

TEST(GalerkinRefine, IdenticalLevelsHaveZeroDifference) {
  auto build = [](int m) { return instantiate(scenario_population(), m).problem; };
  RefinementSettings cfg;
  cfg.intervals = 20;
  const auto rows = galerkin_refine(build, {4, 4}, cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].diff_to_previous, 0.0);
  EXPECT_EQ(rows[0].diff_to_finest, 0.0);
  EXPECT_EQ(rows[0].action_diff, 0.0);
  EXPECT_THROW(galerkin_refine(build, {8, 4}, cfg), ConfigError);
  EXPECT_THROW(galerkin_refine(build, {8}, cfg), ConfigError);
}

TEST(GalerkinRefine, DecoupledModesGiveTheTail) {
  // a = c = 1, f = 0, kappa = 0: u = C(t,0) beta decouples; level m misses exactly the modes >= m.
  Scenario sc = scenario_undamped_neumann();
  sc.form.gradient_coef = {"a", "1", 1.0, 1.0};
  sc.nonlinearity = {Profile::zero, 1.0, NonlinearityKind::lipschitz};
  sc.kernel1 = {"0", NamedExpression("exp(cos(x))")};
  sc.kernel2 = {"0", std::nullopt};
  auto build = [&sc](int m) { return instantiate(sc, m).problem; };
  RefinementSettings cfg;
  cfg.intervals = 40;
  cfg.method = SolverMethod::contraction;
  const std::vector<int> ms{2, 4, 8, 16};
  const auto rows = galerkin_refine(build, ms, cfg);
  const auto finest = build(16);
  const auto fs = fundamental_solution(finest.op, TimeGrid::on(1.0, 40));
  const auto [u, rep] = contraction_solve(finest, fs);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    Trajectory tail = u;
    for (auto& x : tail.u) x.head(ms[k]).setZero();
    for (auto& x : tail.v) x.head(ms[k]).setZero();
    EXPECT_NEAR(rows[k].diff_to_finest, l2_distance(tail, Trajectory::zeros(u.time, 16)), 1e-9);
    if (k > 0) EXPECT_LT(rows[k].diff_to_finest, rows[k - 1].diff_to_finest);
  }
}
