#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace nlwave;
using std::numbers::pi;

namespace {

FormSpec form(const std::string& a, const std::string& c, double a_lower = 1e-3) {
  FormSpec f;
  f.gradient_coef = {"a", a, a_lower};
  f.zeroth_coef = {"c", c, -1e300};
  f.horizon = 1.0;
  return f;
}

double rayleigh_min(const Matrix& a, const SpectralBasis& b, double shift) {
  const Vector s = b.v_weights().cwiseSqrt().cwiseInverse();
  const Matrix m = s.asDiagonal() * (a + shift * Matrix::Identity(a.rows(), a.cols())) * s.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose())).eigenvalues()[0];
}

}  // namespace

TEST(Assemble, LaplacianIsDiagonal) {
  const SpectralBasis b(SpatialDomain::interval(pi), 3);
  const Matrix a = assemble(form("1", "0"), b, 0.5).entries;
  EXPECT_LT((a - fixtures::diag({0, 1, 4})).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, ZerothOrderShift) {
  const SpectralBasis b(SpatialDomain::interval(pi), 3);
  const Matrix a = assemble(form("1", "1"), b, 0.0).entries;
  EXPECT_LT((a - fixtures::diag({1, 2, 5})).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, TimeDependentScalarFactor) {
  const SpectralBasis b(SpatialDomain::interval(pi), 3);
  const Matrix a = assemble(form("1 + t", "0"), b, 1.0).entries;
  EXPECT_LT((a - fixtures::diag({0, 2, 8})).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, RectangleLaplacian) {
  const SpectralBasis b(SpatialDomain::rectangle(pi, pi), 6);
  const Matrix a = assemble(form("1", "0"), b, 0.0).entries;
  EXPECT_LT((a - Matrix(b.eigenvalues().asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assemble, NonFiniteCoefficientNamesIt) {
  const SpectralBasis b(SpatialDomain::interval(pi), 3);
  try {
    assemble(form("1", "exp(1000*x)"), b, 0.0);
    FAIL() << "expected AssemblyError";
  } catch (const AssemblyError& e) {
    EXPECT_NE(std::string(e.what()).find("'c'"), std::string::npos);
  }
  EXPECT_THROW(assemble(form("1", "0"), b, 2.0), InputError);
}

TEST(BuildAm, FullSubspaceIsIdentity) {
  const SpectralBasis b(SpatialDomain::interval(pi), 5);
  const auto a = assemble(form("1 + 0.3*cos(x)", "1"), b, 0.2);
  EXPECT_EQ((build_Am(a, b, 5, 0.7).entries - a.entries).norm(), 0.0);
}

TEST(BuildAm, ComplementBlock) {
  const SpectralBasis b(SpatialDomain::interval(pi), 3);
  const OperatorMatrix a{fixtures::diag({0, 1, 4}), 0.0};
  EXPECT_LT((build_Am(a, b, 2, 1.0).entries - fixtures::diag({0, 1, 5})).norm(), 1e-14);
  EXPECT_THROW(build_Am(a, b, 0, 1.0), ConfigError);
  EXPECT_THROW(build_Am(a, b, 4, 1.0), ConfigError);
}

TEST(BuildAm, ActsAsProjectedOperatorOnSubspace) {
  std::mt19937_64 rng(3);
  const SpectralBasis b(SpatialDomain::interval(pi), 8);
  const auto a = assemble(form("1 + 0.3*cos(x) + 0.2*t", "0.5 + 0.1*cos(2*x)"), b, 0.4);
  const auto am = build_Am(a, b, 5, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    Vector u = fixtures::random_vector(8, rng);
    u.tail(3).setZero();
    Vector pau = a.entries * u;
    pau.tail(3).setZero();
    EXPECT_LT((am.entries * u - pau).norm(), 1e-12);
  }
}

TEST(Certify, ShiftedCoercivity) {
  const SpectralBasis b(SpatialDomain::interval(pi), 8);
  CertifyOptions o;
  o.shift = 1.0;
  const auto c = certify(form("2", "1"), b, o);
  // (2 lambda + 1 + 1) / (1 + lambda) = 2 for every mode.
  EXPECT_GE(c.coercivity_alpha, 1.0);
  EXPECT_NEAR(c.coercivity_alpha, 2.0, 1e-10);
  EXPECT_EQ(c.shift, 1.0);
  // Unshifted: min over k of (2 lambda_k + 1) / (1 + lambda_k) = 1 at lambda = 0.
  EXPECT_NEAR(certify(form("2", "1"), b).coercivity_alpha, 1.0, 1e-10);
}

TEST(Certify, AutonomousFormHasNoModulus) {
  const SpectralBasis b(SpatialDomain::interval(pi), 6);
  const auto c = certify(form("1 + 0.5*cos(x)", "1"), b);
  for (double w : c.omega_value) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(c.dini_integral_1, 0.0);
  EXPECT_EQ(c.dini_integral_2, 0.0);
}

TEST(Certify, LinearModulusForLinearCoefficient) {
  // A(t) - A(s) = (t - s) diag(lambda_k): V -> V' norm is |t - s| max lambda / (1 + lambda).
  const int m = 6;
  const SpectralBasis b(SpatialDomain::interval(pi), m);
  const auto c = certify(form("1 + t", "1"), b);  // c = 1 keeps the constant mode coercive
  const double lmax = b.eigenvalue(m - 1);
  const double slope = lmax / (1.0 + lmax);
  ASSERT_FALSE(c.omega_delta.empty());
  for (std::size_t k = 0; k < c.omega_delta.size(); ++k)
    EXPECT_NEAR(c.omega_value[k] / c.omega_delta[k], slope, 1e-8 * slope);
  EXPECT_NEAR(c.omega_exponent, 1.0, 1e-6);
  EXPECT_FALSE(c.dini_divergence_flag);
}

TEST(Certify, ViolationReportsWitness) {
  const SpectralBasis b(SpatialDomain::interval(pi), 4);
  try {
    certify(form("t - 0.5", "0", 0.0), b);
    FAIL() << "expected CertificationError";
  } catch (const CertificationError& e) {
    ASSERT_TRUE(e.coefficient_witness().has_value());
    EXPECT_EQ(e.coefficient_witness()->symbol, "a");
    EXPECT_LE(e.coefficient_witness()->value, 0.0);
    EXPECT_LE(e.coefficient_witness()->t, 0.5);
  }
  // Declared lower bound 1 but a dips to 0.5.
  EXPECT_THROW(certify(form("1 - t/2", "0", 1.0), b), CertificationError);
}

TEST(Certify, SquareRootPropertyRecorded) {
  const SpectralBasis b(SpatialDomain::interval(pi), 4);
  EXPECT_NE(certify(form("1", "1"), b).square_root_property.find("construction"), std::string::npos);
}

// Properties on the shipped scenarios' forms.

class ShippedForm : public ::testing::TestWithParam<std::string> {};

TEST_P(ShippedForm, BoundHoldsAtRandomTimes) {
  const Scenario sc = scenario_by_name(GetParam());
  const SpectralBasis b(sc.domain, 12);
  const auto cert = certify(sc.form, b, {21, sc.shift});
  const Vector s = b.v_weights().cwiseSqrt().cwiseInverse();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ut(0.0, sc.horizon());
  for (int k = 0; k < 100; ++k) {
    const Matrix a = assemble(sc.form, b, ut(rng)).entries;
    const Matrix w = s.asDiagonal() * a * s.asDiagonal();
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(w).eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_LE(top, cert.bound_C * (1.0 + 1e-8));
  }
}

TEST_P(ShippedForm, CoercivityWitness) {
  const Scenario sc = scenario_by_name(GetParam());
  const SpectralBasis b(sc.domain, 12);
  const auto cert = certify(sc.form, b, {21, sc.shift});
  EXPECT_GT(cert.coercivity_alpha, 0.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(0.0, sc.horizon());
  for (int k = 0; k < 100; ++k) {
    const Vector u = fixtures::random_vector(12, rng);
    const Matrix a = assemble(sc.form, b, ut(rng)).entries;
    const double lhs = u.dot(a * u) + cert.shift * u.squaredNorm();
    EXPECT_GE(lhs, cert.coercivity_alpha * std::pow(norms(b, u).v, 2) - 1e-10);
  }
}

TEST_P(ShippedForm, AssembledMatricesAreSymmetric) {
  const Scenario sc = scenario_by_name(GetParam());
  const SpectralBasis b(sc.domain, 16);
  for (double t : {0.0, 0.37, 1.0}) {
    const Matrix a = assemble(sc.form, b, t).entries;
    EXPECT_LT((a - a.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST_P(ShippedForm, ProjectedOperatorInheritsConstants) {
  const Scenario sc = scenario_by_name(GetParam());
  const SpectralBasis b(sc.domain, 12);
  const auto cert = certify(sc.form, b, {21, sc.shift});
  const Vector s = b.v_weights().cwiseSqrt().cwiseInverse();
  for (int m_sub : {1, 4, 11}) {
    for (double t : cert.sample_times) {
      const auto am = build_Am(assemble(sc.form, b, t), b, m_sub, cert.coercivity_alpha);
      EXPECT_GE(rayleigh_min(am.entries, b, cert.shift), cert.coercivity_alpha - 1e-10);
      const Matrix w = s.asDiagonal() * am.entries * s.asDiagonal();
      EXPECT_LE(op_norm(w), std::max(cert.bound_C, cert.coercivity_alpha) * (1.0 + 1e-10));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Scenarios, ShippedForm, ::testing::Values("undamped_neumann", "population"));
