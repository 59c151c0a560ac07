#include "mpdwg/forms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace mpdwg;

namespace {

const ElementFrame kRef = ElementFrame::from_points(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));

Eigen::VectorXd random_vector(std::mt19937& gen, int n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = d(gen);
  return x;
}

WeakFunctionLocal local_projection(const ScalarField& w, const GradientField& grad, const ElementFrame& f) {
  WeakFunctionLocal v;
  v.v0 = l2_project_element(w, 2, f);
  for (int e = 0; e < 3; ++e) {
    v.vb[e] = l2_project_edge(w, 2, f.edges[e]);
    v.vg[e][0] = l2_project_edge([&](const Vec2& x) { return grad(x).x(); }, 1, f.edges[e]);
    v.vg[e][1] = l2_project_edge([&](const Vec2& x) { return grad(x).y(); }, 1, f.edges[e]);
  }
  return v;
}

const CoefficientField kIdentity = [](const Vec2&) { return Mat2::Identity(); };

}  // namespace

TEST(StabilizerForm, KernelContainsConformingGradients) {
  const ElementFrame f = ElementFrame::from_points(Vec2(0.1, 0.0), Vec2(0.8, 0.3), Vec2(0.2, 0.9));
  const ScalarField w = [](const Vec2& x) { return 0.3 + x.x() * x.y() - 2.0 * x.y() * x.y(); };
  const GradientField gw = [](const Vec2& x) { return Vec2(x.y(), x.x() - 4.0 * x.y()); };
  const Eigen::VectorXd v = local_projection(w, gw, f).flatten();
  EXPECT_NEAR(v.dot(local_s(f, 2) * v), 0.0, 1e-13);
  EXPECT_NEAR(v.dot(local_s(f, 2, true) * v), 0.0, 1e-12);
}

TEST(StabilizerForm, ConstantGradientTraceOnReferenceTriangle) {
  WeakFunctionLocal v = WeakFunctionLocal::zero(2);
  for (int e = 0; e < 3; ++e) v.vg[e][0][0] = 1.0;
  const Eigen::VectorXd x = v.flatten();
  const double expected = (2.0 + std::sqrt(2.0)) / std::sqrt(2.0);
  EXPECT_NEAR(x.dot(local_s(kRef, 2) * x), expected, 1e-13);
}

TEST(StabilizerForm, SymmetricPositiveSemidefinite) {
  std::mt19937 gen(17);
  const Eigen::MatrixXd s = local_s(kRef, 2);
  EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd u = random_vector(gen, s.rows()), v = random_vector(gen, s.rows());
    EXPECT_GE(v.dot(s * v), 0.0);
    EXPECT_NEAR(u.dot(s * v), v.dot(s * u), 1e-12);
  }
}

TEST(HessianForm, QuadraticAgainstConstant) {
  const ElementFrame f = ElementFrame::from_points(Vec2(0.2, 0.1), Vec2(0.9, 0.2), Vec2(0.4, 0.6));
  const WeakFunctionLocal v = local_projection([](const Vec2& x) { return x.x() * x.x(); },
                                               [](const Vec2& x) { return Vec2(2.0 * x.x(), 0.0); }, f);
  for (int r : {0, 1}) {
    const WeakHessianOperator op(f, 2, r);
    const Eigen::VectorXd bv = local_b(op, f, kIdentity) * v.flatten();
    EXPECT_NEAR(bv[0], 2.0 * f.geom.area, 1e-13);
  }
}

TEST(HessianForm, ZeroFunctionGivesZero) {
  const WeakHessianOperator op(kRef, 2, 1);
  const Eigen::MatrixXd b = local_b(op, kRef, kIdentity);
  EXPECT_EQ((b * WeakFunctionLocal::zero(2).flatten()).norm(), 0.0);
}

TEST(HessianForm, MatchesIndependentQuadratureOracle) {
  std::mt19937 gen(23);
  const ElementFrame f = ElementFrame::from_points(Vec2(0.3, 0.3), Vec2(0.7, 0.4), Vec2(0.35, 0.8));
  const CoefficientField a = [](const Vec2& x) {
    Mat2 m;
    m << 2.0 + x.x(), 0.3 * x.y(), 0.3 * x.y(), 1.5 + x.x() * x.y();
    return m;
  };
  const WeakHessianOperator op(f, 2, 1);
  const Eigen::MatrixXd b = local_b(op, f, a);
  const ElementBasis basis = f.basis(1);
  const MappedRule rule = f.rule(8);
  for (int trial = 0; trial < 5; ++trial) {
    const WeakFunctionLocal v = WeakFunctionLocal::unflatten(random_vector(gen, WeakLayout{2}.size()), 2);
    const WeakHessianLocal h = weak_hessian_by_parts(v, 1, f);
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(basis.size());
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec2& x = rule.points[q];
      double sum = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) sum += a(x)(i, j) * evaluate(basis, h[i][j], x);
      oracle += rule.weights[q] * sum * basis.values(x);
    }
    EXPECT_LT((b * v.flatten() - oracle).norm(), 1e-11);
  }
}

TEST(HessianForm, ConformingDataReducesToProjectedLaplacian) {
  std::mt19937 gen(29);
  const ElementFrame f = ElementFrame::from_points(Vec2(0, 0), Vec2(0.6, 0.1), Vec2(0.2, 0.5));
  const ElementBasis b2 = f.basis(2);
  const Eigen::VectorXd c = random_vector(gen, b2.size());
  const WeakFunctionLocal v = local_projection([&](const Vec2& x) { return evaluate(b2, c, x); },
                                               [&](const Vec2& x) { return Vec2(b2.gradients(x).transpose() * c); }, f);
  const WeakHessianOperator op(f, 2, 1);
  const Eigen::VectorXd bv = local_b(op, f, kIdentity) * v.flatten();
  const ElementBasis b1 = f.basis(1);
  const MappedRule rule = f.rule(8);
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(b1.size());
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const Vec2& x = rule.points[q];
    const double lap = b2.second_derivatives(x, 0, 0).dot(c) + b2.second_derivatives(x, 1, 1).dot(c);
    ref += rule.weights[q] * lap * b1.values(x);
  }
  EXPECT_LT((bv - ref).norm(), 1e-12);
}

TEST(HessianForm, RejectsInvalidCoefficient) {
  const WeakHessianOperator op(kRef, 2, 0);
  const CoefficientField skew = [](const Vec2&) {
    Mat2 m;
    m << 1.0, 0.5, -0.5, 1.0;
    return m;
  };
  const CoefficientField nan = [](const Vec2&) { return Mat2::Constant(std::numeric_limits<double>::quiet_NaN()); };
  for (const CoefficientField* a : {&skew, &nan}) {
    try {
      local_b(op, kRef, *a);
      ADD_FAILURE() << "expected SamplingError";
    } catch (const SamplingError& e) {
      EXPECT_STREQ(e.what(), "invalid coefficient sample");
    }
  }
}

TEST(StabilityForm, PiecewiseConstant) {
  const Eigen::MatrixXd c = local_c(kRef, 0);
  ASSERT_EQ(c.rows(), 1);
  EXPECT_NEAR(c(0, 0), 2.0 * 0.5, 1e-14);
}

TEST(StabilityForm, LinearMatchesClosedForm) {
  const double h = std::sqrt(2.0);
  const Eigen::MatrixXd c = local_c(kRef, 1);
  // x - 1/3 in the centred scaled basis is h times the second basis function.
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(3);
  rho[1] = h;
  EXPECT_NEAR(rho.dot(c * rho), h * h / 36.0 + h * h * h * 0.5, 1e-13);
}

TEST(StabilityForm, SpdWithMassLowerBound) {
  const ElementFrame f = ElementFrame::from_points(Vec2(0, 0), Vec2(0.25, 0.05), Vec2(0.1, 0.2));
  for (int r : {0, 1, 2}) {
    const Eigen::MatrixXd c = local_c(f, r);
    EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-15 * c.cwiseAbs().maxCoeff() + 1e-300);
    const double h = f.geom.diameter;
    const Eigen::MatrixXd m = mass_matrix(f.basis(r), f.rule(8));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c - h * h * m);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-14 * c.norm());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(StabilityForm, CauchySchwarz) {
  std::mt19937 gen(31);
  const Eigen::MatrixXd c = local_c(kRef, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd r = random_vector(gen, 3), s = random_vector(gen, 3);
    const double rs = r.dot(c * s);
    EXPECT_LE(rs * rs, r.dot(c * r) * s.dot(c * s) * (1.0 + 1e-12));
  }
}

TEST(LoadVector, Examples) {
  EXPECT_NEAR(local_load(kRef, [](const Vec2&) { return 1.0; }, 0)[0], 0.5, 1e-15);
  EXPECT_EQ(local_load(kRef, [](const Vec2&) { return 0.0; }, 1).norm(), 0.0);
  const double h = std::sqrt(2.0);
  const Eigen::VectorXd fx = local_load(kRef, [](const Vec2& x) { return x.x(); }, 1);
  EXPECT_NEAR(fx[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(fx[1], 1.0 / 36.0 / h, 1e-15);
  EXPECT_NEAR(fx[2], -1.0 / 72.0 / h, 1e-15);
}

TEST(LoadVector, RejectsNonFiniteSample) {
  try {
    local_load(kRef, [](const Vec2&) { return std::numeric_limits<double>::infinity(); }, 0);
    ADD_FAILURE() << "expected SamplingError";
  } catch (const SamplingError& e) {
    EXPECT_STREQ(e.what(), "load singularity at quadrature node");
  }
}

TEST(LocalForms, Deterministic) {
  const ElementFrame f = ElementFrame::from_points(Vec2(0.1, 0.2), Vec2(0.7, 0.1), Vec2(0.3, 0.9));
  const WeakHessianOperator op(f, 2, 1);
  EXPECT_TRUE(local_s(f, 2) == local_s(f, 2));
  EXPECT_TRUE(local_b(op, f, kIdentity) == local_b(WeakHessianOperator(f, 2, 1), f, kIdentity));
  EXPECT_TRUE(local_c(f, 1) == local_c(f, 1));
}
