#include <gtest/gtest.h>

#include <cmath>

#include "qmorse/error.hpp"
#include "qmorse/repspace.hpp"
#include "support.hpp"

using namespace qmorse;
using qmorse::testing::R;

namespace {

Representation scalar_a2(Complex x) {
  const auto d = builtin::a2();
  return Representation(d.quiver, d.dims, {Matrix::Constant(1, 1, x)});
}

Representation jordan_nilpotent() {
  const auto d = builtin::jordan();
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1;
  return Representation(d.quiver, d.dims, {A});
}

Complex I(0, 1);

}  // namespace

TEST(Representation, ValidatesShapesAndFiniteness) {
  const auto d = builtin::a2();
  EXPECT_THROW(Representation(d.quiver, d.dims, {Matrix::Zero(2, 1)}), Error);
  Matrix bad = Matrix::Zero(1, 1);
  bad(0, 0) = std::nan("");
  try {
    Representation(d.quiver, d.dims, {bad});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "non_finite");
  }
}

TEST(Moment, JordanNilpotent) {
  const auto d = builtin::jordan();
  const Blocks phi = moment(d.quiver, jordan_nilpotent());
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 0.5 * I;
  expected(1, 1) = -0.5 * I;
  EXPECT_LT((phi[0] - expected).norm(), 1e-15);
}

TEST(Moment, A2Values) {
  const auto d = builtin::a2();
  const Blocks zero = moment(d.quiver, scalar_a2(0));
  EXPECT_EQ(zero[0].norm() + zero[1].norm(), 0.0);
  const Blocks phi = moment(d.quiver, scalar_a2(2));
  EXPECT_LT(std::abs(phi[0](0, 0) - (-2.0 * I)), 1e-15);
  EXPECT_LT(std::abs(phi[1](0, 0) - (2.0 * I)), 1e-15);
}

TEST(Moment, SkewHermitianAndTraceless) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 30; ++i) {
    const auto d = qmorse::testing::random_quiver(rng, 3, 4, 3);
    const auto A = random_representation(d.quiver, d.dims, rng);
    Complex tr = 0;
    for (const auto& b : moment(d.quiver, A)) {
      EXPECT_LT((b + b.adjoint()).norm(), 1e-12);
      tr += b.trace();
    }
    EXPECT_LT(std::abs(tr), 1e-12 * (1 + A.norm() * A.norm()));
  }
}

TEST(ShiftedMoment, A2Values) {
  const auto d = builtin::a2();
  const auto H0 = shifted_moment(d.quiver, scalar_a2(0), d.alpha).H;
  EXPECT_DOUBLE_EQ(H0[0](0, 0).real(), -1);
  EXPECT_DOUBLE_EQ(H0[1](0, 0).real(), 1);
  const auto H1 = shifted_moment(d.quiver, scalar_a2(std::sqrt(2.0)), d.alpha).H;
  EXPECT_LT(std::abs(H1[0](0, 0)) + std::abs(H1[1](0, 0)), 1e-15);
}

TEST(ShiftedMoment, NormalJordanIsZero) {
  const auto d = builtin::jordan();
  std::mt19937_64 rng(3);
  const GaugeElement u = random_unitary(d.dims, rng);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = Complex(1, 2);
  D(1, 1) = Complex(-0.5, 0.3);
  const Matrix N = u.block(0) * D * u.block(0).adjoint();
  const auto H = shifted_moment(d.quiver, Representation(d.quiver, d.dims, {N}), d.alpha).H;
  EXPECT_LT(H[0].norm(), 1e-14);
}

TEST(FValue, ExampleValues) {
  const auto a2 = builtin::a2();
  EXPECT_DOUBLE_EQ(f_value(a2.quiver, scalar_a2(0), a2.alpha), 2.0);
  EXPECT_LT(f_value(a2.quiver, scalar_a2(std::sqrt(2.0)), a2.alpha), 1e-30);
  const auto j = builtin::jordan();
  EXPECT_DOUBLE_EQ(f_value(j.quiver, jordan_nilpotent(), j.alpha), 0.5);
}

TEST(NegGradient, A2ClosedForm) {
  const auto d = builtin::a2();
  for (double x : {0.1, 0.7, 1.0, std::sqrt(2.0), 2.5}) {
    const auto g = neg_gradient(d.quiver, scalar_a2(x), d.alpha);
    EXPECT_NEAR(g.arrow(0)(0, 0).real(), (4 - 2 * x * x) * x, 1e-13);
    EXPECT_NEAR(g.arrow(0)(0, 0).imag(), 0.0, 1e-15);
  }
}

TEST(NegGradient, JordanNilpotentIsMinusTwoA) {
  const auto d = builtin::jordan();
  const auto A = jordan_nilpotent();
  const auto g = neg_gradient(d.quiver, A, d.alpha);
  EXPECT_LT((g.arrow(0) + 2.0 * A.arrow(0)).norm(), 1e-15);
}

TEST(NegGradient, VanishesAtCriticalPoints) {
  const auto d = builtin::a2();
  EXPECT_EQ(neg_gradient(d.quiver, scalar_a2(0), d.alpha).norm(), 0.0);
  EXPECT_LT(neg_gradient(d.quiver, scalar_a2(std::sqrt(2.0)), d.alpha).norm(), 1e-14);
}

TEST(NegGradient, CentralDifferenceOracle) {
  // Two-point central differences at h = 1e-5 on random quivers up to (3,3,3).
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const auto d = qmorse::testing::random_quiver(rng, 1 + i % 3, 1 + i % 4, 3);
    const auto A = random_representation(d.quiver, d.dims, rng);
    const auto grad = -1.0 * neg_gradient(d.quiver, A, d.alpha);
    for (int k = 0; k < 20; ++k) {
      auto X = random_representation(d.quiver, d.dims, rng);
      X *= 1.0 / X.norm();
      const double h = 1e-5;
      const double fd = (f_value(d.quiver, A + h * X, d.alpha) - f_value(d.quiver, A - (h * X), d.alpha)) / (2 * h);
      const double an = real_inner(grad, X);
      EXPECT_LT(std::abs(fd - an), 1e-6 * std::max(1.0, grad.norm())) << "quiver " << i << " dir " << k;
    }
  }
}

TEST(Action, LeftActionAndIdentity) {
  std::mt19937_64 rng(5);
  const auto d = builtin::two_loop();
  const auto A = random_representation(d.quiver, d.dims, rng);
  EXPECT_EQ((act(d.quiver, GaugeElement::identity(d.dims), A) - A).norm(), 0.0);
  const auto g = random_invertible(d.dims, rng);
  const auto h = random_invertible(d.dims, rng);
  const auto lhs = act(d.quiver, g * h, A);
  const auto rhs = act(d.quiver, g, act(d.quiver, h, A));
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * A.norm());
}

TEST(Action, SingularGaugeRejected) {
  const DimVector v{2};
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 1;
  try {
    GaugeElement(v, {s}, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "singular_gauge");
  }
  try {
    GaugeElement(v, {2.0 * Matrix::Identity(2, 2)}, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "not_unitary");
  }
}

TEST(Rho, A2ScalarValue) {
  const auto d = builtin::a2();
  const Blocks u{Matrix::Constant(1, 1, Complex(0.3, 1)), Matrix::Constant(1, 1, Complex(-2, 0.5))};
  const auto r = rho(d.quiver, scalar_a2(1), u);
  EXPECT_LT(std::abs(r.arrow(0)(0, 0) - (u[1](0, 0) - u[0](0, 0))), 1e-15);
}

TEST(Rho, AdjointIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto d = qmorse::testing::random_quiver(rng, 3, 4, 3);
    const auto A = random_representation(d.quiver, d.dims, rng);
    const auto X = random_representation(d.quiver, d.dims, rng);
    Blocks u;
    for (std::size_t l = 0; l < d.dims.size(); ++l) u.push_back(random_matrix(d.dims[l], d.dims[l], rng));
    const LieElement adj = rho_adjoint(d.quiver, A, X);
    double rhs = 0;
    for (std::size_t l = 0; l < u.size(); ++l) rhs += (u[l].adjoint() * adj.blocks[l]).trace().real();
    EXPECT_NEAR(real_inner(rho(d.quiver, A, u), X), rhs, 1e-10 * (1 + std::abs(rhs)));
  }
}

TEST(Equivariance, MomentAndFUnderUnitaryGauge) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const auto d = qmorse::testing::random_quiver(rng, 3, 4, 3);
    const auto A = random_representation(d.quiver, d.dims, rng);
    const auto g = random_unitary(d.dims, rng);
    const auto gA = act(d.quiver, g, A);
    const Blocks phi = moment(d.quiver, A);
    const Blocks phi_g = moment(d.quiver, gA);
    for (std::size_t l = 0; l < phi.size(); ++l) {
      EXPECT_LT((phi_g[l] - g.block(l) * phi[l] * g.block(l).adjoint()).norm(), 1e-10 * (1 + phi[l].norm()));
    }
    const double f = f_value(d.quiver, A, d.alpha);
    EXPECT_NEAR(f_value(d.quiver, gA, d.alpha), f, 1e-10 * (1 + f));
  }
}

TEST(Sampling, UnitaryIsUnitaryAndDeterministic) {
  std::mt19937_64 r1(4), r2(4);
  const DimVector v{3, 0, 2};
  const auto u1 = random_unitary(v, r1);
  const auto u2 = random_unitary(v, r2);
  for (std::size_t l = 0; l < v.size(); ++l) {
    EXPECT_EQ((u1.block(l) - u2.block(l)).norm(), 0.0);
    if (v[l] > 0) EXPECT_LT((u1.block(l).adjoint() * u1.block(l) - Matrix::Identity(v[l], v[l])).norm(), 1e-13);
  }
}

TEST(ZeroDimensions, EmptyBlocksAreSkipped) {
  const Quiver q = Quiver::from_names({"a", "b"}, {{"a", "b"}, {"b", "b"}});
  const DimVector v{0, 2};
  const auto alpha = StabilityParam::trace_free({R(5), R(0)}, v);
  std::mt19937_64 rng(2);
  const auto A = random_representation(q, v, rng);
  EXPECT_EQ(A.arrow(0).cols(), 0);
  EXPECT_NO_THROW(neg_gradient(q, A, alpha));
  EXPECT_GE(f_value(q, A, alpha), 0.0);
}
