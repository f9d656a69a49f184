#include <gtest/gtest.h>

#include <cmath>

#include "qmorse/error.hpp"
#include "qmorse/flow.hpp"
#include "support.hpp"

using namespace qmorse;

namespace {

Representation scalar_a2(Complex x) {
  const auto d = builtin::a2();
  return Representation(d.quiver, d.dims, {Matrix::Constant(1, 1, x)});
}

Representation jordan_scaled(double c) {
  const auto d = builtin::jordan();
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = c;
  return Representation(d.quiver, d.dims, {A});
}

// |A|^2 along the A2 flow solves y' = 2(4 - 2y)y.
double a2_closed_form(double y0, double t) {
  const double e = std::exp(8 * t);
  return 2 * y0 * e / (2 + y0 * (e - 1));
}

}  // namespace

TEST(FlowConfig, Validation) {
  FlowConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.grad_tol = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = FlowConfig{};
  cfg.min_step = 1.0;
  cfg.initial_step = 0.1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(IntegrateFlow, A2ConvergesToCircle) {
  const auto d = builtin::a2();
  const auto r = integrate_flow(d.quiver, scalar_a2(0.1), d.alpha, FlowConfig{});
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(std::norm(r.final.arrow(0)(0, 0)), 2.0, 1e-8);
  EXPECT_LT(r.f, 1e-12);
}

TEST(IntegrateFlow, A2TrajectoryMatchesClosedForm) {
  const auto d = builtin::a2();
  const auto r = integrate_flow(d.quiver, scalar_a2(0.1), d.alpha, FlowConfig{});
  ASSERT_GT(r.trajectory.size(), 10u);
  for (const auto& s : r.trajectory) {
    const double y = a2_closed_form(0.01, s.t);
    // f = 2 (y - 2)^2 / ... : H = diag(y/2 - 1, 1 - y/2), so f = (y - 2)^2 / 2.
    const double f = 0.5 * (y - 2) * (y - 2);
    EXPECT_NEAR(s.f, f, 1e-9 * (1 + f)) << "t = " << s.t;
  }
}

TEST(IntegrateFlow, CriticalStartDoesNotMove) {
  const auto d = builtin::a2();
  const auto A0 = scalar_a2(std::sqrt(2.0));
  const auto r = integrate_flow(d.quiver, A0, d.alpha, FlowConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.final - A0).norm(), 1e-12);
}

TEST(IntegrateFlow, JordanNilpotentDecaysAlgebraically) {
  // Off-diagonal entry c solves c' = -2c^3, so c^2 = c0^2 / (1 + 4 c0^2 t).
  const auto d = builtin::jordan();
  FlowConfig cfg;
  cfg.max_time = 50;
  const auto r = integrate_flow(d.quiver, jordan_scaled(1.0), d.alpha, cfg);
  EXPECT_FALSE(r.converged);
  const double c2 = 1.0 / (1 + 4 * r.time);
  EXPECT_NEAR(std::norm(r.final.arrow(0)(0, 1)), c2, 1e-8);
  EXPECT_NEAR(r.f, 0.5 * c2 * c2, 1e-10);
  EXPECT_LT(std::abs(r.final.arrow(0)(0, 0)) + std::abs(r.final.arrow(0)(1, 0)) + std::abs(r.final.arrow(0)(1, 1)),
            1e-12);
}

TEST(IntegrateFlow, JordanNilpotentEventuallyConvergesToZero) {
  const auto d = builtin::jordan();
  FlowConfig cfg;
  cfg.max_time = 1e4;
  cfg.grad_tol = 1e-5;
  const auto r = integrate_flow(d.quiver, jordan_scaled(1.0), d.alpha, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.final.norm(), 0.05);
}

TEST(IntegrateFlow, RandomStartsConvergeAndAreMonotone) {
  std::mt19937_64 rng(99);
  for (const char* name : {"a2", "jordan", "two-loop"}) {
    const auto d = builtin::by_name(name);
    for (int i = 0; i < 5; ++i) {
      const auto A0 = random_representation(d.quiver, d.dims, rng);
      const auto r = integrate_flow(d.quiver, A0, d.alpha, FlowConfig{});
      EXPECT_TRUE(r.converged) << name << " " << i;
      EXPECT_LE(r.max_f_increase, 1e-10 * (1 + f_value(d.quiver, A0, d.alpha)));
      for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
        EXPECT_LE(r.trajectory[k].f, r.trajectory[k - 1].f + 1e-10 * (1 + r.trajectory[k - 1].f));
      }
      const auto h = shifted_moment(d.quiver, r.final, d.alpha);
      EXPECT_LT(critical_residual(d.quiver, r.final, h), 10 * FlowConfig{}.grad_tol);
      const auto u = random_unitary(d.dims, rng);
      EXPECT_NEAR(f_value(d.quiver, act(d.quiver, u, r.final), d.alpha), r.f, 1e-10 * (1 + r.f));
    }
  }
}

TEST(IntegrateFlow, InvalidConfigThrows) {
  const auto d = builtin::a2();
  FlowConfig cfg;
  cfg.max_step = 1e-3;
  cfg.initial_step = 1.0;
  EXPECT_THROW(integrate_flow(d.quiver, scalar_a2(0.1), d.alpha, cfg), Error);
}

TEST(GroupFlow, TracksFlowOnA2) {
  const auto d = builtin::a2();
  const auto A0 = scalar_a2(0.1);
  const auto gr = integrate_group_flow(d.quiver, A0, d.alpha, FlowConfig{}, 1e-6, true);
  EXPECT_FALSE(gr.drift_warning);
  EXPECT_LT(gr.max_drift, 1e-6);
  EXPECT_LT((act(d.quiver, gr.g, A0) - gr.flow.final).norm(), 1e-6);
  const auto ref = integrate_flow(d.quiver, A0, d.alpha, FlowConfig{});
  EXPECT_LT((gr.flow.final - ref.final).norm(), 1e-10);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_LT((gr.g.block(l) * gr.g_inverse.block(l) - Matrix::Identity(1, 1)).norm(), 1e-10);
  }
}

TEST(GroupFlow, ZeroGeneratorKeepsIdentity) {
  // Jordan with a = 0 and A0 normal: Phi(A0) = 0 = alpha.
  const auto d = builtin::jordan();
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = Complex(0, 2);
  const auto gr = integrate_group_flow(d.quiver, Representation(d.quiver, d.dims, {D}), d.alpha, FlowConfig{});
  EXPECT_LT((gr.g.block(0) - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(GroupFlow, CriticalStartHasHermitianConstantGenerator) {
  // A2 at A = 0 is critical with H = diag(-1, 1); g(t) = exp(2tH) is real positive.
  const auto d = builtin::a2();
  FlowConfig cfg;
  cfg.max_time = 0.5;
  const auto gr = integrate_group_flow(d.quiver, scalar_a2(0), d.alpha, cfg);
  EXPECT_TRUE(gr.flow.converged);
  EXPECT_EQ(gr.flow.final.norm(), 0.0);
  EXPECT_LT(gr.max_generator_skew, 1e-10);
}

TEST(GroupFlow, DriftSmallOnRandomData) {
  std::mt19937_64 rng(4);
  const auto d = builtin::two_loop();
  for (int i = 0; i < 5; ++i) {
    const auto A0 = random_representation(d.quiver, d.dims, rng);
    const auto gr = integrate_group_flow(d.quiver, A0, d.alpha, FlowConfig{});
    EXPECT_LT(gr.max_drift, 1e-6);
  }
}

TEST(GroupFlow, StepGeneratorSkewVanishesWithStepSize) {
  std::mt19937_64 rng(4);
  const auto d = builtin::two_loop();
  const auto A0 = random_representation(d.quiver, d.dims, rng);
  FlowConfig coarse;
  coarse.max_time = 2;
  coarse.max_step = 1e-2;
  coarse.initial_step = 1e-3;
  coarse.rtol = coarse.atol = 1e-2;  // let max_step set h
  FlowConfig fine = coarse;
  fine.max_step = 1e-3;
  fine.initial_step = 1e-4;
  const double s1 = integrate_group_flow(d.quiver, A0, d.alpha, coarse).max_generator_skew;
  const double s2 = integrate_group_flow(d.quiver, A0, d.alpha, fine).max_generator_skew;
  EXPECT_GT(s1, 0.0);
  EXPECT_LT(s2, 0.2 * s1);
  EXPECT_LT(s2, 1e-2);
}

TEST(Sigma, Values) {
  EXPECT_DOUBLE_EQ(sigma({Matrix::Identity(2, 2), Matrix::Identity(1, 1)}, 3), 0.0);
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 2;
  h(1, 1) = 0.5;
  EXPECT_NEAR(sigma({h}, 2), 1.0, 1e-15);
  EXPECT_NEAR(sigma({h.inverse()}, 2), sigma({h}, 2), 1e-15);
  Matrix bad = -Matrix::Identity(1, 1);
  try {
    sigma({bad}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "not_positive_definite");
  }
}

TEST(Sigma, NonnegativeOnRandomPositiveMatrices) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const Matrix g = random_matrix(3, 3, rng) + 2.0 * Matrix::Identity(3, 3);
    const Matrix h = g * g.adjoint();
    EXPECT_GE(sigma({h}, 3), -1e-12);
  }
}

TEST(PairedFlow, IdentityGivesZero) {
  const auto d = builtin::two_loop();
  std::mt19937_64 rng(1);
  const auto A0 = random_representation(d.quiver, d.dims, rng);
  const auto tr = paired_flow_sigma(d.quiver, A0, GaugeElement::identity(d.dims), d.alpha, FlowConfig{});
  EXPECT_LT(tr.max_value, 1e-12);
}

TEST(PairedFlow, UnitaryGivesZero) {
  const auto d = builtin::two_loop();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 3; ++i) {
    const auto A0 = random_representation(d.quiver, d.dims, rng);
    const auto tr = paired_flow_sigma(d.quiver, A0, random_unitary(d.dims, rng), d.alpha, FlowConfig{});
    EXPECT_LT(tr.max_value, 1e-8);
  }
}

TEST(PairedFlow, A2DiagonalGaugeIsNonincreasing) {
  const auto d = builtin::a2();
  const GaugeElement g0(d.dims, {2.0 * Matrix::Identity(1, 1), Matrix::Identity(1, 1)}, false);
  const auto tr = paired_flow_sigma(d.quiver, scalar_a2(0.5), g0, d.alpha, FlowConfig{});
  ASSERT_GT(tr.samples.size(), 2u);
  EXPECT_NEAR(tr.samples.front().second, 0.25 + 4 - 2, 1e-12);
  EXPECT_LE(tr.max_increase, 1e-8);
  EXPECT_LT(tr.samples.back().second, tr.samples.front().second);
}

TEST(PairedFlow, RandomPairsAreNonincreasing) {
  std::mt19937_64 rng(77);
  for (const char* name : {"a2", "jordan", "two-loop"}) {
    const auto d = builtin::by_name(name);
    for (int i = 0; i < 3; ++i) {
      const auto A0 = random_representation(d.quiver, d.dims, rng);
      const auto tr = paired_flow_sigma(d.quiver, A0, random_invertible(d.dims, rng), d.alpha, FlowConfig{});
      EXPECT_LE(tr.max_increase, 1e-8) << name << " " << i;
      for (const auto& [t, s] : tr.samples) EXPECT_GE(s, -1e-10);
    }
  }
}
