#include <gtest/gtest.h>

#include <cmath>

#include "qmorse/error.hpp"
#include "qmorse/strata.hpp"
#include "support.hpp"

using namespace qmorse;
using qmorse::testing::R;

namespace {

Representation scalar_a2(Complex x) {
  const auto d = builtin::a2();
  return Representation(d.quiver, d.dims, {Matrix::Constant(1, 1, x)});
}


// Flows from constructed instances stop near a saddle.
FlowConfig saddle_flow() {
  FlowConfig cfg;
  cfg.grad_tol = 1e-7;
  return cfg;
}

const HNType kA2Split{{DimVector{1, 0}, DimVector{0, 1}}};
const HNType kLoopA{{DimVector{0, 1}, DimVector{2, 0}}};
const HNType kLoopB{{DimVector{1, 1}, DimVector{1, 0}}};

}  // namespace

TEST(ClassifyCritical, A2Zero) {
  const auto d = builtin::a2();
  const auto c = classify_critical(d.quiver, scalar_a2(0), d.alpha);
  EXPECT_EQ(c.type, kA2Split);
  ASSERT_EQ(c.eigenvalues.size(), 2u);
  EXPECT_NEAR(c.eigenvalues[0], -1, 1e-14);
  EXPECT_NEAR(c.eigenvalues[1], 1, 1e-14);
}

TEST(ClassifyCritical, A2Minimum) {
  const auto d = builtin::a2();
  const auto c = classify_critical(d.quiver, scalar_a2(std::sqrt(2.0)), d.alpha);
  EXPECT_EQ(c.type, (HNType{{DimVector{1, 1}}}));
  EXPECT_NEAR(c.eigenvalues[0], 0, 1e-12);
}

TEST(ClassifyCritical, JordanNormal) {
  const auto d = builtin::jordan();
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = -2;
  const auto c = classify_critical(d.quiver, Representation(d.quiver, d.dims, {D}), d.alpha);
  EXPECT_EQ(c.type, (HNType{{DimVector{2}}}));
}

TEST(ClassifyCritical, RejectsNonCritical) {
  const auto d = builtin::a2();
  try {
    classify_critical(d.quiver, scalar_a2(0.5), d.alpha);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == "not_critical" || e.code() == "slope_mismatch") << e.code();
  }
}

TEST(ClassifyCritical, AmbiguousGapReported) {
  // Jordan, a = 0, H = -[A, A^*]/2 has eigenvalues +-c^2/2 for the nilpotent A;
  // choose c so the gap c^2 sits inside [tol, 2 tol).
  const auto d = builtin::jordan();
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = std::sqrt(1.5e-4);
  try {
    classify_critical(d.quiver, Representation(d.quiver, d.dims, {A}), d.alpha, 1e-4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "cluster_ambiguity");
  }
}

TEST(ClassifyCritical, FilterBasisIsOrthonormal) {
  const auto d = builtin::a2();
  const auto c = classify_critical(d.quiver, scalar_a2(0), d.alpha);
  for (const auto& b : c.filtration.basis) {
    EXPECT_LT((b.adjoint() * b - Matrix::Identity(b.cols(), b.cols())).norm(), 1e-14);
  }
}

TEST(HnTypeByFlow, A2Examples) {
  const auto d = builtin::a2();
  EXPECT_EQ(hn_type_by_flow(d.quiver, scalar_a2(0), d.alpha, FlowConfig{}), kA2Split);
  EXPECT_EQ(hn_type_by_flow(d.quiver, scalar_a2(0.1), d.alpha, FlowConfig{}), (HNType{{DimVector{1, 1}}}));
}

TEST(HnTypeByFlow, EigenvaluesMatchSlopesOnRandomFlows) {
  std::mt19937_64 rng(31);
  for (const char* name : {"a2", "jordan", "two-loop"}) {
    const auto d = builtin::by_name(name);
    for (int i = 0; i < 5; ++i) {
      const auto A0 = random_representation(d.quiver, d.dims, rng);
      const auto fc = classify_by_flow(d.quiver, A0, d.alpha, FlowConfig{});
      for (std::size_t s = 0; s < fc.critical.type.length(); ++s) {
        const double mu = to_double(slope(d.quiver, fc.critical.type.parts[s], d.alpha));
        EXPECT_LT(std::abs(fc.critical.eigenvalues[s] + mu), 1e-6);
      }
      EXPECT_NEAR(fc.flow.f, to_double(critical_value(d.quiver, fc.critical.type, d.alpha)), 1e-8);
    }
  }
}

TEST(MakeHnExample, A2SplitIsZero) {
  const auto d = builtin::a2();
  const auto ex = make_hn_example(d.quiver, kA2Split, d.alpha, 1);
  EXPECT_EQ(ex.rep.norm(), 0.0);
  EXPECT_EQ(ex.type, kA2Split);
}

TEST(MakeHnExample, TwoLoopTypesClassifyByFlow) {
  const auto d = builtin::two_loop();
  for (const auto& type : {kLoopA, kLoopB}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto ex = make_hn_example(d.quiver, type, d.alpha, seed);
      EXPECT_LT(ex.filtration.invariance_residual(d.quiver, ex.rep), 1e-12);
      const auto fc = classify_by_flow(d.quiver, ex.rep, d.alpha, saddle_flow());
      EXPECT_EQ(fc.critical.type, type) << "seed " << seed;
      EXPECT_NEAR(fc.flow.f, to_double(critical_value(d.quiver, type, d.alpha)), 1e-8);
    }
  }
}

TEST(MakeHnExample, TrivialTypeIsSemistable) {
  const auto d = builtin::two_loop();
  const HNType trivial{{d.dims}};
  const auto ex = make_hn_example(d.quiver, trivial, d.alpha, 3);
  EXPECT_EQ(hn_type_by_flow(d.quiver, ex.rep, d.alpha, saddle_flow()), trivial);
}

TEST(MakeHnExample, ImpossiblePieceFailsSampling) {
  // Jordan with a = 0: a type of length 2 would need distinct slopes, which
  // cannot occur; validation rejects it before sampling.
  const auto d = builtin::jordan();
  EXPECT_THROW(make_hn_example(d.quiver, HNType{{DimVector{1}, DimVector{1}}}, d.alpha, 1), Error);
}

TEST(GradedObject, Examples) {
  const auto a2 = builtin::a2();
  const auto g0 = graded_object(a2.quiver, scalar_a2(0), coordinate_filtration(kA2Split));
  EXPECT_EQ(g0.norm(), 0.0);

  const auto d = builtin::two_loop();
  const auto ex = make_hn_example(d.quiver, kLoopB, d.alpha, 5, HnExampleOptions{.scramble = false});
  const auto gr = graded_object(d.quiver, ex.rep, ex.filtration);
  // Diagonal blocks survive, the extension block goes.
  const auto rotated = ex.filtration.rotate(d.quiver, ex.rep);
  for (std::size_t a = 0; a < d.quiver.edge_count(); ++a) {
    const auto& e = d.quiver.edges()[a];
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t t = 0; t < 2; ++t) {
        const int ri = ex.filtration.offset(s, e.in), ci = ex.filtration.offset(t, e.out);
        const int rn = kLoopB.parts[s][e.in], cn = kLoopB.parts[t][e.out];
        const Matrix blk = gr.arrow(a).block(ri, ci, rn, cn);
        if (s == t) {
          EXPECT_LT((blk - rotated.arrow(a).block(ri, ci, rn, cn)).norm(), 1e-12);
        } else {
          EXPECT_EQ(blk.norm(), 0.0);
        }
      }
    }
  }
  // Idempotent on block-diagonal input.
  EXPECT_LT((graded_object(d.quiver, gr, coordinate_filtration(kLoopB)) - gr).norm(), 1e-14);
}

TEST(GradedObject, RejectsNonInvariantFiltration) {
  const auto d = builtin::a2();
  // The tail vertex alone is not a subrepresentation when A = 1.
  try {
    graded_object(d.quiver, scalar_a2(1), coordinate_filtration(kA2Split));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "non_invariant_filtration");
  }
}

TEST(HomSpace, Examples) {
  const auto d = builtin::a2();
  const auto h = hom_space(d.quiver, scalar_a2(1), scalar_a2(0));
  ASSERT_EQ(h.dimension(), 1u);
  // psi_2 * 1 = 0 * psi_1: the head component vanishes, the tail is free.
  EXPECT_GT(std::abs(h.basis[0][0](0, 0)), 0.5);
  EXPECT_LT(std::abs(h.basis[0][1](0, 0)), 1e-12);

  std::mt19937_64 rng(1);
  EXPECT_FALSE(is_isomorphic(d.quiver, scalar_a2(1), scalar_a2(0), 10, rng).isomorphic);

  const auto same = is_isomorphic(d.quiver, scalar_a2(1), scalar_a2(1), 10, rng);
  EXPECT_TRUE(same.isomorphic);
  ASSERT_TRUE(same.witness.has_value());
}

TEST(HomSpace, GaugeRelatedAreIsomorphic) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    const auto d = qmorse::testing::random_quiver(rng, 3, 3, 2);
    const auto B = random_representation(d.quiver, d.dims, rng);
    const auto g = random_invertible(d.dims, rng);
    const auto C = act(d.quiver, g, B);
    const auto h = hom_space(d.quiver, B, C);
    EXPECT_GE(h.dimension(), 1u);
    EXPECT_LT(h.max_residual, 1e-8);
    const auto iso = is_isomorphic(d.quiver, B, C, 10, rng);
    EXPECT_TRUE(iso.isomorphic);
    ASSERT_TRUE(iso.witness.has_value());
    for (std::size_t a = 0; a < d.quiver.edge_count(); ++a) {
      const auto& e = d.quiver.edges()[a];
      const auto& w = *iso.witness;
      EXPECT_LT((w[e.in] * B.arrow(a) - C.arrow(a) * w[e.out]).norm(), 1e-8);
    }
  }
}

TEST(HomSpace, EndOfStableA2IsOneDimensional) {
  const auto d = builtin::a2();
  for (double x : {0.3, 1.0, std::sqrt(2.0), 4.0}) {
    EXPECT_EQ(hom_space(d.quiver, scalar_a2(x), scalar_a2(x)).dimension(), 1u);
  }
  EXPECT_EQ(hom_space(d.quiver, scalar_a2(0), scalar_a2(0)).dimension(), 2u);
}

TEST(VerifyGradedLimit, A2Split) {
  const auto d = builtin::a2();
  const auto ex = make_hn_example(d.quiver, kA2Split, d.alpha, 1);
  const auto rep = verify_graded_limit(d.quiver, ex, d.alpha, FlowConfig{}, 1);
  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(rep.type_match);
  EXPECT_TRUE(rep.isomorphic);
}

TEST(VerifyGradedLimit, TwoLoopStableConstruction) {
  const auto d = builtin::two_loop();
  HnExampleOptions opt;
  opt.require_stable = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto ex = make_hn_example(d.quiver, kLoopB, d.alpha, seed, opt);
    const auto rep = verify_graded_limit(d.quiver, ex, d.alpha, saddle_flow(), seed);
    EXPECT_TRUE(rep.type_match);
    EXPECT_TRUE(rep.isomorphic) << "seed " << seed;
    EXPECT_GE(rep.hom_dimension, 1u);
    EXPECT_NEAR(rep.limit_f, rep.expected_f, 1e-8);
  }
}

TEST(TangentDecomposition, A2Zero) {
  const auto d = builtin::a2();
  const auto c = classify_critical(d.quiver, scalar_a2(0), d.alpha);
  const auto t = tangent_decomposition(d.quiver, scalar_a2(0), c.filtration);
  EXPECT_EQ(t.normal_dimension, 1);
  EXPECT_EQ(t.normal_dimension, codimension(d.quiver, kA2Split));
}

TEST(TangentDecomposition, TrivialTypeAtMinimum) {
  const auto d = builtin::a2();
  const auto A = scalar_a2(std::sqrt(2.0));
  const auto c = classify_critical(d.quiver, A, d.alpha);
  EXPECT_EQ(tangent_decomposition(d.quiver, A, c.filtration).normal_dimension, 0);
}

TEST(TangentDecomposition, MatchesCodimensionOnTwoLoop) {
  const auto d = builtin::two_loop();
  for (const auto& type : {kLoopA, kLoopB}) {
    const auto ex = make_hn_example(d.quiver, type, d.alpha, 2);
    const auto fc = classify_by_flow(d.quiver, ex.rep, d.alpha, saddle_flow());
    ASSERT_EQ(fc.critical.type, type);
    const auto t = tangent_decomposition(d.quiver, fc.flow.final, fc.critical.filtration);
    EXPECT_EQ(t.normal_dimension, codimension(d.quiver, type));
  }
}
