#pragma once

#include <random>

#include "qmorse/flow.hpp"
#include "qmorse/quiver.hpp"
#include "qmorse/repspace.hpp"
#include "qmorse/strata.hpp"

namespace qmorse {

/// Adds a reversed copy of every edge, appended after the originals in
/// original order. Vertex order is unchanged.
Quiver double_quiver(const Quiver& q);

/// Representation of the doubled quiver with the (A, B) split: edges
/// 0..E-1 carry A, edges E..2E-1 carry B (B_a has shape v_out(a) x v_in(a)).
class DoubledRep {
 public:
  DoubledRep() = default;
  /// rep must be a representation of double_quiver(q).
  DoubledRep(const Quiver& q, Representation rep);
  /// Assembles from A on q and B on the reversed edges.
  static DoubledRep from_pair(const Quiver& q, const Representation& A, const std::vector<Matrix>& B);

  const Quiver& base() const noexcept { return base_; }
  const Quiver& doubled() const noexcept { return doubled_; }
  const Representation& rep() const noexcept { return rep_; }
  Representation& rep() noexcept { return rep_; }
  const Matrix& A(std::size_t a) const { return rep_.arrow(a); }
  const Matrix& B(std::size_t a) const { return rep_.arrow(base_.edge_count() + a); }

 private:
  Quiver base_;
  Quiver doubled_;
  Representation rep_;
};

/// Phi_C,l = sum_{in(a)=l} A_a B_a - sum_{out(a)=l} B_a A_a.
Blocks moment_complex(const DoubledRep& x);

struct LevelFlowResult {
  FlowResult flow;          ///< trajectory samples carry phi_c_norm
  double max_phi_c = 0;     ///< largest ||Phi_C|| over the samples
};

/// Flows (A0, B0) on the doubled quiver with the real moment map there.
/// Throws Error("off_level") if ||Phi_C(A0, B0)|| >= level_tol.
LevelFlowResult flow_on_level(const DoubledRep& x0, const StabilityParam& a, const FlowConfig& cfg,
                              double level_tol = 1e-9, const SampleObserver& observer = {});

/// ||Phi_C(A + dA, B + dB) - Phi_C(A, B) - dPhi_C(dA, dB)||. Phi_C is
/// bilinear, so this is ||Phi_C(dA, dB)||, evaluated directly.
/// Throws Error("filtration_too_long") when the filtration has more than 2 steps.
double level_linearization_residual(const DoubledRep& x, const Filtration& filt, const Representation& delta);

/// The same quantity through the literal difference of moment maps (subject
/// to cancellation; used as a cross-check).
double level_linearization_difference(const DoubledRep& x, const Representation& delta);

/// Random element of the doubled representation space supported on entries
/// that strictly lower the filtration index, expressed in the original basis.
Representation random_lower_triangular(const Quiver& doubled, const Filtration& filt, std::mt19937_64& rng);

/// A point on Phi_C^{-1}(0): random A, B drawn from the kernel of
/// B -> Phi_C(A, B) (zero when that kernel is trivial), then optionally moved
/// by a random invertible g.
DoubledRep random_level_point(const Quiver& q, const DimVector& v, std::mt19937_64& rng, bool gauge = true);

}  // namespace qmorse
