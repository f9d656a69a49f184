#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "qmorse/flow.hpp"
#include "qmorse/quiver.hpp"
#include "qmorse/repspace.hpp"

namespace qmorse {

/// A filtration of the vertex spaces, stored as one unitary basis per vertex
/// whose columns are grouped piece by piece: the first v_1[l] columns span the
/// first (highest-slope) piece at vertex l, the next v_2[l] the second, etc.
/// The i-th filtration step is the span of the first i groups.
struct Filtration {
  HNType type;
  Blocks basis;

  std::size_t length() const noexcept { return type.length(); }
  /// Column offset of piece s at vertex l.
  int offset(std::size_t s, std::size_t l) const;
  /// Orthogonal projection onto the i-th filtration step (i = 0..L) at vertex l.
  Matrix projection(std::size_t i, std::size_t l) const;
  /// A expressed in the filtration basis: basis_in^* A_a basis_out.
  Representation rotate(const Quiver& q, const Representation& A) const;
  /// Inverse of rotate.
  Representation unrotate(const Quiver& q, const Representation& A) const;
  /// Largest ||(1 - pi_in) A_a pi_out|| over filtration steps and edges.
  double invariance_residual(const Quiver& q, const Representation& A) const;
};

/// Filtration aligned with the coordinate basis.
Filtration coordinate_filtration(const HNType& type);

struct CriticalType {
  HNType type;
  std::vector<double> eigenvalues;  ///< one per cluster, strictly increasing
  Filtration filtration;            ///< eigenbasis of H, grouped by cluster
};

/// Splits a numerically critical A along the eigenspaces of H.
///
/// Errors: "cluster_ambiguity" when two adjacent eigenvalues are separated by
/// a gap in [cluster_tol, 2 cluster_tol); "slope_mismatch" when a cluster's
/// eigenvalue is not -slope of its dimension vector within 100 cluster_tol;
/// "not_critical" when A has blocks between clusters of norm >= cluster_tol.
CriticalType classify_critical(const Quiver& q, const Representation& A, const StabilityParam& a,
                               double cluster_tol = 1e-4);

struct FlowClassification {
  FlowResult flow;
  CriticalType critical;
};

/// Flows to the limit and classifies it. Throws Error("not_converged") if the
/// flow stops at max_time.
FlowClassification classify_by_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                                    const FlowConfig& cfg, double cluster_tol = 1e-4);

/// The Harder-Narasimhan type of A0, read off the critical type of its flow limit.
HNType hn_type_by_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                       const FlowConfig& cfg, double cluster_tol = 1e-4);

struct HnExampleOptions {
  double eta_scale = 0.5;      ///< extension blocks relative to the diagonal entries
  int max_attempts = 20;       ///< rejection-sampling budget per piece
  bool require_stable = false; ///< also demand End(limit of piece) = C
  bool scramble = true;        ///< hide the filtration behind a random signed-permutation change of basis
  FlowConfig flow;             ///< used to certify semistability of the pieces
  double cluster_tol = 1e-4;
};

struct HnExample {
  HNType type;
  Representation rep;                      ///< block upper-triangular (before scrambling)
  Filtration filtration;                   ///< HN filtration of rep by construction
  std::vector<Representation> pieces;      ///< diagonal blocks, in their own coordinates
  std::vector<Representation> piece_limits;///< flow limits that certified them
  int attempts = 0;
};

/// Builds a representation whose HN type is `type` by construction: diagonal
/// blocks are sampled until their flow (for the shifted parameter) ends on the
/// minimum, and strictly upper blocks are random extensions.
/// Throws Error("sampling_failed") when a piece exhausts its attempts.
HnExample make_hn_example(const Quiver& q, const HNType& type, const StabilityParam& a, std::uint64_t seed,
                          const HnExampleOptions& options = {});

/// Block-diagonal representation of the successive quotients, in the
/// filtration basis. Throws Error("non_invariant_filtration").
Representation graded_object(const Quiver& q, const Representation& A, const Filtration& filt,
                             double tol = 1e-8);

struct HomSpace {
  std::vector<Blocks> basis;  ///< each element: one C_l x B_l block per vertex
  double max_residual = 0;    ///< largest ||psi_in B_a - C_a psi_out|| over the basis
  std::vector<double> singular_values;

  std::size_t dimension() const noexcept { return basis.size(); }
};

/// Intertwiners psi with psi_in(a) B_a = C_a psi_out(a), via an SVD nullspace.
/// Singular values below rank_tol * max(1, sigma_max) count as zero.
HomSpace hom_space(const Quiver& q, const Representation& B, const Representation& C, double rank_tol = 1e-6);

struct IsoResult {
  bool isomorphic = false;
  std::optional<Blocks> witness;
  int trials_used = 0;
  std::size_t hom_dimension = 0;
};

/// Randomized one-sided test: "yes" comes with an invertible intertwiner
/// (every block with condition number <= 1e8); "no" means none of `trials`
/// random elements of Hom(B, C) was invertible.
IsoResult is_isomorphic(const Quiver& q, const Representation& B, const Representation& C, int trials,
                        std::mt19937_64& rng, double rank_tol = 1e-6);

struct GradedLimitReport {
  bool converged = false;
  bool type_match = false;
  bool isomorphic = false;
  HNType limit_type;
  std::size_t hom_dimension = 0;      ///< dim Hom(A_inf, Gr)
  std::size_t end_dimension = 0;      ///< dim End(Gr)
  double limit_f = 0;
  double expected_f = 0;
};

/// Flows the constructed example and compares its limit with the graded
/// object of the construction's filtration.
GradedLimitReport verify_graded_limit(const Quiver& q, const HnExample& example, const StabilityParam& a,
                                      const FlowConfig& cfg, std::uint64_t seed, double cluster_tol = 1e-4);

struct TangentReport {
  int normal_dimension = 0;  ///< complex dim of ker(rho_A)^* intersected with Rep^LT
  int lt_dimension = 0;      ///< complex dim of Rep^LT
  int rank = 0;              ///< rank of rho_A^* restricted to Rep^LT
  double smallest_kept = 0;  ///< smallest singular value counted in the rank
  double largest_dropped = 0;
};

/// Numeric dimension of the normal space to the stratum at a critical A, in
/// the critical filtration. Throws Error("rank_ambiguity") when a singular
/// value lies within a decade of the threshold.
TangentReport tangent_decomposition(const Quiver& q, const Representation& A, const Filtration& filt,
                                    double rank_tol = 1e-7);

}  // namespace qmorse
