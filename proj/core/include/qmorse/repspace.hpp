#pragma once

#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmorse/quiver.hpp"

namespace qmorse {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// One matrix per vertex (v_l x v_l). Used for moment values, gauge and Lie
/// algebra elements.
using Blocks = std::vector<Matrix>;

/// Complex representation of a quiver: A_a has shape v_in(a) x v_out(a).
/// Also serves as the tangent space, so it carries the vector-space operations.
class Representation {
 public:
  Representation() = default;
  /// Validates shapes and finiteness. Throws Error("shape_mismatch") / Error("non_finite").
  Representation(const Quiver& q, DimVector dims, std::vector<Matrix> arrows);

  static Representation zero(const Quiver& q, const DimVector& dims);

  const DimVector& dims() const noexcept { return dims_; }
  std::size_t edge_count() const noexcept { return arrows_.size(); }
  const Matrix& arrow(std::size_t a) const { return arrows_[a]; }
  Matrix& arrow(std::size_t a) { return arrows_[a]; }
  std::span<const Matrix> arrows() const noexcept { return arrows_; }

  /// Re-checks shapes against q; throws on mismatch.
  void validate(const Quiver& q) const;

  double norm() const;
  double max_abs() const;

  Representation& operator+=(const Representation& other);
  Representation& operator-=(const Representation& other);
  Representation& operator*=(double s);

  friend Representation operator+(Representation x, const Representation& y) { return x += y; }
  friend Representation operator-(Representation x, const Representation& y) { return x -= y; }
  friend Representation operator*(double s, Representation x) { return x *= s; }

 private:
  DimVector dims_;
  std::vector<Matrix> arrows_;
};

/// Real inner product Re tr(X^* Y), summed over edges.
double real_inner(const Representation& x, const Representation& y);

/// Element of G_C = prod GL(v_l); optionally flagged unitary.
class GaugeElement {
 public:
  GaugeElement() = default;
  /// Throws Error("shape_mismatch"), Error("singular_gauge") if some block has
  /// condition number above `max_condition`, or Error("not_unitary").
  GaugeElement(const DimVector& dims, Blocks blocks, bool unitary, double max_condition = 1e12,
               double unitary_tol = 1e-10);

  static GaugeElement identity(const DimVector& dims);

  const Blocks& blocks() const noexcept { return blocks_; }
  const Matrix& block(std::size_t l) const { return blocks_[l]; }
  bool is_unitary() const noexcept { return unitary_; }

  GaugeElement inverse() const;
  /// Blockwise product (*this) * other.
  GaugeElement operator*(const GaugeElement& other) const;

 private:
  Blocks blocks_;
  bool unitary_ = false;
};

/// Element of g_C = prod gl(v_l); optionally flagged skew-Hermitian.
struct LieElement {
  Blocks blocks;
  bool skew_hermitian = false;

  /// Throws Error("not_skew_hermitian") when flagged but violated.
  void validate(double tol = 1e-10) const;
};

/// H_l = i(Phi_l(A) - alpha_l) = i Phi_l(A) - a_l id. Eigenvalues of H are the
/// negated slopes of the critical splitting.
struct ShiftedMoment {
  Blocks H;

  /// f = sum_l ||H_l||_F^2.
  double f() const;
};

/// Phi_l = (i/2)(sum_{in(a)=l} A_a A_a^* - sum_{out(a)=l} A_a^* A_a), skew-Hermitian.
Blocks moment(const Quiver& q, const Representation& A);

ShiftedMoment shifted_moment(const Quiver& q, const Representation& A, const StabilityParam& a);

double f_value(const Quiver& q, const Representation& A, const StabilityParam& a);

/// -grad f = 2 (H_in(a) A_a - A_a H_out(a)) in the metric Re tr(X^* Y).
Representation neg_gradient(const Quiver& q, const Representation& A, const StabilityParam& a);
Representation neg_gradient(const Quiver& q, const Representation& A, const ShiftedMoment& h);

/// max_a ||H_in(a) A_a - A_a H_out(a)||_F; zero exactly at critical points.
double critical_residual(const Quiver& q, const Representation& A, const ShiftedMoment& h);

/// (g . A)_a = g_in(a) A_a g_out(a)^{-1} (g_out^* for unitary g).
Representation act(const Quiver& q, const GaugeElement& g, const Representation& A);

/// Action of exp(theta): exp(theta_in) A_a exp(-theta_out). theta may be any
/// element of g_C.
Representation act_exp(const Quiver& q, const Blocks& theta, const Representation& A);

/// rho(A, u)_a = u_in(a) A_a - A_a u_out(a).
Representation rho(const Quiver& q, const Representation& A, const Blocks& u);
inline Representation rho(const Quiver& q, const Representation& A, const LieElement& u) {
  return rho(q, A, u.blocks);
}

/// Metric adjoint of rho(A, .): sum_{in(a)=l} X_a A_a^* - sum_{out(a)=l} A_a^* X_a.
LieElement rho_adjoint(const Quiver& q, const Representation& A, const Representation& X);

/// Frobenius norm over all blocks.
double blocks_norm(const Blocks& b);

/// Per-vertex matrix exponential (empty blocks pass through).
Blocks blocks_exp(const Blocks& theta);

// ---------------------------------------------------------------------------
// Random sampling. All randomness flows from a caller-owned std::mt19937_64.

/// Entries with independent N(0, scale^2) real and imaginary parts.
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0);

Representation random_representation(const Quiver& q, const DimVector& dims, std::mt19937_64& rng,
                                     double scale = 1.0);

/// Haar-distributed unitary blocks (QR of a Ginibre matrix with phase fix).
GaugeElement random_unitary(const DimVector& dims, std::mt19937_64& rng);

/// Ginibre blocks shifted towards the identity so they are well conditioned.
GaugeElement random_invertible(const DimVector& dims, std::mt19937_64& rng, double spread = 0.5);

}  // namespace qmorse
