#include "qmorse/repspace.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qmorse/error.hpp"

namespace qmorse {

namespace {

const Complex kI{0.0, 1.0};

void check_dims(const Quiver& q, const DimVector& dims) {
  if (dims.size() != q.vertex_count()) {
    throw Error("dimension_mismatch", "dimension vector does not match the quiver");
  }
}

void check_blocks(const DimVector& dims, const Blocks& b, const char* what) {
  if (b.size() != dims.size()) throw Error("shape_mismatch", std::string(what) + ": wrong number of blocks");
  for (std::size_t l = 0; l < b.size(); ++l) {
    if (b[l].rows() != dims[l] || b[l].cols() != dims[l]) {
      throw Error("shape_mismatch", std::string(what) + ": block " + std::to_string(l) + " has wrong shape");
    }
  }
}

Blocks zero_blocks(const DimVector& dims) {
  Blocks b;
  b.reserve(dims.size());
  for (std::size_t l = 0; l < dims.size(); ++l) b.push_back(Matrix::Zero(dims[l], dims[l]));
  return b;
}

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

// ---------------------------------------------------------------------------
// Representation

Representation::Representation(const Quiver& q, DimVector dims, std::vector<Matrix> arrows)
    : dims_(std::move(dims)), arrows_(std::move(arrows)) {
  validate(q);
  for (const auto& m : arrows_) {
    if (!m.allFinite()) throw Error("non_finite", "representation contains NaN or Inf");
  }
}

Representation Representation::zero(const Quiver& q, const DimVector& dims) {
  check_dims(q, dims);
  std::vector<Matrix> arrows;
  arrows.reserve(q.edge_count());
  for (const auto& e : q.edges()) arrows.push_back(Matrix::Zero(dims[e.in], dims[e.out]));
  return Representation(q, dims, std::move(arrows));
}

void Representation::validate(const Quiver& q) const {
  check_dims(q, dims_);
  if (arrows_.size() != q.edge_count()) {
    throw Error("shape_mismatch", "representation has " + std::to_string(arrows_.size()) +
                                      " matrices for " + std::to_string(q.edge_count()) + " edges");
  }
  for (std::size_t a = 0; a < arrows_.size(); ++a) {
    const auto& e = q.edge(a);
    if (arrows_[a].rows() != dims_[e.in] || arrows_[a].cols() != dims_[e.out]) {
      throw Error("shape_mismatch", "edge " + std::to_string(a) + " expects a " + std::to_string(dims_[e.in]) +
                                        "x" + std::to_string(dims_[e.out]) + " matrix");
    }
  }
}

double Representation::norm() const {
  double s = 0;
  for (const auto& m : arrows_) s += m.squaredNorm();
  return std::sqrt(s);
}

double Representation::max_abs() const {
  double s = 0;
  for (const auto& m : arrows_) {
    if (m.size() > 0) s = std::max(s, m.cwiseAbs().maxCoeff());
  }
  return s;
}

Representation& Representation::operator+=(const Representation& other) {
  for (std::size_t a = 0; a < arrows_.size(); ++a) arrows_[a] += other.arrows_[a];
  return *this;
}

Representation& Representation::operator-=(const Representation& other) {
  for (std::size_t a = 0; a < arrows_.size(); ++a) arrows_[a] -= other.arrows_[a];
  return *this;
}

Representation& Representation::operator*=(double s) {
  for (auto& m : arrows_) m *= s;
  return *this;
}

double real_inner(const Representation& x, const Representation& y) {
  double s = 0;
  for (std::size_t a = 0; a < x.edge_count(); ++a) {
    s += (x.arrow(a).adjoint() * y.arrow(a)).trace().real();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Gauge and Lie elements

GaugeElement::GaugeElement(const DimVector& dims, Blocks blocks, bool unitary, double max_condition,
                           double unitary_tol)
    : blocks_(std::move(blocks)), unitary_(unitary) {
  check_blocks(dims, blocks_, "gauge element");
  for (const auto& g : blocks_) {
    if (g.size() == 0) continue;
    if (unitary_) {
      const double defect = (g.adjoint() * g - Matrix::Identity(g.rows(), g.cols())).norm();
      if (defect > unitary_tol) throw Error("not_unitary", "gauge block flagged unitary is not unitary");
    }
    if (condition_number(g) > max_condition) {
      throw Error("singular_gauge", "gauge block is singular or too ill-conditioned");
    }
  }
}

GaugeElement GaugeElement::identity(const DimVector& dims) {
  Blocks b;
  for (std::size_t l = 0; l < dims.size(); ++l) b.push_back(Matrix::Identity(dims[l], dims[l]));
  return GaugeElement(dims, std::move(b), true);
}

GaugeElement GaugeElement::inverse() const {
  GaugeElement out(*this);
  for (auto& g : out.blocks_) {
    if (g.size() == 0) continue;
    g = unitary_ ? Matrix(g.adjoint()) : Matrix(g.partialPivLu().inverse());
  }
  return out;
}

GaugeElement GaugeElement::operator*(const GaugeElement& other) const {
  GaugeElement out(*this);
  for (std::size_t l = 0; l < blocks_.size(); ++l) out.blocks_[l] = blocks_[l] * other.blocks_[l];
  out.unitary_ = unitary_ && other.unitary_;
  return out;
}

void LieElement::validate(double tol) const {
  if (!skew_hermitian) return;
  for (const auto& u : blocks) {
    if ((u + u.adjoint()).norm() > tol) throw Error("not_skew_hermitian", "Lie element is not skew-Hermitian");
  }
}

double ShiftedMoment::f() const {
  double s = 0;
  for (const auto& h : H) s += h.squaredNorm();
  return s;
}

// ---------------------------------------------------------------------------
// Moment map and gradient

Blocks moment(const Quiver& q, const Representation& A) {
  A.validate(q);
  Blocks phi = zero_blocks(A.dims());
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    const Matrix& m = A.arrow(a);
    phi[e.in] += m * m.adjoint();
    phi[e.out] -= m.adjoint() * m;
  }
  for (auto& b : phi) b *= 0.5 * kI;
  return phi;
}

ShiftedMoment shifted_moment(const Quiver& q, const Representation& A, const StabilityParam& a) {
  if (a.size() != q.vertex_count()) throw Error("dimension_mismatch", "stability parameter length mismatch");
  A.validate(q);
  // i Phi_l = -(1/2)(sum_in A A^* - sum_out A^* A); computed directly to stay Hermitian.
  Blocks H = zero_blocks(A.dims());
  for (std::size_t e_idx = 0; e_idx < q.edge_count(); ++e_idx) {
    const auto& e = q.edge(e_idx);
    const Matrix& m = A.arrow(e_idx);
    H[e.in].noalias() -= 0.5 * (m * m.adjoint());
    H[e.out].noalias() += 0.5 * (m.adjoint() * m);
  }
  for (std::size_t l = 0; l < H.size(); ++l) {
    H[l].diagonal().array() -= to_double(a[l]);
  }
  return {std::move(H)};
}

double f_value(const Quiver& q, const Representation& A, const StabilityParam& a) {
  return shifted_moment(q, A, a).f();
}

Representation neg_gradient(const Quiver& q, const Representation& A, const ShiftedMoment& h) {
  Representation out(A);
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    out.arrow(a) = 2.0 * (h.H[e.in] * A.arrow(a) - A.arrow(a) * h.H[e.out]);
  }
  return out;
}

Representation neg_gradient(const Quiver& q, const Representation& A, const StabilityParam& a) {
  return neg_gradient(q, A, shifted_moment(q, A, a));
}

double critical_residual(const Quiver& q, const Representation& A, const ShiftedMoment& h) {
  double r = 0;
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    r = std::max(r, (h.H[e.in] * A.arrow(a) - A.arrow(a) * h.H[e.out]).norm());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Group and Lie algebra actions

Representation act(const Quiver& q, const GaugeElement& g, const Representation& A) {
  A.validate(q);
  check_blocks(A.dims(), g.blocks(), "act");
  const GaugeElement inv = g.inverse();
  Representation out(A);
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    out.arrow(a) = g.block(e.in) * A.arrow(a) * inv.block(e.out);
  }
  return out;
}

Blocks blocks_exp(const Blocks& theta) {
  Blocks out;
  out.reserve(theta.size());
  for (const auto& t : theta) out.push_back(t.size() == 0 ? t : Matrix(t.exp()));
  return out;
}

Representation act_exp(const Quiver& q, const Blocks& theta, const Representation& A) {
  Blocks fwd = blocks_exp(theta);
  Blocks neg(theta.size());
  for (std::size_t l = 0; l < theta.size(); ++l) neg[l] = -theta[l];
  Blocks bwd = blocks_exp(neg);
  Representation out(A);
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    out.arrow(a) = fwd[e.in] * A.arrow(a) * bwd[e.out];
  }
  return out;
}

Representation rho(const Quiver& q, const Representation& A, const Blocks& u) {
  check_blocks(A.dims(), u, "rho");
  Representation out(A);
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    out.arrow(a) = u[e.in] * A.arrow(a) - A.arrow(a) * u[e.out];
  }
  return out;
}

LieElement rho_adjoint(const Quiver& q, const Representation& A, const Representation& X) {
  Blocks u = zero_blocks(A.dims());
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    u[e.in] += X.arrow(a) * A.arrow(a).adjoint();
    u[e.out] -= A.arrow(a).adjoint() * X.arrow(a);
  }
  return {std::move(u), false};
}

double blocks_norm(const Blocks& b) {
  double s = 0;
  for (const auto& m : b) s += m.squaredNorm();
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Sampling

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale) {
  if (scale == 0) return Matrix::Zero(rows, cols);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  // Column-major fill order is part of the seeded-determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

Representation random_representation(const Quiver& q, const DimVector& dims, std::mt19937_64& rng,
                                     double scale) {
  check_dims(q, dims);
  std::vector<Matrix> arrows;
  for (const auto& e : q.edges()) arrows.push_back(random_matrix(dims[e.in], dims[e.out], rng, scale));
  return Representation(q, dims, std::move(arrows));
}

GaugeElement random_unitary(const DimVector& dims, std::mt19937_64& rng) {
  Blocks b;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const int n = dims[l];
    if (n == 0) {
      b.emplace_back(0, 0);
      continue;
    }
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
    Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
      const Complex d = R(i, i);
      if (std::abs(d) > 0) Q.col(i) *= d / std::abs(d);
    }
    b.push_back(std::move(Q));
  }
  return GaugeElement(dims, std::move(b), true);
}

GaugeElement random_invertible(const DimVector& dims, std::mt19937_64& rng, double spread) {
  Blocks b;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const int n = dims[l];
    b.push_back(Matrix::Identity(n, n) + random_matrix(n, n, rng, spread / std::max(1.0, std::sqrt(n))));
  }
  return GaugeElement(dims, std::move(b), false);
}

}  // namespace qmorse
