#include "qmorse/strata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qmorse/error.hpp"

namespace qmorse {

// ---------------------------------------------------------------------------
// Filtration

int Filtration::offset(std::size_t s, std::size_t l) const {
  int off = 0;
  for (std::size_t r = 0; r < s; ++r) off += type.parts[r][l];
  return off;
}

Matrix Filtration::projection(std::size_t i, std::size_t l) const {
  const int k = offset(i, l);
  const Matrix& U = basis[l];
  return U.leftCols(k) * U.leftCols(k).adjoint();
}

Representation Filtration::rotate(const Quiver& q, const Representation& A) const {
  Representation out(A);
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    out.arrow(a) = basis[e.in].adjoint() * A.arrow(a) * basis[e.out];
  }
  return out;
}

Representation Filtration::unrotate(const Quiver& q, const Representation& A) const {
  Representation out(A);
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    out.arrow(a) = basis[e.in] * A.arrow(a) * basis[e.out].adjoint();
  }
  return out;
}

double Filtration::invariance_residual(const Quiver& q, const Representation& A) const {
  double worst = 0;
  for (std::size_t i = 1; i < length(); ++i) {
    for (std::size_t a = 0; a < q.edge_count(); ++a) {
      const auto& e = q.edge(a);
      const Matrix p_out = projection(i, e.out);
      const Matrix p_in = projection(i, e.in);
      const Matrix leak = (Matrix::Identity(p_in.rows(), p_in.cols()) - p_in) * A.arrow(a) * p_out;
      worst = std::max(worst, leak.norm());
    }
  }
  return worst;
}

Filtration coordinate_filtration(const HNType& type) {
  const DimVector total = type.total();
  Blocks basis;
  for (std::size_t l = 0; l < total.size(); ++l) basis.push_back(Matrix::Identity(total[l], total[l]));
  return {type, std::move(basis)};
}

namespace {

std::string type_string(const HNType& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t s = 0; s < t.parts.size(); ++s) {
    os << (s ? ",(" : "(");
    for (std::size_t l = 0; l < t.parts[s].size(); ++l) os << (l ? "," : "") << t.parts[s][l];
    os << ")";
  }
  os << ")";
  return os.str();
}

// Which piece a basis index at vertex l belongs to.
std::vector<int> piece_index(const HNType& type, std::size_t l) {
  std::vector<int> idx;
  for (std::size_t s = 0; s < type.parts.size(); ++s) idx.insert(idx.end(), type.parts[s][l], static_cast<int>(s));
  return idx;
}

// Permutation times phases in {1, i, -1, -i}: unitary and exact in floating
// point, so the scrambled example stays exactly on its stratum. A dense
// unitary would round it onto the open stratum.
GaugeElement random_monomial_unitary(const DimVector& v, std::mt19937_64& rng) {
  static const Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::uniform_int_distribution<int> phase(0, 3);
  Blocks blocks;
  for (std::size_t l = 0; l < v.size(); ++l) {
    std::vector<int> perm(static_cast<std::size_t>(v[l]));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix U = Matrix::Zero(v[l], v[l]);
    for (int c = 0; c < v[l]; ++c) U(perm[static_cast<std::size_t>(c)], c) = kPhases[phase(rng)];
    blocks.push_back(std::move(U));
  }
  return GaugeElement(v, std::move(blocks), true);
}

}  // namespace

// ---------------------------------------------------------------------------
// Critical classification

CriticalType classify_critical(const Quiver& q, const Representation& A, const StabilityParam& a,
                               double cluster_tol) {
  const ShiftedMoment sm = shifted_moment(q, A, a);
  const DimVector& v = A.dims();
  const std::size_t nv = v.size();

  struct Entry {
    double lambda;
    std::size_t vertex;
    Eigen::Index column;
  };
  std::vector<Entry> entries;
  std::vector<Matrix> vecs(nv);
  for (std::size_t l = 0; l < nv; ++l) {
    if (v[l] == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sm.H[l]);
    vecs[l] = es.eigenvectors();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) entries.push_back({es.eigenvalues()(i), l, i});
  }
  if (entries.empty()) throw Error("zero_rank", "cannot classify a rank-zero representation");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) { return x.lambda < y.lambda; });

  std::vector<std::vector<Entry>> clusters{{entries.front()}};
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const double gap = entries[i].lambda - entries[i - 1].lambda;
    if (gap >= cluster_tol && gap < 2 * cluster_tol) {
      std::ostringstream os;
      os << "eigenvalue gap " << gap << " is within [cluster_tol, 2 cluster_tol); adjust cluster_tol";
      throw Error("cluster_ambiguity", os.str());
    }
    if (gap >= 2 * cluster_tol) clusters.emplace_back();
    clusters.back().push_back(entries[i]);
  }

  CriticalType out;
  Blocks basis(nv);
  std::vector<Eigen::Index> filled(nv, 0);
  for (std::size_t l = 0; l < nv; ++l) basis[l] = Matrix::Zero(v[l], v[l]);
  for (const auto& cl : clusters) {
    std::vector<int> dims(nv, 0);
    double mean = 0;
    for (const auto& e : cl) {
      ++dims[e.vertex];
      mean += e.lambda;
      basis[e.vertex].col(filled[e.vertex]++) = vecs[e.vertex].col(e.column);
    }
    mean /= static_cast<double>(cl.size());
    DimVector part(dims);
    const double mu = to_double(slope(q, part, a));
    if (std::abs(mean + mu) > 100 * cluster_tol) {
      std::ostringstream os;
      os << "cluster eigenvalue " << mean << " does not match -slope " << -mu;
      throw Error("slope_mismatch", os.str());
    }
    out.type.parts.push_back(std::move(part));
    out.eigenvalues.push_back(mean);
  }
  out.filtration = Filtration{out.type, std::move(basis)};

  try {
    validate_hn_type(q, v, a, out.type);
  } catch (const Error& e) {
    throw Error("slope_mismatch", std::string("critical splitting is not an HN type: ") + e.what());
  }

  // Off-diagonal blocks of A in the eigenbasis must vanish.
  const Representation rot = out.filtration.rotate(q, A);
  for (std::size_t e_idx = 0; e_idx < q.edge_count(); ++e_idx) {
    const auto& e = q.edge(e_idx);
    const auto rows = piece_index(out.type, e.in);
    const auto cols = piece_index(out.type, e.out);
    double off = 0;
    for (Eigen::Index r = 0; r < rot.arrow(e_idx).rows(); ++r) {
      for (Eigen::Index c = 0; c < rot.arrow(e_idx).cols(); ++c) {
        if (rows[r] != cols[c]) off = std::max(off, std::abs(rot.arrow(e_idx)(r, c)));
      }
    }
    if (off >= cluster_tol) {
      std::ostringstream os;
      os << "edge " << e_idx << " couples distinct eigenspaces (" << off << ")";
      throw Error("not_critical", os.str());
    }
  }
  return out;
}

FlowClassification classify_by_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                                    const FlowConfig& cfg, double cluster_tol) {
  FlowResult flow = integrate_flow(q, A0, a, cfg);
  if (!flow.converged) {
    std::ostringstream os;
    os << "flow did not converge by t = " << flow.time << " (|grad f| = " << flow.grad_norm << ")";
    throw Error("not_converged", os.str());
  }
  CriticalType crit = classify_critical(q, flow.final, a, cluster_tol);
  return {std::move(flow), std::move(crit)};
}

HNType hn_type_by_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                       const FlowConfig& cfg, double cluster_tol) {
  return classify_by_flow(q, A0, a, cfg, cluster_tol).critical.type;
}

// ---------------------------------------------------------------------------
// Hom spaces

HomSpace hom_space(const Quiver& q, const Representation& B, const Representation& C, double rank_tol) {
  B.validate(q);
  C.validate(q);
  const DimVector& vb = B.dims();
  const DimVector& vc = C.dims();
  const std::size_t nv = q.vertex_count();

  // Unknowns: psi_l (vc[l] x vb[l]) column-major, concatenated over vertices.
  std::vector<Eigen::Index> var_off(nv + 1, 0);
  for (std::size_t l = 0; l < nv; ++l) var_off[l + 1] = var_off[l] + static_cast<Eigen::Index>(vc[l]) * vb[l];
  const Eigen::Index n_vars = var_off[nv];
  auto var = [&](std::size_t l, Eigen::Index r, Eigen::Index c) { return var_off[l] + c * vc[l] + r; };

  Eigen::Index n_eq = 0;
  for (const auto& e : q.edges()) n_eq += static_cast<Eigen::Index>(vc[e.in]) * vb[e.out];

  HomSpace out;
  if (n_vars == 0) return out;

  Matrix M = Matrix::Zero(n_eq, n_vars);
  Eigen::Index row = 0;
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    const Matrix& Ba = B.arrow(a);
    const Matrix& Ca = C.arrow(a);
    for (Eigen::Index c = 0; c < vb[e.out]; ++c) {
      for (Eigen::Index r = 0; r < vc[e.in]; ++r, ++row) {
        // (psi_in B_a)(r, c) = sum_k psi_in(r, k) B_a(k, c)
        for (Eigen::Index k = 0; k < vb[e.in]; ++k) M(row, var(e.in, r, k)) += Ba(k, c);
        // (C_a psi_out)(r, c) = sum_k C_a(r, k) psi_out(k, c)
        for (Eigen::Index k = 0; k < vc[e.out]; ++k) M(row, var(e.out, k, c)) -= Ca(r, k);
      }
    }
  }

  Matrix null_basis;
  if (n_eq == 0) {
    null_basis = Matrix::Identity(n_vars, n_vars);
  } else {
    // Pad to a square system so the full right-singular basis is available.
    Matrix Msq = Matrix::Zero(std::max(n_eq, n_vars), n_vars);
    Msq.topRows(n_eq) = M;
    Eigen::JacobiSVD<Matrix> svd(Msq, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    out.singular_values.assign(s.data(), s.data() + s.size());
    const double threshold = rank_tol * std::max(1.0, s(0));
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > threshold) ++rank;
    null_basis = svd.matrixV().rightCols(n_vars - rank);
  }

  for (Eigen::Index j = 0; j < null_basis.cols(); ++j) {
    Blocks psi(nv);
    for (std::size_t l = 0; l < nv; ++l) {
      psi[l] = Matrix::Zero(vc[l], vb[l]);
      for (Eigen::Index c = 0; c < vb[l]; ++c) {
        for (Eigen::Index r = 0; r < vc[l]; ++r) psi[l](r, c) = null_basis(var(l, r, c), j);
      }
    }
    for (std::size_t a = 0; a < q.edge_count(); ++a) {
      const auto& e = q.edge(a);
      out.max_residual = std::max(out.max_residual, (psi[e.in] * B.arrow(a) - C.arrow(a) * psi[e.out]).norm());
    }
    out.basis.push_back(std::move(psi));
  }
  return out;
}

namespace {

bool all_blocks_invertible(const Blocks& psi, double max_condition) {
  for (const auto& m : psi) {
    if (m.size() == 0) continue;
    if (m.rows() != m.cols()) return false;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (!(s(s.size() - 1) > 0) || s(0) / s(s.size() - 1) > max_condition) return false;
  }
  return true;
}

}  // namespace

IsoResult is_isomorphic(const Quiver& q, const Representation& B, const Representation& C, int trials,
                        std::mt19937_64& rng, double rank_tol) {
  constexpr double kMaxCondition = 1e8;
  IsoResult res;
  if (B.dims() != C.dims()) return res;

  const DimVector& v = B.dims();
  if (v.is_zero()) {
    res.isomorphic = true;
    res.witness = Blocks(v.size());
    return res;
  }

  // The identity is the natural witness when B and C coincide.
  double id_residual = 0;
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    id_residual = std::max(id_residual, (B.arrow(a) - C.arrow(a)).norm());
  }
  const HomSpace hom = hom_space(q, B, C, rank_tol);
  res.hom_dimension = hom.dimension();
  if (id_residual == 0) {
    Blocks id;
    for (std::size_t l = 0; l < v.size(); ++l) id.push_back(Matrix::Identity(v[l], v[l]));
    res.isomorphic = true;
    res.witness = std::move(id);
    return res;
  }
  if (hom.dimension() == 0) return res;

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    ++res.trials_used;
    Blocks psi;
    for (std::size_t l = 0; l < v.size(); ++l) psi.push_back(Matrix::Zero(v[l], v[l]));
    for (const auto& element : hom.basis) {
      const double re = normal(rng);
      const double im = normal(rng);
      const Complex c(re, im);
      for (std::size_t l = 0; l < v.size(); ++l) psi[l] += c * element[l];
    }
    if (all_blocks_invertible(psi, kMaxCondition)) {
      res.isomorphic = true;
      res.witness = std::move(psi);
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Constructed HN examples and graded objects

HnExample make_hn_example(const Quiver& q, const HNType& type, const StabilityParam& a, std::uint64_t seed,
                          const HnExampleOptions& options) {
  const DimVector v = type.total();
  validate_hn_type(q, v, a, type);
  std::mt19937_64 rng(seed);

  HnExample ex;
  ex.type = type;
  for (std::size_t s = 0; s < type.parts.size(); ++s) {
    const DimVector& part = type.parts[s];
    const StabilityParam shifted = a.shifted(slope(q, part, a));
    bool accepted = false;
    for (int attempt = 0; attempt < options.max_attempts && !accepted; ++attempt) {
      ++ex.attempts;
      Representation piece = random_representation(q, part, rng);
      try {
        FlowClassification fc = classify_by_flow(q, piece, shifted, options.flow, options.cluster_tol);
        if (!fc.critical.type.is_trivial()) continue;
        if (options.require_stable && hom_space(q, fc.flow.final, fc.flow.final).dimension() != 1) continue;
        ex.pieces.push_back(std::move(piece));
        ex.piece_limits.push_back(std::move(fc.flow.final));
        accepted = true;
      } catch (const Error&) {
        // Unclassifiable sample; draw again.
      }
    }
    if (!accepted) {
      throw Error("sampling_failed", "no " + std::string(options.require_stable ? "stable" : "semistable") +
                                         " piece found for part " + std::to_string(s) + " of type " +
                                         type_string(type) + " after " + std::to_string(options.max_attempts) +
                                         " attempts");
    }
  }

  // Entry scale of the diagonal blocks sets the scale of the extensions.
  double sum_sq = 0;
  std::size_t count = 0;
  for (const auto& p : ex.pieces) {
    for (const auto& m : p.arrows()) {
      sum_sq += m.squaredNorm();
      count += static_cast<std::size_t>(m.size());
    }
  }
  const double rms = (count > 0 && sum_sq > 0) ? std::sqrt(sum_sq / static_cast<double>(count)) : 1.0;

  Filtration coord = coordinate_filtration(type);
  Representation A = Representation::zero(q, v);
  for (std::size_t e_idx = 0; e_idx < q.edge_count(); ++e_idx) {
    const auto& e = q.edge(e_idx);
    Matrix& M = A.arrow(e_idx);
    for (std::size_t j = 0; j < type.parts.size(); ++j) {
      const int rows = type.parts[j][e.in];
      const int r0 = coord.offset(j, e.in);
      M.block(r0, coord.offset(j, e.out), rows, type.parts[j][e.out]) = ex.pieces[j].arrow(e_idx);
      for (std::size_t k = j + 1; k < type.parts.size(); ++k) {
        const int cols = type.parts[k][e.out];
        M.block(r0, coord.offset(k, e.out), rows, cols) = random_matrix(rows, cols, rng, options.eta_scale * rms);
      }
    }
  }

  if (options.scramble) {
    const GaugeElement u = random_monomial_unitary(v, rng);
    ex.rep = act(q, u, A);
    ex.filtration = Filtration{type, u.blocks()};
  } else {
    ex.rep = std::move(A);
    ex.filtration = std::move(coord);
  }
  return ex;
}

Representation graded_object(const Quiver& q, const Representation& A, const Filtration& filt, double tol) {
  A.validate(q);
  const double residual = filt.invariance_residual(q, A);
  if (residual > tol * std::max(1.0, A.norm())) {
    std::ostringstream os;
    os << "filtration is not invariant under A (residual " << residual << ")";
    throw Error("non_invariant_filtration", os.str());
  }
  Representation rot = filt.rotate(q, A);
  for (std::size_t e_idx = 0; e_idx < q.edge_count(); ++e_idx) {
    const auto& e = q.edge(e_idx);
    const auto rows = piece_index(filt.type, e.in);
    const auto cols = piece_index(filt.type, e.out);
    Matrix& M = rot.arrow(e_idx);
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (Eigen::Index c = 0; c < M.cols(); ++c) {
        if (rows[r] != cols[c]) M(r, c) = 0;
      }
    }
  }
  return rot;
}

GradedLimitReport verify_graded_limit(const Quiver& q, const HnExample& example, const StabilityParam& a,
                                      const FlowConfig& cfg, std::uint64_t seed, double cluster_tol) {
  GradedLimitReport report;
  report.expected_f = to_double(critical_value(q, example.type, a));
  FlowClassification fc = classify_by_flow(q, example.rep, a, cfg, cluster_tol);
  report.converged = fc.flow.converged;
  report.limit_type = fc.critical.type;
  report.type_match = fc.critical.type == example.type;
  report.limit_f = fc.flow.f;

  const Representation gr = graded_object(q, example.rep, example.filtration);
  std::mt19937_64 rng(seed);
  const IsoResult iso = is_isomorphic(q, fc.flow.final, gr, 16, rng);
  report.isomorphic = iso.isomorphic;
  report.hom_dimension = iso.hom_dimension;
  report.end_dimension = hom_space(q, gr, gr).dimension();
  return report;
}

// ---------------------------------------------------------------------------
// Normal space at a critical point

TangentReport tangent_decomposition(const Quiver& q, const Representation& A, const Filtration& filt,
                                    double rank_tol) {
  const Representation rot = filt.rotate(q, A);
  const DimVector& v = A.dims();
  const std::size_t nv = v.size();

  std::vector<Eigen::Index> var_off(nv + 1, 0);
  for (std::size_t l = 0; l < nv; ++l) var_off[l + 1] = var_off[l] + static_cast<Eigen::Index>(v[l]) * v[l];
  auto var = [&](std::size_t l, Eigen::Index r, Eigen::Index c) { return var_off[l] + c * v[l] + r; };
  const Eigen::Index n_vars = var_off[nv];

  // Rows of rho_A restricted to lower-triangular coordinates (piece of the row
  // index at in(a) strictly after the piece of the column index at out(a)).
  struct Row {
    std::size_t edge;
    Eigen::Index r, c;
  };
  std::vector<Row> lt_rows;
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    const auto rows = piece_index(filt.type, e.in);
    const auto cols = piece_index(filt.type, e.out);
    for (Eigen::Index c = 0; c < v[e.out]; ++c) {
      for (Eigen::Index r = 0; r < v[e.in]; ++r) {
        if (rows[r] > cols[c]) lt_rows.push_back({a, r, c});
      }
    }
  }

  TangentReport report;
  report.lt_dimension = static_cast<int>(lt_rows.size());
  if (lt_rows.empty() || n_vars == 0) {
    report.normal_dimension = report.lt_dimension;
    return report;
  }

  Matrix M = Matrix::Zero(static_cast<Eigen::Index>(lt_rows.size()), n_vars);
  for (std::size_t i = 0; i < lt_rows.size(); ++i) {
    const auto& [a, r, c] = lt_rows[i];
    const auto& e = q.edge(a);
    const Matrix& X = rot.arrow(a);
    // (u_in X - X u_out)(r, c)
    for (Eigen::Index k = 0; k < v[e.in]; ++k) M(static_cast<Eigen::Index>(i), var(e.in, r, k)) += X(k, c);
    for (Eigen::Index k = 0; k < v[e.out]; ++k) M(static_cast<Eigen::Index>(i), var(e.out, k, c)) -= X(r, k);
  }

  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  const double threshold = rank_tol * std::max(1.0, A.max_abs());
  int rank = 0;
  report.smallest_kept = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold / 10 && s(i) < threshold * 10) {
      std::ostringstream os;
      os << "singular value " << s(i) << " lies within a decade of the rank threshold " << threshold;
      throw Error("rank_ambiguity", os.str());
    }
    if (s(i) > threshold) {
      ++rank;
      report.smallest_kept = std::min(report.smallest_kept, s(i));
    } else {
      report.largest_dropped = std::max(report.largest_dropped, s(i));
    }
  }
  report.rank = rank;
  report.normal_dimension = report.lt_dimension - rank;
  return report;
}

}  // namespace qmorse
