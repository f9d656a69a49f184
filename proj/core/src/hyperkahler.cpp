#include "qmorse/hyperkahler.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/SVD>

#include "qmorse/error.hpp"

namespace qmorse {

Quiver double_quiver(const Quiver& q) {
  std::vector<Edge> edges = q.edges();
  for (const Edge& e : q.edges()) edges.push_back({e.in, e.out});
  return Quiver(q.vertices(), std::move(edges));
}

DoubledRep::DoubledRep(const Quiver& q, Representation rep)
    : base_(q), doubled_(double_quiver(q)), rep_(std::move(rep)) {
  if (rep_.edge_count() != doubled_.edge_count()) {
    throw Error("shape_mismatch", "representation does not live on the doubled quiver");
  }
  rep_.validate(doubled_);
}

DoubledRep DoubledRep::from_pair(const Quiver& q, const Representation& A, const std::vector<Matrix>& B) {
  std::vector<Matrix> arrows(A.arrows().begin(), A.arrows().end());
  arrows.insert(arrows.end(), B.begin(), B.end());
  const Quiver d = double_quiver(q);
  return DoubledRep(q, Representation(d, A.dims(), std::move(arrows)));
}

Blocks moment_complex(const DoubledRep& x) {
  const DimVector& v = x.rep().dims();
  Blocks phi;
  for (std::size_t l = 0; l < v.size(); ++l) phi.push_back(Matrix::Zero(v[l], v[l]));
  for (std::size_t a = 0; a < x.base().edge_count(); ++a) {
    const Edge& e = x.base().edge(a);
    phi[e.in] += x.A(a) * x.B(a);
    phi[e.out] -= x.B(a) * x.A(a);
  }
  return phi;
}

LevelFlowResult flow_on_level(const DoubledRep& x0, const StabilityParam& a, const FlowConfig& cfg,
                              double level_tol, const SampleObserver& observer) {
  const double phi0 = blocks_norm(moment_complex(x0));
  if (!(phi0 < level_tol)) {
    std::ostringstream os;
    os << "initial point has ||Phi_C|| = " << phi0 << " >= level_tol = " << level_tol;
    throw Error("off_level", os.str());
  }
  LevelFlowResult out;
  const Quiver& base = x0.base();
  auto track = [&](FlowSample& s, const Representation& A) {
    const double phi = blocks_norm(moment_complex(DoubledRep(base, A)));
    s.phi_c_norm = phi;
    out.max_phi_c = std::max(out.max_phi_c, phi);
    if (observer) observer(s, A);
  };
  out.flow = integrate_flow(x0.doubled(), x0.rep(), a, cfg, track);
  return out;
}

double level_linearization_residual(const DoubledRep& x, const Filtration& filt, const Representation& delta) {
  if (filt.length() > 2) {
    throw Error("filtration_too_long", "the linearization check needs a filtration of length at most 2");
  }
  return blocks_norm(moment_complex(DoubledRep(x.base(), delta)));
}

double level_linearization_difference(const DoubledRep& x, const Representation& delta) {
  const DoubledRep moved(x.base(), x.rep() + delta);
  const Blocks phi1 = moment_complex(moved);
  const Blocks phi0 = moment_complex(x);
  // dPhi_C(dA, dB) = Phi_C(dA, B) + Phi_C(A, dB)
  std::vector<Matrix> mixed1, mixed2;
  const std::size_t E = x.base().edge_count();
  for (std::size_t a = 0; a < 2 * E; ++a) {
    const bool is_a = a < E;
    mixed1.push_back(is_a ? delta.arrow(a) : x.rep().arrow(a));
    mixed2.push_back(is_a ? x.rep().arrow(a) : delta.arrow(a));
  }
  const Blocks d1 = moment_complex(DoubledRep(x.base(), Representation(x.doubled(), x.rep().dims(), mixed1)));
  const Blocks d2 = moment_complex(DoubledRep(x.base(), Representation(x.doubled(), x.rep().dims(), mixed2)));
  Blocks r;
  for (std::size_t l = 0; l < phi0.size(); ++l) r.push_back(phi1[l] - phi0[l] - d1[l] - d2[l]);
  return blocks_norm(r);
}

Representation random_lower_triangular(const Quiver& doubled, const Filtration& filt, std::mt19937_64& rng) {
  const DimVector v = filt.type.total();
  std::normal_distribution<double> normal(0.0, 1.0);
  auto piece_of = [&](std::size_t l) {
    std::vector<int> idx;
    for (std::size_t s = 0; s < filt.length(); ++s) idx.insert(idx.end(), filt.type.parts[s][l], static_cast<int>(s));
    return idx;
  };
  Representation R = Representation::zero(doubled, v);
  for (std::size_t a = 0; a < doubled.edge_count(); ++a) {
    const Edge& e = doubled.edge(a);
    const auto rows = piece_of(e.in);
    const auto cols = piece_of(e.out);
    Matrix& M = R.arrow(a);
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      for (Eigen::Index r = 0; r < M.rows(); ++r) {
        if (rows[r] > cols[c]) {
          const double re = normal(rng);
          const double im = normal(rng);
          M(r, c) = Complex(re, im);
        }
      }
    }
  }
  return filt.unrotate(doubled, R);
}

DoubledRep random_level_point(const Quiver& q, const DimVector& v, std::mt19937_64& rng, bool gauge) {
  const Quiver d = double_quiver(q);
  const Representation A = random_representation(q, v, rng);
  const std::size_t E = q.edge_count();

  // B -> Phi_C(A, B) is linear; draw B from its kernel.
  std::vector<std::pair<std::size_t, Eigen::Index>> coords;  // (edge, entry)
  for (std::size_t a = 0; a < E; ++a) {
    const auto& e = q.edge(a);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(v[e.out]) * v[e.in]; ++k) coords.emplace_back(a, k);
  }
  std::vector<Eigen::Index> off(v.size() + 1, 0);
  for (std::size_t l = 0; l < v.size(); ++l) off[l + 1] = off[l] + static_cast<Eigen::Index>(v[l]) * v[l];

  std::vector<Matrix> zeroB;
  for (std::size_t a = 0; a < E; ++a) zeroB.push_back(Matrix::Zero(v[q.edge(a).out], v[q.edge(a).in]));

  Matrix L = Matrix::Zero(std::max<Eigen::Index>(off.back(), static_cast<Eigen::Index>(coords.size())),
                          static_cast<Eigen::Index>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) {
    std::vector<Matrix> B = zeroB;
    B[coords[j].first](coords[j].second) = 1.0;
    const Blocks phi = moment_complex(DoubledRep::from_pair(q, A, B));
    for (std::size_t l = 0; l < v.size(); ++l) {
      for (Eigen::Index k = 0; k < phi[l].size(); ++k) L(off[l] + k, static_cast<Eigen::Index>(j)) = phi[l](k);
    }
  }

  std::vector<Matrix> B = zeroB;
  if (!coords.empty()) {
    Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, sv(0))) ++rank;
    const Matrix kernel = svd.matrixV().rightCols(static_cast<Eigen::Index>(coords.size()) - rank);
    if (kernel.cols() > 0) {
      const Eigen::VectorXcd b = kernel * random_matrix(kernel.cols(), 1, rng);
      for (std::size_t j = 0; j < coords.size(); ++j) B[coords[j].first](coords[j].second) = b(static_cast<Eigen::Index>(j));
    }
  }

  DoubledRep x = DoubledRep::from_pair(q, A, B);
  if (gauge) x = DoubledRep(q, act(d, random_invertible(v, rng), x.rep()));
  return x;
}

}  // namespace qmorse
