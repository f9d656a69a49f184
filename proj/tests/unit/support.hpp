#pragma once

#include <random>
#include <vector>

#include "qmorse/quiver.hpp"
#include "qmorse/repspace.hpp"

namespace qmorse::testing {

inline Rational R(std::int64_t p, std::int64_t q = 1) { return Rational(p, q); }

/// Random quiver with `n` vertices and `m` edges (loops allowed), random dims
/// in [0, max_dim] with nonzero total, and a random trace-free parameter.
inline QuiverData random_quiver(std::mt19937_64& rng, std::size_t n, std::size_t m, int max_dim) {
  std::uniform_int_distribution<std::size_t> vert(0, n - 1);
  std::uniform_int_distribution<int> dim(0, max_dim);
  std::uniform_int_distribution<int> num(-4, 4);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < m; ++k) edges.push_back({vert(rng), vert(rng)});
  std::vector<int> d(n);
  do {
    for (auto& x : d) x = dim(rng);
  } while (DimVector(d).is_zero());
  const DimVector v(d);

  // Random rationals, then shift a nonzero-rank vertex to make it trace-free.
  std::vector<Rational> a(n);
  for (auto& x : a) x = Rational(num(rng), 1 + (num(rng) + 4) % 3);
  std::size_t pivot = 0;
  while (v[pivot] == 0) ++pivot;
  Rational trace(0);
  for (std::size_t l = 0; l < n; ++l) trace += a[l] * Rational(v[l]);
  a[pivot] -= trace / Rational(v[pivot]);
  return {Quiver(names, edges), v, StabilityParam::trace_free(a, v)};
}

/// Random star quiver (centre "inf" of rank 1) with random orientations.
inline QuiverData random_star(std::mt19937_64& rng, int max_leaves = 4, int max_dim = 3) {
  std::uniform_int_distribution<int> leaves(1, max_leaves);
  std::uniform_int_distribution<int> dim(1, max_dim);
  std::bernoulli_distribution coin(0.5);
  const int n = leaves(rng);
  std::vector<int> dims;
  std::vector<bool> orient;
  for (int i = 0; i < n; ++i) {
    dims.push_back(dim(rng));
    orient.push_back(coin(rng));
  }
  return builtin::star(dims, orient);
}

}  // namespace qmorse::testing
