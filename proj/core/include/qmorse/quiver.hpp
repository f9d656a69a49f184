#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "qmorse/rational.hpp"

namespace qmorse {

/// Directed edge of a quiver, stored as vertex indices. Loops and parallel
/// edges are allowed.
struct Edge {
  std::size_t out;
  std::size_t in;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Finite directed multigraph. Vertex order and edge order are fixed at
/// construction; edge order determines the component order of representations.
class Quiver {
 public:
  Quiver() = default;
  /// Throws Error("invalid_quiver") on duplicate names or dangling endpoints.
  Quiver(std::vector<std::string> vertices, std::vector<Edge> edges);

  /// Convenience constructor addressing edges by vertex name.
  static Quiver from_names(std::vector<std::string> vertices,
                           const std::vector<std::pair<std::string, std::string>>& edges);

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_.at(i); }
  const std::string& vertex_name(std::size_t i) const { return vertices_.at(i); }

  /// Throws Error("unknown_vertex") if absent.
  std::size_t index_of(std::string_view name) const;

  friend bool operator==(const Quiver&, const Quiver&) = default;

 private:
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
};

/// Per-vertex nonnegative ranks.
class DimVector {
 public:
  DimVector() = default;
  explicit DimVector(std::vector<int> values);
  DimVector(std::initializer_list<int> values) : DimVector(std::vector<int>(values)) {}

  static DimVector zeros(std::size_t n) { return DimVector(std::vector<int>(n, 0)); }

  std::size_t size() const noexcept { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  int& operator[](std::size_t i) { return values_[i]; }
  const std::vector<int>& values() const noexcept { return values_; }

  int rank() const noexcept;
  bool is_zero() const noexcept { return rank() == 0; }

  /// Componentwise comparison: every entry of *this is <= other's.
  bool fits_in(const DimVector& other) const;

  DimVector operator+(const DimVector& other) const;
  DimVector operator-(const DimVector& other) const;

  friend bool operator==(const DimVector&, const DimVector&) = default;
  friend auto operator<=>(const DimVector&, const DimVector&) = default;

 private:
  std::vector<int> values_;
};

/// Stability parameter stored through the real encoding a_l = i * alpha_l.
class StabilityParam {
 public:
  StabilityParam() = default;

  /// Validates sum_l a_l v_l == 0 against `total`. Throws
  /// Error("trace_free_violation") or Error("dimension_mismatch").
  static StabilityParam trace_free(std::vector<Rational> values, const DimVector& total);

  /// No trace condition; used for parameters shifted to a stratum piece.
  static StabilityParam unchecked(std::vector<Rational> values);

  std::size_t size() const noexcept { return values_.size(); }
  const Rational& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Rational>& values() const noexcept { return values_; }

  /// a_l - mu for every vertex.
  StabilityParam shifted(const Rational& mu) const;

  friend bool operator==(const StabilityParam&, const StabilityParam&) = default;

 private:
  explicit StabilityParam(std::vector<Rational> values) : values_(std::move(values)) {}
  std::vector<Rational> values_;
};

/// Ordered tuple of nonzero dimension vectors with strictly decreasing slopes.
struct HNType {
  std::vector<DimVector> parts;

  std::size_t length() const noexcept { return parts.size(); }
  bool is_trivial() const noexcept { return parts.size() == 1; }
  DimVector total() const;
  std::vector<int> flattened() const;

  friend bool operator==(const HNType&, const HNType&) = default;
};

/// Checks the HNType invariants against (q, v, a); throws Error("invalid_hn_type").
void validate_hn_type(const Quiver& q, const DimVector& v, const StabilityParam& a,
                      const HNType& type);

Rational degree(const Quiver& q, const DimVector& v, const StabilityParam& a);

/// degree / rank. Throws Error("zero_rank") when rank(v) == 0.
Rational slope(const Quiver& q, const DimVector& v, const StabilityParam& a);

/// Slope of each part repeated rank(part) times.
std::vector<Rational> slope_vector(const Quiver& q, const HNType& type, const StabilityParam& a);

/// sum_s rank(v_s) * slope(v_s)^2, the value of f on the critical set of this type.
Rational critical_value(const Quiver& q, const HNType& type, const StabilityParam& a);

/// All ordered compositions of v into nonzero parts with strictly decreasing
/// slopes. Ordered by length, then lexicographically on the flattened tuple.
std::vector<HNType> enumerate_hn_types(const Quiver& q, const DimVector& v,
                                       const StabilityParam& a, bool include_trivial = true);

/// Lower-triangular representation blocks minus lower-triangular gauge blocks.
/// May be negative for slope-feasible types whose stratum is empty.
long long signed_codimension(const Quiver& q, const HNType& type);

/// As signed_codimension, but throws Error("negative_codimension") if < 0.
long long codimension(const Quiver& q, const HNType& type);

/// a_l = abar off the distinguished vertex, a_inf = -abar * sum_{l != inf} v_l.
/// Requires v[vertex_infty] == 1 and abar < 0.
StabilityParam two_filtered_param(const Quiver& q, const DimVector& v, std::size_t vertex_infty,
                                  const Rational& abar);

/// Quiver with its dimension vector and parameter, as loaded from a spec file.
struct QuiverData {
  Quiver quiver;
  DimVector dims;
  StabilityParam alpha;
};

namespace builtin {

/// 1 -> 2, v = (1,1), a = (1,-1).
QuiverData a2();
/// One vertex with one loop, v = (2), a = 0.
QuiverData jordan();
/// Vertices {1, inf}; edges 1->inf, 1->1, inf->1, 1->1; v = (2,1), a = (-1,2).
QuiverData two_loop();
/// Centre "inf" with rank 1 joined to leaves 1..n; `to_centre[i]` picks the
/// orientation of leaf i's edge. Parameter is two_filtered_param(abar = -1).
QuiverData star(const std::vector<int>& leaf_dims, const std::vector<bool>& to_centre);

/// Looks up "a2", "jordan" or "two-loop". Throws Error("unknown_builtin").
QuiverData by_name(std::string_view name);

}  // namespace builtin

}  // namespace qmorse
