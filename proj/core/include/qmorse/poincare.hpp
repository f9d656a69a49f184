#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "qmorse/quiver.hpp"

namespace qmorse {

/// Integer power series in t kept up to degree N. Arithmetic is exact; any
/// int64 overflow throws Error("overflow").
class TruncatedSeries {
 public:
  TruncatedSeries() : TruncatedSeries(0) {}
  explicit TruncatedSeries(int max_degree);
  TruncatedSeries(int max_degree, std::vector<std::int64_t> coefficients);

  static TruncatedSeries one(int max_degree);
  /// (1 - t^k)^{-1} truncated; k >= 1.
  static TruncatedSeries geometric_inverse(int k, int max_degree);

  int max_degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  std::int64_t operator[](int d) const { return c_.at(static_cast<std::size_t>(d)); }
  const std::vector<std::int64_t>& coefficients() const noexcept { return c_; }
  bool is_zero() const;

  /// Multiplication by t^k (k >= 0), dropping terms beyond N.
  TruncatedSeries shifted(int k) const;

  TruncatedSeries& operator+=(const TruncatedSeries& o);
  TruncatedSeries& operator-=(const TruncatedSeries& o);
  friend TruncatedSeries operator+(TruncatedSeries x, const TruncatedSeries& y) { return x += y; }
  friend TruncatedSeries operator-(TruncatedSeries x, const TruncatedSeries& y) { return x -= y; }
  friend TruncatedSeries operator*(const TruncatedSeries& x, const TruncatedSeries& y);
  friend bool operator==(const TruncatedSeries&, const TruncatedSeries&) = default;

 private:
  std::vector<std::int64_t> c_;
};

/// prod_l prod_{k=1..v_l} (1 - t^{2k})^{-1}.
TruncatedSeries poincare_BG(const DimVector& v, int max_degree);

/// Recursive semistable series with an optional memo on (v, a, N).
class PoincareSolver {
 public:
  PoincareSolver(Quiver q, bool use_memo = true) : q_(std::move(q)), use_memo_(use_memo) {}

  /// a must be trace-free against v. Throws Error("negative_codimension") if a
  /// type of negative codimension has a nonzero product (an inconsistency).
  TruncatedSeries semistable(const DimVector& v, const StabilityParam& a, int max_degree);

  /// P(BG) - [P^ss + sum over nontrivial types]; zero when consistent.
  TruncatedSeries reconstruction_residual(const DimVector& v, const StabilityParam& a, int max_degree);

  std::size_t cache_size() const noexcept { return memo_.size(); }
  std::size_t evaluations() const noexcept { return evaluations_; }
  /// Longest nontrivial type met at the top level or in any recursive call.
  std::size_t max_type_length() const noexcept { return max_type_length_; }

 private:
  TruncatedSeries stratum_sum(const DimVector& v, const StabilityParam& a, int max_degree);

  using Key = std::tuple<std::vector<int>, std::vector<std::pair<std::int64_t, std::int64_t>>, int>;
  Quiver q_;
  bool use_memo_;
  std::map<Key, TruncatedSeries> memo_;
  std::size_t evaluations_ = 0;
  std::size_t max_type_length_ = 0;
};

TruncatedSeries poincare_semistable(const Quiver& q, const DimVector& v, const StabilityParam& a, int max_degree);

TruncatedSeries reconstruct_BG_check(const Quiver& q, const DimVector& v, const StabilityParam& a, int max_degree);

}  // namespace qmorse
