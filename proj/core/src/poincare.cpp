#include "qmorse/poincare.hpp"

#include <algorithm>

#include "qmorse/error.hpp"

namespace qmorse {

namespace {

std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw Error("overflow", "series coefficient overflow");
  return r;
}

std::int64_t checked_sub(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_sub_overflow(x, y, &r)) throw Error("overflow", "series coefficient overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw Error("overflow", "series coefficient overflow");
  return r;
}

void require_same_degree(const TruncatedSeries& x, const TruncatedSeries& y) {
  if (x.max_degree() != y.max_degree()) throw Error("dimension_mismatch", "series truncated at different degrees");
}

}  // namespace

TruncatedSeries::TruncatedSeries(int max_degree) {
  if (max_degree < 0) throw Error("invalid_argument", "max_degree must be >= 0");
  c_.assign(static_cast<std::size_t>(max_degree) + 1, 0);
}

TruncatedSeries::TruncatedSeries(int max_degree, std::vector<std::int64_t> coefficients) : TruncatedSeries(max_degree) {
  if (coefficients.size() > c_.size()) coefficients.resize(c_.size());
  std::copy(coefficients.begin(), coefficients.end(), c_.begin());
}

TruncatedSeries TruncatedSeries::one(int max_degree) {
  TruncatedSeries s(max_degree);
  s.c_[0] = 1;
  return s;
}

TruncatedSeries TruncatedSeries::geometric_inverse(int k, int max_degree) {
  if (k < 1) throw Error("invalid_argument", "geometric_inverse needs k >= 1");
  TruncatedSeries s(max_degree);
  for (int d = 0; d <= max_degree; d += k) s.c_[static_cast<std::size_t>(d)] = 1;
  return s;
}

bool TruncatedSeries::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](std::int64_t x) { return x == 0; });
}

TruncatedSeries TruncatedSeries::shifted(int k) const {
  if (k < 0) throw Error("invalid_argument", "negative shift");
  TruncatedSeries s(max_degree());
  for (int d = 0; d + k <= max_degree(); ++d) s.c_[static_cast<std::size_t>(d + k)] = c_[static_cast<std::size_t>(d)];
  return s;
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& o) {
  require_same_degree(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = checked_add(c_[i], o.c_[i]);
  return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& o) {
  require_same_degree(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = checked_sub(c_[i], o.c_[i]);
  return *this;
}

TruncatedSeries operator*(const TruncatedSeries& x, const TruncatedSeries& y) {
  require_same_degree(x, y);
  TruncatedSeries r(x.max_degree());
  const std::size_t n = x.c_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (x.c_[i] == 0) continue;
    for (std::size_t j = 0; i + j < n; ++j) r.c_[i + j] = checked_add(r.c_[i + j], checked_mul(x.c_[i], y.c_[j]));
  }
  return r;
}

TruncatedSeries poincare_BG(const DimVector& v, int max_degree) {
  TruncatedSeries p = TruncatedSeries::one(max_degree);
  for (std::size_t l = 0; l < v.size(); ++l) {
    for (int k = 1; k <= v[l]; ++k) {
      if (2 * k > max_degree) break;
      p = p * TruncatedSeries::geometric_inverse(2 * k, max_degree);
    }
  }
  return p;
}

TruncatedSeries PoincareSolver::stratum_sum(const DimVector& v, const StabilityParam& a, int max_degree) {
  TruncatedSeries sum(max_degree);
  for (const HNType& type : enumerate_hn_types(q_, v, a, /*include_trivial=*/false)) {
    max_type_length_ = std::max(max_type_length_, type.length());
    TruncatedSeries prod = TruncatedSeries::one(max_degree);
    for (const DimVector& part : type.parts) {
      prod = prod * semistable(part, a.shifted(slope(q_, part, a)), max_degree);
      if (prod.is_zero()) break;
    }
    const long long d = signed_codimension(q_, type);
    if (d < 0) {
      if (!prod.is_zero()) {
        throw Error("negative_codimension",
                    "a type of negative codimension has a nonempty stratum; the recursion is inconsistent");
      }
      continue;
    }
    if (2 * d > max_degree) continue;
    sum += prod.shifted(static_cast<int>(2 * d));
  }
  return sum;
}

TruncatedSeries PoincareSolver::semistable(const DimVector& v, const StabilityParam& a, int max_degree) {
  if (v.size() != q_.vertex_count() || a.size() != q_.vertex_count()) {
    throw Error("dimension_mismatch", "dimension vector or parameter does not match the quiver");
  }
  Key key;
  if (use_memo_) {
    std::vector<std::pair<std::int64_t, std::int64_t>> ak;
    for (const auto& r : a.values()) ak.emplace_back(r.numerator(), r.denominator());
    key = Key{v.values(), std::move(ak), max_degree};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  ++evaluations_;
  TruncatedSeries p = poincare_BG(v, max_degree) - stratum_sum(v, a, max_degree);
  if (use_memo_) memo_.emplace(std::move(key), p);
  return p;
}

TruncatedSeries PoincareSolver::reconstruction_residual(const DimVector& v, const StabilityParam& a, int max_degree) {
  const TruncatedSeries ss = semistable(v, a, max_degree);
  return poincare_BG(v, max_degree) - (ss + stratum_sum(v, a, max_degree));
}

TruncatedSeries poincare_semistable(const Quiver& q, const DimVector& v, const StabilityParam& a, int max_degree) {
  return PoincareSolver(q).semistable(v, a, max_degree);
}

TruncatedSeries reconstruct_BG_check(const Quiver& q, const DimVector& v, const StabilityParam& a, int max_degree) {
  return PoincareSolver(q).reconstruction_residual(v, a, max_degree);
}

}  // namespace qmorse
