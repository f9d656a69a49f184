#include "qmorse/quiver.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "qmorse/error.hpp"

namespace qmorse {

// ---------------------------------------------------------------------------
// Rational helpers

Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error("bad_rational", "cannot parse rational '" + std::string(text) + "'");
    }
    return value;
  };

  const auto slash = text.find('/');
  const std::int64_t num = parse_int(text.substr(0, slash));
  const std::int64_t den = slash == std::string_view::npos ? 1 : parse_int(text.substr(slash + 1));
  if (den == 0) throw Error("bad_rational", "zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// ---------------------------------------------------------------------------
// Quiver

Quiver::Quiver(std::vector<std::string> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  std::unordered_set<std::string> seen;
  for (const auto& name : vertices_) {
    if (!seen.insert(name).second) throw Error("invalid_quiver", "duplicate vertex '" + name + "'");
  }
  for (const auto& e : edges_) {
    if (e.out >= vertices_.size() || e.in >= vertices_.size()) {
      throw Error("invalid_quiver", "edge endpoint is not a declared vertex");
    }
  }
}

Quiver Quiver::from_names(std::vector<std::string> vertices,
                          const std::vector<std::pair<std::string, std::string>>& edges) {
  Quiver tmp(std::move(vertices), {});
  std::vector<Edge> idx;
  idx.reserve(edges.size());
  for (const auto& [from, to] : edges) idx.push_back({tmp.index_of(from), tmp.index_of(to)});
  return Quiver(tmp.vertices_, std::move(idx));
}

std::size_t Quiver::index_of(std::string_view name) const {
  auto it = std::find(vertices_.begin(), vertices_.end(), name);
  if (it == vertices_.end()) throw Error("unknown_vertex", "unknown vertex '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - vertices_.begin());
}

// ---------------------------------------------------------------------------
// DimVector

DimVector::DimVector(std::vector<int> values) : values_(std::move(values)) {
  for (int x : values_) {
    if (x < 0) throw Error("invalid_dimension", "dimension vector entries must be nonnegative");
  }
}

int DimVector::rank() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0); }

bool DimVector::fits_in(const DimVector& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (values_[i] > other.values_[i]) return false;
  }
  return true;
}

DimVector DimVector::operator+(const DimVector& other) const {
  if (size() != other.size()) throw Error("dimension_mismatch", "adding dimension vectors of different length");
  std::vector<int> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = values_[i] + other.values_[i];
  return DimVector(std::move(out));
}

DimVector DimVector::operator-(const DimVector& other) const {
  if (size() != other.size()) throw Error("dimension_mismatch", "subtracting dimension vectors of different length");
  std::vector<int> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = values_[i] - other.values_[i];
  return DimVector(std::move(out));
}

// ---------------------------------------------------------------------------
// StabilityParam

StabilityParam StabilityParam::trace_free(std::vector<Rational> values, const DimVector& total) {
  if (values.size() != total.size()) {
    throw Error("dimension_mismatch", "stability parameter length differs from dimension vector");
  }
  Rational trace = 0;
  for (std::size_t i = 0; i < values.size(); ++i) trace += values[i] * total[i];
  if (trace != Rational(0)) {
    throw Error("trace_free_violation",
                "stability parameter is not trace-free: sum a_l v_l = " + to_string(trace));
  }
  return StabilityParam(std::move(values));
}

StabilityParam StabilityParam::unchecked(std::vector<Rational> values) {
  return StabilityParam(std::move(values));
}

StabilityParam StabilityParam::shifted(const Rational& mu) const {
  std::vector<Rational> out(values_);
  for (auto& x : out) x -= mu;
  return StabilityParam(std::move(out));
}

// ---------------------------------------------------------------------------
// HN types

DimVector HNType::total() const {
  if (parts.empty()) return {};
  DimVector sum = DimVector::zeros(parts.front().size());
  for (const auto& p : parts) sum = sum + p;
  return sum;
}

std::vector<int> HNType::flattened() const {
  std::vector<int> flat;
  for (const auto& p : parts) flat.insert(flat.end(), p.values().begin(), p.values().end());
  return flat;
}

namespace {

void check_compatible(const Quiver& q, const DimVector& v) {
  if (v.size() != q.vertex_count()) {
    throw Error("dimension_mismatch", "dimension vector length " + std::to_string(v.size()) +
                                          " does not match vertex count " + std::to_string(q.vertex_count()));
  }
}

void check_compatible(const Quiver& q, const DimVector& v, const StabilityParam& a) {
  check_compatible(q, v);
  if (a.size() != q.vertex_count()) {
    throw Error("dimension_mismatch", "stability parameter length does not match vertex count");
  }
}

// Odometer over all w with 0 <= w <= bound componentwise, w != 0.
template <class Fn>
void for_each_nonzero_subvector(const DimVector& bound, Fn&& fn) {
  std::vector<int> w(bound.size(), 0);
  while (true) {
    std::size_t i = 0;
    while (i < w.size() && w[i] == bound[i]) w[i++] = 0;
    if (i == w.size()) return;
    ++w[i];
    fn(DimVector(w));
  }
}

void extend_compositions(const Quiver& q, const StabilityParam& a, const DimVector& remaining,
                         std::optional<Rational> last_slope, std::vector<DimVector>& prefix,
                         std::vector<HNType>& out) {
  if (remaining.is_zero()) {
    out.push_back(HNType{prefix});
    return;
  }
  for_each_nonzero_subvector(remaining, [&](const DimVector& w) {
    const Rational mu = slope(q, w, a);
    if (last_slope && !(mu < *last_slope)) return;
    prefix.push_back(w);
    extend_compositions(q, a, remaining - w, mu, prefix, out);
    prefix.pop_back();
  });
}

}  // namespace

void validate_hn_type(const Quiver& q, const DimVector& v, const StabilityParam& a,
                      const HNType& type) {
  check_compatible(q, v, a);
  if (type.parts.empty()) throw Error("invalid_hn_type", "HN type has no parts");
  for (const auto& p : type.parts) {
    if (p.size() != v.size()) throw Error("invalid_hn_type", "HN part has wrong length");
    if (p.is_zero()) throw Error("invalid_hn_type", "HN part is zero");
  }
  if (type.total() != v) throw Error("invalid_hn_type", "HN parts do not sum to the dimension vector");
  for (std::size_t s = 1; s < type.parts.size(); ++s) {
    if (!(slope(q, type.parts[s], a) < slope(q, type.parts[s - 1], a))) {
      throw Error("invalid_hn_type", "HN slopes are not strictly decreasing");
    }
  }
}

Rational degree(const Quiver& q, const DimVector& v, const StabilityParam& a) {
  check_compatible(q, v, a);
  Rational d = 0;
  for (std::size_t l = 0; l < v.size(); ++l) d += a[l] * v[l];
  return d;
}

Rational slope(const Quiver& q, const DimVector& v, const StabilityParam& a) {
  const Rational d = degree(q, v, a);
  if (v.rank() == 0) throw Error("zero_rank", "slope of a rank-zero dimension vector is undefined");
  return d / v.rank();
}

std::vector<Rational> slope_vector(const Quiver& q, const HNType& type, const StabilityParam& a) {
  std::vector<Rational> nu;
  for (const auto& p : type.parts) {
    const Rational mu = slope(q, p, a);
    nu.insert(nu.end(), static_cast<std::size_t>(p.rank()), mu);
  }
  return nu;
}

Rational critical_value(const Quiver& q, const HNType& type, const StabilityParam& a) {
  Rational total = 0;
  for (const auto& p : type.parts) {
    const Rational mu = slope(q, p, a);
    total += mu * mu * p.rank();
  }
  return total;
}

std::vector<HNType> enumerate_hn_types(const Quiver& q, const DimVector& v,
                                       const StabilityParam& a, bool include_trivial) {
  check_compatible(q, v, a);
  std::vector<HNType> out;
  if (v.is_zero()) return out;
  std::vector<DimVector> prefix;
  extend_compositions(q, a, v, std::nullopt, prefix, out);
  if (!include_trivial) {
    std::erase_if(out, [](const HNType& t) { return t.is_trivial(); });
  }
  std::sort(out.begin(), out.end(), [](const HNType& x, const HNType& y) {
    if (x.length() != y.length()) return x.length() < y.length();
    return x.flattened() < y.flattened();
  });
  return out;
}

long long signed_codimension(const Quiver& q, const HNType& type) {
  for (const auto& p : type.parts) check_compatible(q, p);
  long long rep_lt = 0;
  for (const auto& e : q.edges()) {
    for (std::size_t j = 0; j < type.parts.size(); ++j) {
      for (std::size_t k = j + 1; k < type.parts.size(); ++k) {
        rep_lt += static_cast<long long>(type.parts[j][e.out]) * type.parts[k][e.in];
      }
    }
  }
  long long gauge_lt = 0;
  for (std::size_t l = 0; l < q.vertex_count(); ++l) {
    for (std::size_t j = 0; j < type.parts.size(); ++j) {
      for (std::size_t k = j + 1; k < type.parts.size(); ++k) {
        gauge_lt += static_cast<long long>(type.parts[j][l]) * type.parts[k][l];
      }
    }
  }
  return rep_lt - gauge_lt;
}

long long codimension(const Quiver& q, const HNType& type) {
  const long long d = signed_codimension(q, type);
  if (d < 0) {
    throw Error("negative_codimension",
                "codimension formula is negative (" + std::to_string(d) + "); type is not realizable");
  }
  return d;
}

StabilityParam two_filtered_param(const Quiver& q, const DimVector& v, std::size_t vertex_infty,
                                  const Rational& abar) {
  check_compatible(q, v);
  if (vertex_infty >= v.size() || v[vertex_infty] != 1) {
    throw Error("invalid_argument", "two_filtered_param needs a vertex of rank exactly 1");
  }
  if (!(abar < Rational(0))) throw Error("invalid_argument", "two_filtered_param needs abar < 0");
  std::vector<Rational> a(v.size(), abar);
  int others = v.rank() - 1;
  a[vertex_infty] = -abar * others;
  return StabilityParam::trace_free(std::move(a), v);
}

// ---------------------------------------------------------------------------
// Built-in test quivers

namespace builtin {

QuiverData a2() {
  Quiver q({"1", "2"}, {{0, 1}});
  DimVector v{1, 1};
  return {q, v, StabilityParam::trace_free({Rational(1), Rational(-1)}, v)};
}

QuiverData jordan() {
  Quiver q({"1"}, {{0, 0}});
  DimVector v{2};
  return {q, v, StabilityParam::trace_free({Rational(0)}, v)};
}

QuiverData two_loop() {
  Quiver q({"1", "inf"}, {{0, 1}, {0, 0}, {1, 0}, {0, 0}});
  DimVector v{2, 1};
  return {q, v, StabilityParam::trace_free({Rational(-1), Rational(2)}, v)};
}

QuiverData star(const std::vector<int>& leaf_dims, const std::vector<bool>& to_centre) {
  if (leaf_dims.size() != to_centre.size()) throw Error("invalid_argument", "star: orientation count mismatch");
  std::vector<std::string> names;
  std::vector<Edge> edges;
  std::vector<int> dims;
  const std::size_t n = leaf_dims.size();
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back(std::to_string(i + 1));
    dims.push_back(leaf_dims[i]);
    edges.push_back(to_centre[i] ? Edge{i, n} : Edge{n, i});
  }
  names.push_back("inf");
  dims.push_back(1);
  Quiver q(std::move(names), std::move(edges));
  DimVector v(std::move(dims));
  return {q, v, two_filtered_param(q, v, n, Rational(-1))};
}

QuiverData by_name(std::string_view name) {
  if (name == "a2") return a2();
  if (name == "jordan") return jordan();
  if (name == "two-loop") return two_loop();
  throw Error("unknown_builtin", "unknown builtin quiver '" + std::string(name) + "'");
}

}  // namespace builtin

}  // namespace qmorse
