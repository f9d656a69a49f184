#include "qmorse_cli/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "qmorse/error.hpp"

namespace qmorse::cli {

namespace {

const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw Error("parse_error", std::string("missing field '") + key + "'");
  }
  return doc.at(key);
}

Rational rational_field(const json& value, const std::string& vertex) {
  if (value.is_string()) return parse_rational(value.get<std::string>());
  if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
  throw Error("parse_error", "alpha for vertex '" + vertex + "' must be a rational string \"p/q\"");
}

}  // namespace

QuiverData parse_quiver(const json& doc) {
  const json& vs = require(doc, "vertices");
  const json& es = require(doc, "edges");
  if (!vs.is_array() || !es.is_array()) throw Error("parse_error", "'vertices' and 'edges' must be arrays");
  std::vector<std::string> names;
  for (const auto& v : vs) {
    if (!v.is_string()) throw Error("parse_error", "vertex names must be strings");
    names.push_back(v.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : es) {
    const json& from = require(e, "from");
    const json& to = require(e, "to");
    if (!from.is_string() || !to.is_string()) throw Error("parse_error", "edge endpoints must be vertex names");
    edges.emplace_back(from.get<std::string>(), to.get<std::string>());
  }
  Quiver q = Quiver::from_names(names, edges);

  const json& dim = require(doc, "dim");
  const json& alpha = require(doc, "alpha");
  if (!dim.is_object() || !alpha.is_object()) throw Error("parse_error", "'dim' and 'alpha' must be objects keyed by vertex");
  for (const auto& [key, _] : dim.items()) q.index_of(key);
  for (const auto& [key, _] : alpha.items()) q.index_of(key);

  std::vector<int> dims;
  std::vector<Rational> a;
  for (const auto& name : names) {
    if (!dim.contains(name)) throw Error("parse_error", "missing dim for vertex '" + name + "'");
    if (!alpha.contains(name)) throw Error("parse_error", "missing alpha for vertex '" + name + "'");
    const json& d = dim.at(name);
    if (!d.is_number_integer()) throw Error("invalid_dimension", "dim for vertex '" + name + "' must be an integer");
    dims.push_back(d.get<int>());
    a.push_back(rational_field(alpha.at(name), name));
  }
  DimVector v(std::move(dims));
  StabilityParam param = StabilityParam::trace_free(std::move(a), v);
  return {std::move(q), std::move(v), std::move(param)};
}

QuiverData load_quiver(const std::string& source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) return builtin::by_name(source.substr(prefix.size()));
  return parse_quiver(read_json_file(source));
}

json quiver_to_json(const QuiverData& data) {
  json doc;
  doc["vertices"] = data.quiver.vertices();
  doc["edges"] = json::array();
  for (const auto& e : data.quiver.edges()) {
    doc["edges"].push_back({{"from", data.quiver.vertex_name(e.out)}, {"to", data.quiver.vertex_name(e.in)}});
  }
  doc["dim"] = json::object();
  doc["alpha"] = json::object();
  for (std::size_t l = 0; l < data.quiver.vertex_count(); ++l) {
    doc["dim"][data.quiver.vertex_name(l)] = data.dims[l];
    doc["alpha"][data.quiver.vertex_name(l)] = to_string(data.alpha[l]);
  }
  return doc;
}

Representation parse_rep(const Quiver& q, const DimVector& v, const json& doc) {
  const json& mats = require(doc, "matrices");
  if (!mats.is_array() || mats.size() != q.edge_count()) {
    throw Error("shape_mismatch", "expected " + std::to_string(q.edge_count()) + " matrices");
  }
  std::vector<Matrix> arrows;
  for (std::size_t a = 0; a < q.edge_count(); ++a) {
    const auto& e = q.edge(a);
    const int rows = v[e.in];
    const int cols = v[e.out];
    const json& m = mats[a];
    auto shape_error = [&] {
      return Error("shape_mismatch", "matrix " + std::to_string(a) + " must be " + std::to_string(rows) + "x" +
                                         std::to_string(cols));
    };
    if (!m.is_array() || static_cast<int>(m.size()) != rows) throw shape_error();
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r) {
      if (!m[r].is_array() || static_cast<int>(m[r].size()) != cols) throw shape_error();
      for (int c = 0; c < cols; ++c) {
        const json& z = m[r][c];
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
          throw Error("parse_error", "entries must be [re, im] pairs");
        }
        M(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
      }
    }
    arrows.push_back(std::move(M));
  }
  return Representation(q, v, std::move(arrows));
}

Representation load_rep(const Quiver& q, const DimVector& v, const std::filesystem::path& path) {
  return parse_rep(q, v, read_json_file(path));
}

json rep_to_json(const Representation& A) {
  json mats = json::array();
  for (const auto& M : A.arrows()) {
    json m = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back({M(r, c).real(), M(r, c).imag()});
      m.push_back(std::move(row));
    }
    mats.push_back(std::move(m));
  }
  return {{"matrices", std::move(mats)}};
}

json hn_type_to_json(const HNType& type) {
  json out = json::array();
  for (const auto& p : type.parts) out.push_back(p.values());
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const std::vector<FlowSample>& samples) {
  const bool has_sigma = !samples.empty() && samples.front().sigma.has_value();
  const bool has_phi = !samples.empty() && samples.front().phi_c_norm.has_value();
  std::ostringstream os;
  os << "t,f,grad_norm";
  if (has_sigma) os << ",sigma";
  if (has_phi) os << ",phi_c_norm";
  os << '\n';
  for (const auto& s : samples) {
    os << format_double(s.t) << ',' << format_double(s.f) << ',' << format_double(s.grad_norm);
    if (has_sigma) os << ',' << (s.sigma ? format_double(*s.sigma) : "");
    if (has_phi) os << ',' << (s.phi_c_norm ? format_double(*s.phi_c_norm) : "");
    os << '\n';
  }
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("io_error", "cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw Error("io_error", "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("io_error", "cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("io_error", "cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error("parse_error", path.string() + ": " + e.what());
  }
}

}  // namespace qmorse::cli
