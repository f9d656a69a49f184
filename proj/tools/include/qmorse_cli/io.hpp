#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qmorse/flow.hpp"
#include "qmorse/quiver.hpp"
#include "qmorse/repspace.hpp"

namespace qmorse::cli {

using nlohmann::json;

/// Reads a quiver spec file, or a builtin when `source` is "builtin:<name>".
QuiverData load_quiver(const std::string& source);
QuiverData parse_quiver(const json& doc);
json quiver_to_json(const QuiverData& data);

Representation parse_rep(const Quiver& q, const DimVector& v, const json& doc);
Representation load_rep(const Quiver& q, const DimVector& v, const std::filesystem::path& path);
json rep_to_json(const Representation& A);

json hn_type_to_json(const HNType& type);

/// Shortest round-trip decimal.
std::string format_double(double x);

/// Writes the header t,f,grad_norm[,sigma][,phi_c_norm]; the optional columns
/// appear when the first sample carries them.
std::string trajectory_csv(const std::vector<FlowSample>& samples);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

json read_json_file(const std::filesystem::path& path);

}  // namespace qmorse::cli
