#pragma once

#include "ptcalc/geometry.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace ptcalc {

/// Parses and validates a geometry document:
/// {
///   "name": "...", "dimension": n, "variables": ["x", ...],
///   "domain": [[lo, hi], ...],
///   "metric": [["expr", ...], ...]                  (n x n, symmetric)
///     or "connection": {"Gamma": [[[...]]]}         (Gamma[c][a][b], symmetric in a, b)
///   "sigma": [["expr", ...], ...]                   (optional)
///   "samples": 25, "seed": 1                        (optional)
/// }
/// Throws SchemaError (with a path into the document) or ParseError.
ChartGeometry parse_geometry_json(const nlohmann::json& doc);

/// Loads a geometry file from disk. Throws SchemaError on unreadable files or
/// malformed JSON.
ChartGeometry load_geometry_file(const std::string& path);

} // namespace ptcalc
