// Copyright 2026 The qmetric Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmetric/algebra.hpp"
#include "qmetric/bridge.hpp"
#include "qmetric/convex.hpp"
#include "qmetric/lipnorm.hpp"
#include "qmetric/tunnel.hpp"

namespace qmetric {

using Json = nlohmann::json;

/// Schema version written into and accepted from every file.
inline constexpr int kFormatVersion = 1;

/// Parses a JSON file; unreadable or malformed input is a ValidationError.
Json read_json_file(const std::string& path);
/// Checks the optional "format" and "version" fields of a document.
void check_format(const Json& doc, const std::string& format);

/// %.12g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws ValidationError when the row width differs from the header.
  void add_row(std::vector<std::string> row);
};

/// Comma-separated, header row first, LF line endings.
void write_csv(std::ostream& out, const Table& table);
std::string to_csv(const Table& table);
void write_csv_file(const std::string& path, const Table& table);

Json shape_to_json(const Shape& shape);
Shape shape_from_json(const Json& j);
/// {"shape": [...], "blocks": [[re, im, re, im, ...], ...]}, row-major per block.
Json element_to_json(const Element& a);
Element element_from_json(const Json& j);
/// {"shape": [...], "densities": [...]} in the element block layout.
Json state_to_json(const State& s);
State state_from_json(const Json& j);
/// {"kind": "identity" | "diagonal_embedding" | "coordinate_projection" |
/// "tensor_embedding" | "matrix", ...}.
Json star_map_to_json(const StarMap& m);
StarMap star_map_from_json(const Json& j);

/// Lip-norm descriptor, see docs/FORMATS.md for the kinds.
Seminorm seminorm_from_json(const Json& j);

struct LoadedSpace {
  Seminorm lipnorm;
  std::map<std::string, State> states;
};

LoadedSpace load_space(const Json& doc);
/// Named state from the file, or one of the built-ins "trace", "dirac<k>"
/// (k-th one-dimensional block) and "basis<k>" (k-th basis vector of the
/// first block).
State resolve_state(const LoadedSpace& space, const std::string& name);

struct LoadedBridge {
  Bridge bridge;
  Seminorm la;
  Seminorm lb;
};

LoadedBridge load_bridge(const Json& doc);
Json bridge_to_json(const Bridge& bridge);

/// {"treks": [{"steps": [{"bridge": {...}, "length": {...}}]}]}; steps
/// without a "length" get computed bridge length bounds.
std::vector<Trek> load_treks(const Json& doc, const EstimateOptions& options = {});

Json bound_to_json(const Bound& b);
Json solve_report_to_json(const SolveReport& r);

}  // namespace qmetric
