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


#include "qmetric/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qmetric/errors.hpp"
#include "qmetric/models.hpp"

namespace qmetric {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ValidationError(std::string("missing field \"") + name + "\"");
  return j.at(name);
}

template <class T>
T get(const Json& j, const char* name) {
  try {
    return field(j, name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field \"") + name + "\": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* name, T fallback) {
  return j.is_object() && j.contains(name) ? get<T>(j, name) : fallback;
}

Matrix matrix_from_interleaved(const Json& data, int rows, int cols) {
  if (!data.is_array() || data.size() != static_cast<std::size_t>(2 * rows * cols))
    throw ValidationError("block needs 2 * rows * cols interleaved entries");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, k += 2) {
      if (!data[k].is_number() || !data[k + 1].is_number()) throw ValidationError("matrix entries must be numbers");
      m(r, c) = cplx(data[k].get<double>(), data[k + 1].get<double>());
    }
  return m;
}

Json interleaved(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out.push_back(m(r, c).real());
      out.push_back(m(r, c).imag());
    }
  return out;
}

std::vector<Matrix> blocks_from_json(const Shape& shape, const Json& blocks) {
  if (!blocks.is_array() || blocks.size() != static_cast<std::size_t>(shape.num_blocks()))
    throw ValidationError("one entry list per block is required");
  std::vector<Matrix> out;
  for (int i = 0; i < shape.num_blocks(); ++i)
    out.push_back(matrix_from_interleaved(blocks[static_cast<std::size_t>(i)], shape.block_dim(i), shape.block_dim(i)));
  return out;
}

RealMatrix real_matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("expected a nonempty matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  RealMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ValidationError("matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw ValidationError("matrix entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

RealVector lengths_for(const FiniteAbelianGroup& g, const Json& j) {
  const std::string kind = get_or<std::string>(j, "lengths", "word");
  if (kind == "word") return word_lengths(g);
  if (kind == "torus") return torus_lengths(g);
  throw ValidationError("lengths must be \"word\" or \"torus\"");
}

cplx root_of_unity(int n, int p) { return std::polar(1.0, 2.0 * std::numbers::pi * p / n); }

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

void check_format(const Json& doc, const std::string& format) {
  if (!doc.is_object()) throw ValidationError("document must be a JSON object");
  if (doc.contains("format") && get<std::string>(doc, "format") != format)
    throw ValidationError("expected format \"" + format + "\"");
  if (doc.contains("version") && get<int>(doc, "version") != kFormatVersion)
    throw ValidationError("unsupported format version");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ValidationError("row width does not match the header");
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const Table& table) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

std::string to_csv(const Table& table) {
  std::ostringstream s;
  write_csv(s, table);
  return s.str();
}

void write_csv_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_csv(out, table);
}

Json shape_to_json(const Shape& shape) { return shape.block_dims(); }

Shape shape_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("shape must be a nonempty list of block sizes");
  std::vector<int> dims;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<int>() < 1) throw ValidationError("block sizes must be positive integers");
    dims.push_back(v.get<int>());
  }
  return Shape(std::move(dims));
}

Json element_to_json(const Element& a) {
  Json blocks = Json::array();
  for (const auto& b : a.blocks()) blocks.push_back(interleaved(b));
  return {{"shape", shape_to_json(a.shape())}, {"blocks", blocks}};
}

Element element_from_json(const Json& j) {
  const Shape s = shape_from_json(field(j, "shape"));
  return Element(s, blocks_from_json(s, field(j, "blocks")));
}

Json state_to_json(const State& st) {
  Json blocks = Json::array();
  for (const auto& b : st.densities()) blocks.push_back(interleaved(b));
  return {{"shape", shape_to_json(st.shape())}, {"densities", blocks}};
}

State state_from_json(const Json& j) {
  const Shape s = shape_from_json(field(j, "shape"));
  if (j.contains("distribution")) {
    const auto p = get<std::vector<double>>(j, "distribution");
    return State::from_distribution(s, Eigen::Map<const RealVector>(p.data(), static_cast<Eigen::Index>(p.size())));
  }
  return State(s, blocks_from_json(s, field(j, "densities")));
}

Json star_map_to_json(const StarMap& m) {
  // images of the matrix units, block by block, row-major over (i, j)
  Json images = Json::array();
  Eigen::Index off = 0;
  for (int b = 0; b < m.source().num_blocks(); ++b) {
    const int n = m.source().block_dim(b);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        const Vector col = m.matrix().col(off + jj * n + i);
        images.push_back(element_to_json(Element::unvec(m.target(), col)));
      }
    off += static_cast<Eigen::Index>(n) * n;
  }
  return {{"kind", "matrix"},
          {"source", shape_to_json(m.source())},
          {"target", shape_to_json(m.target())},
          {"images", images}};
}

StarMap star_map_from_json(const Json& j) {
  const std::string kind = get<std::string>(j, "kind");
  StarMap m;
  if (kind == "identity") {
    m = StarMap::identity(shape_from_json(field(j, "shape")));
  } else if (kind == "diagonal_embedding") {
    m = StarMap::diagonal_embedding(get<int>(j, "k"));
  } else if (kind == "coordinate_projection") {
    m = StarMap::coordinate_projection(shape_from_json(field(j, "a")), shape_from_json(field(j, "b")),
                                       get<int>(j, "which"));
  } else if (kind == "tensor_embedding") {
    m = StarMap::tensor_embedding(get<int>(j, "n"), get<int>(j, "m"));
  } else if (kind == "matrix") {
    const Shape src = shape_from_json(field(j, "source"));
    const Shape tgt = shape_from_json(field(j, "target"));
    const Json& images = field(j, "images");
    if (!images.is_array() || images.size() != static_cast<std::size_t>(src.real_dim()))
      throw ValidationError("one image per source matrix unit is required");
    Matrix mat(tgt.real_dim(), src.real_dim());
    std::size_t k = 0;
    Eigen::Index off = 0;
    for (int b = 0; b < src.num_blocks(); ++b) {
      const int n = src.block_dim(b);
      for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj, ++k) {
          const Element img = element_from_json(images[k]);
          require_same_shape(img.shape(), tgt, "map image");
          mat.col(off + jj * n + i) = img.vec();
        }
      off += static_cast<Eigen::Index>(n) * n;
    }
    m = StarMap(src, tgt, std::move(mat));
  } else {
    throw ValidationError("unknown map kind \"" + kind + "\"");
  }
  m.verify();
  return m;
}

Seminorm seminorm_from_json(const Json& j) {
  check_format(j, "qmetric/lipnorm");
  const std::string kind = get<std::string>(j, "kind");
  const std::string name = get_or<std::string>(j, "name", kind);
  if (kind == "metric") return from_metric(real_matrix_from_json(field(j, "distances")), name);
  if (kind == "group_action") {
    std::vector<Element> us;
    for (const auto& u : field(j, "unitaries")) us.push_back(element_from_json(u));
    return from_group_action(us, get<std::vector<double>>(j, "lengths"), name);
  }
  if (kind == "fuzzy_torus") {
    const int n = get<int>(j, "n");
    const ActionModel m = fuzzy_torus(n, root_of_unity(n, get_or<int>(j, "p", 1)));
    return m.lipnorm(lengths_for(m.group, j), name);
  }
  if (kind == "commutative_torus") {
    const ActionModel m = commutative_torus(get<int>(j, "n"));
    return m.lipnorm(lengths_for(m.group, j), name);
  }
  if (kind == "twisted_dual") {
    const int n = get<int>(j, "n");
    const ActionModel m = dual_action_model(twisted_group_algebra(Cocycle::clock_shift(n, root_of_unity(n, get_or<int>(j, "p", 1)))));
    return m.lipnorm(lengths_for(m.group, j), name);
  }
  if (kind == "commutator")
    return from_commutator(element_from_json(field(j, "dirac")), star_map_from_json(field(j, "representation")), name);
  if (kind == "uhf") return uhf_filtration(get<int>(j, "k")).lipnorm(name);
  if (kind == "stddev") return from_stddev(state_from_json(field(j, "state")), name);
  if (kind == "dist_to_subspace") {
    std::vector<Element> span;
    for (const auto& e : field(j, "span")) span.push_back(element_from_json(e));
    return Seminorm::dist_to_subspace(span, name);
  }
  throw ValidationError("unknown Lip-norm kind \"" + kind + "\"");
}

LoadedSpace load_space(const Json& doc) {
  check_format(doc, "qmetric/space");
  LoadedSpace s{seminorm_from_json(field(doc, "lipnorm")), {}};
  if (doc.contains("states")) {
    for (const auto& [name, st] : doc.at("states").items()) {
      State state = state_from_json(st);
      require_same_shape(state.shape(), s.lipnorm.shape(), "named state");
      s.states.emplace(name, std::move(state));
    }
  }
  return s;
}

State resolve_state(const LoadedSpace& space, const std::string& name) {
  if (const auto it = space.states.find(name); it != space.states.end()) return it->second;
  const Shape& shape = space.lipnorm.shape();
  if (name == "trace") return State::normalized_trace(shape);
  auto index_after = [&](const std::string& prefix) -> int {
    const std::string rest = name.substr(prefix.size());
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("unknown state \"" + name + "\"");
    return std::stoi(rest);
  };
  if (name.rfind("dirac", 0) == 0) {
    const int k = index_after("dirac");
    if (k >= shape.num_blocks()) throw ValidationError("state \"" + name + "\" is out of range");
    return State::dirac(shape, k);
  }
  if (name.rfind("basis", 0) == 0) {
    const int k = index_after("basis");
    if (k >= shape.block_dim(0)) throw ValidationError("state \"" + name + "\" is out of range");
    return State::vector_state(shape, 0, Vector::Unit(shape.block_dim(0), k));
  }
  throw ValidationError("unknown state \"" + name + "\"");
}

LoadedBridge load_bridge(const Json& doc) {
  check_format(doc, "qmetric/bridge");
  Bridge b(element_from_json(field(doc, "pivot")), star_map_from_json(field(doc, "pi_a")),
           star_map_from_json(field(doc, "pi_b")));
  Seminorm la = seminorm_from_json(field(doc, "a"));
  Seminorm lb = seminorm_from_json(field(doc, "b"));
  require_same_shape(la.shape(), b.domain(), "bridge domain");
  require_same_shape(lb.shape(), b.codomain(), "bridge codomain");
  return {std::move(b), std::move(la), std::move(lb)};
}

Json bridge_to_json(const Bridge& bridge) {
  return {{"format", "qmetric/bridge"},
          {"version", kFormatVersion},
          {"pivot", element_to_json(bridge.pivot())},
          {"pi_a", star_map_to_json(bridge.pi_a())},
          {"pi_b", star_map_to_json(bridge.pi_b())}};
}

std::vector<Trek> load_treks(const Json& doc, const EstimateOptions& options) {
  check_format(doc, "qmetric/treks");
  std::vector<Trek> out;
  for (const auto& t : field(doc, "treks")) {
    std::vector<TrekStep> steps;
    for (const auto& s : field(t, "steps")) {
      LoadedBridge lb = load_bridge(field(s, "bridge"));
      Bound len;
      if (s.contains("length")) {
        const Json& l = s.at("length");
        len.lower = get_or<double>(l, "lower", 0.0);
        len.upper = get<double>(l, "upper");
        len.certified = get_or<bool>(l, "certified", false);
        if (!(len.lower <= len.upper)) throw ValidationError("step length needs lower <= upper");
      } else {
        len = bridge_length_bounds(lb.bridge, lb.la, lb.lb, options).length;
      }
      steps.push_back(TrekStep{std::move(lb.bridge), std::move(lb.la), std::move(lb.lb), len});
    }
    out.emplace_back(std::move(steps));
  }
  return out;
}

Json bound_to_json(const Bound& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"certified", b.certified}};
}

Json solve_report_to_json(const SolveReport& r) {
  Json trace = Json::array();
  for (const auto& p : r.trace)
    trace.push_back({{"iteration", p.iteration}, {"lower", p.lower}, {"upper", p.upper}, {"cuts", p.cuts},
                     {"box_radius", p.box_radius}});
  return {{"value", r.value},         {"lower", r.lower},         {"upper", r.upper},
          {"gap", r.gap},             {"cuts", r.cuts},           {"iterations", r.iterations},
          {"violation", r.violation}, {"box_radius", r.box_radius}, {"certified", r.certified},
          {"trace", trace}};
}

}  // namespace qmetric
