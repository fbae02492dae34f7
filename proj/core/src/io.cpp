#include "graphtube/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "graphtube/errors.hpp"

namespace graphtube {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

namespace {

/// Converts a byte offset from nlohmann's parse_error into line/column.
[[noreturn]] void rethrow_parse(const std::string& text, const json::parse_error& e) {
  size_t line = 1, col = 1;
  const size_t upto = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
  for (size_t i = 0; i < upto; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                   std::to_string(col) + ": " + e.what());
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    rethrow_parse(text, e);
  }
}

Vec to_vec(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ValidationError(std::string(what) + " must be a nonempty array");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + " must be numeric");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::vector<double> to_doubles(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError(std::string(what) + " must be numeric");
    v.push_back(x.get<double>());
  }
  return v;
}

const json& require(const json& j, const char* key, const char* ctx) {
  const auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(std::string(ctx) + " is missing required key \"" + key + "\"");
  return *it;
}

Graph parse_graph_json(const json& j) {
  if (!j.is_object()) throw ValidationError("graph description must be a JSON object");
  if (j.contains("spider")) {
    const json& sp = j["spider"];
    std::vector<Vec> dirs;
    for (const auto& d : require(sp, "directions", "spider"))
      dirs.push_back(to_vec(d, "spider direction"));
    const std::vector<double> widths = to_doubles(require(sp, "widths", "spider"), "widths");
    if (j.contains("n")) {
      const int n = j["n"].get<int>();
      for (const Vec& d : dirs)
        if (d.size() != n)
          throw ValidationError("spider direction dimension disagrees with \"n\"");
    }
    return SpiderGraph(std::move(dirs), widths);
  }
  if (j.contains("metric_graph")) {
    const json& mg = j["metric_graph"];
    std::vector<Vec> vertices;
    for (const auto& v : require(mg, "vertices", "metric_graph"))
      vertices.push_back(to_vec(v, "vertex"));
    std::vector<MetricEdge> edges;
    for (const auto& e : require(mg, "edges", "metric_graph")) {
      std::vector<double> s;
      std::vector<Vec> pts, tans, curvs;
      for (const auto& row : require(e, "curve_samples", "edge")) {
        if (!row.is_array() || row.size() != 4)
          throw ValidationError("curve_samples rows must be [s, point, tangent, curvature]");
        s.push_back(row[0].get<double>());
        pts.push_back(to_vec(row[1], "curve point"));
        tans.push_back(to_vec(row[2], "curve tangent"));
        curvs.push_back(to_vec(row[3], "curve curvature"));
      }
      edges.push_back({require(e, "from", "edge").get<int>(),
                       require(e, "to", "edge").get<int>(),
                       ParamCurve(std::move(s), std::move(pts), std::move(tans),
                                  std::move(curvs)),
                       require(e, "width", "edge").get<double>()});
    }
    return MetricGraph(std::move(vertices), std::move(edges));
  }
  throw ValidationError("graph description needs a \"spider\" or \"metric_graph\" key");
}

PotentialShape parse_shape_json(const json& j) {
  if (!j.is_object()) throw ValidationError("shape spec must be a JSON object");
  const std::string kind = require(j, "kind", "shape").get<std::string>();
  if (kind == "power_ratio")
    return PotentialShape::power_ratio(require(j, "alpha", "shape").get<double>());
  if (kind == "tabulated")
    return PotentialShape::tabulated(to_doubles(require(j, "r", "shape"), "r"),
                                     to_doubles(require(j, "u", "shape"), "u"),
                                     to_doubles(require(j, "du", "shape"), "du"));
  throw ValidationError("unknown shape kind \"" + kind + "\"");
}

}  // namespace

Graph parse_graph(const std::string& text) { return parse_graph_json(parse_json(text)); }

Graph load_graph(const std::string& path) { return parse_graph(read_file(path)); }

PotentialShape parse_shape(const std::string& text) {
  return parse_shape_json(parse_json(text));
}

std::vector<PotentialShape> parse_shapes(const std::string& text, int n_edges) {
  const json j = parse_json(text);
  std::vector<PotentialShape> shapes;
  if (j.is_array()) {
    for (const auto& item : j) shapes.push_back(parse_shape_json(item));
    if (static_cast<int>(shapes.size()) != n_edges)
      throw ValidationError("shape list has " + std::to_string(shapes.size()) +
                            " entries for " + std::to_string(n_edges) + " edges");
  } else {
    shapes.assign(static_cast<size_t>(n_edges), parse_shape_json(j));
  }
  return shapes;
}

std::vector<PotentialShape> load_shapes(const std::string& path, int n_edges) {
  return parse_shapes(read_file(path), n_edges);
}

CoeffSpec parse_coeffs(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ValidationError("coefficient preset must be a JSON object");
  CoeffSpec spec;
  if (j.contains("sigma")) {
    const json& s = j["sigma"];
    spec.sigma_kind = require(s, "kind", "sigma").get<std::string>();
    if (spec.sigma_kind == "constant") {
      const json& m = require(s, "matrix", "sigma");
      const size_t rows = m.size();
      if (rows == 0) throw ValidationError("sigma matrix must be nonempty");
      spec.sigma_matrix.resize(static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(m[0].size()));
      for (size_t r = 0; r < rows; ++r) {
        const Vec row = to_vec(m[r], "sigma matrix row");
        if (row.size() != spec.sigma_matrix.cols())
          throw ValidationError("sigma matrix rows have unequal lengths");
        spec.sigma_matrix.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
    } else if (spec.sigma_kind == "radial_scalar") {
      const json& p = require(s, "params", "sigma");
      spec.g0 = require(p, "g0", "radial_scalar params").get<double>();
      spec.g1 = require(p, "g1", "radial_scalar params").get<double>();
      spec.scale = require(p, "scale", "radial_scalar params").get<double>();
    } else if (spec.sigma_kind != "identity") {
      throw ValidationError("unknown sigma kind \"" + spec.sigma_kind + "\"");
    }
  }
  if (j.contains("b")) {
    const json& b = j["b"];
    spec.b_kind = require(b, "kind", "b").get<std::string>();
    if (spec.b_kind == "constant") {
      spec.b_vector = to_vec(require(b, "vector", "b"), "drift vector");
    } else if (spec.b_kind == "tangential_pull") {
      spec.pull_strength = require(b, "strength", "b").get<double>();
    } else if (spec.b_kind != "zero") {
      throw ValidationError("unknown drift kind \"" + spec.b_kind + "\"");
    }
  }
  return spec;
}

SdeCoefficients build_coefficients(const CoeffSpec& spec, const Graph& graph, int dim) {
  SdeCoefficients coeffs = SdeCoefficients::identity(dim);
  if (spec.sigma_kind == "constant") {
    if (spec.sigma_matrix.rows() != dim || spec.sigma_matrix.cols() != dim)
      throw ValidationError("sigma matrix shape disagrees with the ambient dimension");
    coeffs = SdeCoefficients::constant(spec.sigma_matrix, Vec::Zero(dim));
  } else if (spec.sigma_kind == "radial_scalar") {
    coeffs = SdeCoefficients::radial_scalar(dim, spec.g0, spec.g1, spec.scale);
  }
  if (spec.b_kind == "constant") {
    if (spec.b_vector.size() != dim)
      throw ValidationError("drift vector length disagrees with the ambient dimension");
    coeffs.with_constant_drift(spec.b_vector);
  } else if (spec.b_kind == "tangential_pull") {
    coeffs.with_tangential_pull(graph, spec.pull_strength);
  }
  return coeffs;
}

namespace {

std::ostream& full_precision(std::ostream& os) {
  os << std::setprecision(17);
  return os;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Path& path) {
  full_precision(os) << "t";
  for (int d = 1; d <= path.dim; ++d) os << ",x_" << d;
  os << "\n";
  for (long k = 0; k < path.samples(); ++k) {
    os << path.times[k];
    for (int d = 0; d < path.dim; ++d) os << "," << path.xs[k * path.dim + d];
    os << "\n";
  }
}

void write_graph_path_csv(std::ostream& os, const GraphPath& path) {
  full_precision(os) << "t,edge_index,s\n";
  for (long k = 0; k < path.samples(); ++k)
    os << path.times[k] << "," << path.edges[k] << "," << path.ss[k] << "\n";
}

void write_histogram_csv(std::ostream& os, const std::vector<double>& edges,
                         const std::vector<double>& empirical,
                         const std::vector<double>& model) {
  if (edges.size() != empirical.size() + 1 || empirical.size() != model.size())
    throw Error("histogram arrays disagree in length");
  full_precision(os) << "r_lo,r_hi,empirical_density,model_density\n";
  for (size_t b = 0; b < empirical.size(); ++b)
    os << edges[b] << "," << edges[b + 1] << "," << empirical[b] << "," << model[b]
       << "\n";
}

}  // namespace graphtube
