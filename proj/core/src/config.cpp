#include "graphtube/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "json.hpp"

#include "graphtube/errors.hpp"
#include "graphtube/reports.hpp"

namespace graphtube {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 7> kKindNames = {
    "hit_probs",  "occupation",  "stationarity",     "residual",
    "convergence_sweep", "curve_limit", "reflected_variant"};

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

Vec to_vec(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ValidationError(std::string(what) + " must be a nonempty array");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

std::vector<double> number_or_list(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
  }
  throw ValidationError(std::string(what) + " must be a number or an array of numbers");
}

StartSpec parse_start(const json& j) {
  StartSpec st;
  if (!j.is_object()) throw ValidationError("\"start\" must be a JSON object");
  st.kind = j.value("kind", std::string("origin"));
  if (st.kind == "origin") {
  } else if (st.kind == "point") {
    st.point = to_vec(j.at("x"), "start point");
  } else if (st.kind == "two_points") {
    st.point_a = to_vec(j.at("a"), "start point a");
    st.point_b = to_vec(j.at("b"), "start point b");
  } else if (st.kind == "edge_point") {
    st.edge = j.at("edge").get<int>();
    st.s = j.value("s", 0.0);
  } else {
    throw ValidationError("unknown start kind \"" + st.kind + "\"");
  }
  return st;
}

ExperimentConfig parse_experiment_json(const json& j) {
  if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
  if (!j.contains("graph"))
    throw ValidationError("experiment config is missing required key \"graph\"");
  ExperimentConfig cfg(parse_graph(j["graph"].dump()));
  cfg.name = j.value("name", std::string("experiment"));
  cfg.kind = experiment_kind_from_string(
      j.contains("kind") ? j["kind"].get<std::string>() : "hit_probs");
  const int ne = num_edges(cfg.graph);
  if (j.contains("shapes"))
    cfg.shapes = parse_shapes(j["shapes"].dump(), ne);
  else
    cfg.shapes = parse_shapes("{\"kind\":\"power_ratio\",\"alpha\":2.0}", ne);
  if (j.contains("coefficients")) cfg.coeffs = parse_coeffs(j["coefficients"].dump());
  if (j.contains("eps")) cfg.eps = number_or_list(j["eps"], "eps");
  if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
  if (j.contains("dt_per_eps_sq")) cfg.dt_per_eps_sq = j["dt_per_eps_sq"].get<double>();
  if (j.contains("T")) cfg.T = j["T"].get<double>();
  if (j.contains("delta_prime"))
    cfg.delta_prime = number_or_list(j["delta_prime"], "delta_prime");
  if (j.contains("n_paths")) cfg.n_paths = j["n_paths"].get<long>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("start")) cfg.start = parse_start(j["start"]);
  cfg.out_dir = j.value("out", std::string());
  cfg.canonical = j.dump();
  cfg.validate();
  return cfg;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (size_t i = 0; i < kKindNames.size(); ++i)
    if (s == kKindNames[i]) return static_cast<ExperimentKind>(i);
  throw ValidationError("unknown experiment kind \"" + s + "\"");
}

void ExperimentConfig::validate() const {
  if (n_paths < 100)
    throw ValidationError("n_paths must be at least 100 (Monte Carlo floor), got " +
                          std::to_string(n_paths));
  if (eps.empty()) throw ValidationError("eps list must not be empty");
  for (double e : eps)
    if (!(e > 0.0)) throw ValidationError("eps values must be positive");
  for (size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1]))
      throw ValidationError("eps sweep must be strictly decreasing");
  const double eps_min = eps.back();
  if (dt > 0.0) {
    if (dt > eps_min * eps_min + 1e-15)
      throw ValidationError("dt must satisfy dt <= min(eps)^2; got dt = " +
                            std::to_string(dt) + " with min(eps) = " +
                            std::to_string(eps_min));
  } else {
    if (!(dt_per_eps_sq > 0.0) || dt_per_eps_sq > 1.0 + 1e-15)
      throw ValidationError("dt_per_eps_sq must lie in (0, 1] so that dt <= eps^2");
  }
  if (!(T > 0.0)) throw ValidationError("T must be positive");
  const int ne = num_edges(graph);
  if (static_cast<int>(shapes.size()) != ne)
    throw ValidationError("need one shape per edge: " + std::to_string(shapes.size()) +
                          " shapes for " + std::to_string(ne) + " edges");
  for (double d : delta_prime)
    if (!(d > 0.0)) throw ValidationError("delta_prime levels must be positive");

  const int dim = ambient_dim(graph);
  if (start.kind == "point" && start.point.size() != dim)
    throw ValidationError("start point dimension disagrees with the graph");
  if (start.kind == "two_points" &&
      (start.point_a.size() != dim || start.point_b.size() != dim))
    throw ValidationError("start point dimensions disagree with the graph");
  if (start.kind == "edge_point" && (start.edge < 0 || start.edge >= ne))
    throw ValidationError("start edge index out of range");

  // Weight-sensitive experiments assume the diffusion matrix is the
  // identity at every junction; only the single-curve limit is exempt.
  if (kind != ExperimentKind::CurveLimit) {
    const SdeCoefficients c = build_coefficients(coeffs, graph, dim);
    auto check = [&](const Vec& where, const std::string& label) {
      if (!c.sigma_identity_at(where, 1e-12))
        throw ValidationError(
            to_string(kind) +
            " requires sigma(x) = identity at every vertex of degree >= 2; "
            "violated at " +
            label);
    };
    if (const auto* sp = std::get_if<SpiderGraph>(&graph)) {
      check(Vec::Zero(sp->ambient_dim()), "the spider vertex");
    } else {
      const auto& mg = std::get<MetricGraph>(graph);
      for (int v = 0; v < mg.num_vertices(); ++v)
        if (mg.degree(v) >= 2) check(mg.vertex(v), "vertex " + std::to_string(v));
    }
  }
}

ExperimentConfig parse_experiment(const std::string& text) {
  try {
    return parse_experiment_json(json::parse(text));
  } catch (const json::parse_error& e) {
    rethrow_parse(text, e);
  }
}

std::vector<ExperimentConfig> parse_suite(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    rethrow_parse(text, e);
  }
  std::vector<ExperimentConfig> out;
  if (j.is_object() && j.contains("experiments")) {
    for (const auto& item : j["experiments"]) out.push_back(parse_experiment_json(item));
    if (out.empty()) throw ValidationError("\"experiments\" list must not be empty");
  } else {
    out.push_back(parse_experiment_json(j));
  }
  return out;
}

std::vector<ExperimentConfig> load_suite(const std::string& path) {
  return parse_suite(read_file(path));
}

}  // namespace graphtube
