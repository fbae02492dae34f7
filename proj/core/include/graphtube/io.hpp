#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "graphtube/coefficients.hpp"
#include "graphtube/geometry.hpp"
#include "graphtube/graph_sim.hpp"
#include "graphtube/potential.hpp"
#include "graphtube/tube_sim.hpp"

namespace graphtube {

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Graph description:
///   {"n": 2, "spider": {"directions": [[1,0], ...], "widths": [1, ...]}}
/// or
///   {"metric_graph": {"vertices": [[x,y], ...],
///                     "edges": [{"from": 0, "to": 1, "width": 1,
///                                "curve_samples": [[s,[pt],[tan],[curv]], ...]}]}}
/// Malformed JSON throws ParseError with line/column; structurally invalid
/// input throws ValidationError naming the offending field.
Graph parse_graph(const std::string& text);
Graph load_graph(const std::string& path);

/// Shape spec {"kind":"power_ratio","alpha":2.0} or
/// {"kind":"tabulated","r":[...],"u":[...],"du":[...]}.  parse_shapes also
/// accepts an array of such objects; a single object is replicated across
/// all n_edges edges.
PotentialShape parse_shape(const std::string& text);
std::vector<PotentialShape> parse_shapes(const std::string& text, int n_edges);
std::vector<PotentialShape> load_shapes(const std::string& path, int n_edges);

/// Coefficient preset held in parsed form so SdeCoefficients can later be
/// bound to whichever Graph instance the caller owns (tangential pull keeps
/// a pointer to the graph).
struct CoeffSpec {
  std::string sigma_kind = "identity";  ///< identity | constant | radial_scalar
  Mat sigma_matrix;                     ///< constant case
  double g0 = 1.0, g1 = 1.0, scale = 1.0;  ///< radial_scalar params
  std::string b_kind = "zero";          ///< zero | constant | tangential_pull
  Vec b_vector;                         ///< constant case
  double pull_strength = 0.0;           ///< tangential_pull case
};

/// Parses {"sigma":{"kind":...,...}, "b":{"kind":...,...}}; both keys
/// optional (defaults: identity sigma, zero drift).
CoeffSpec parse_coeffs(const std::string& text);

/// Instantiates the preset in ambient dimension `dim`, binding tangential
/// pull to `graph`.
SdeCoefficients build_coefficients(const CoeffSpec& spec, const Graph& graph, int dim);

/// CSV exports.  Trajectories are one row per sample: t,x_1,...,x_n.
/// Graph paths are t,edge_index,s.  Histograms are
/// r_lo,r_hi,empirical_density,model_density.
void write_trajectory_csv(std::ostream& os, const Path& path);
void write_graph_path_csv(std::ostream& os, const GraphPath& path);
void write_histogram_csv(std::ostream& os, const std::vector<double>& edges,
                         const std::vector<double>& empirical,
                         const std::vector<double>& model);

}  // namespace graphtube
