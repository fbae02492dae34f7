#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "graphtube/edge_sde.hpp"
#include "graphtube/errors.hpp"
#include "graphtube/geometry.hpp"
#include "graphtube/parallel.hpp"
#include "graphtube/rng.hpp"
#include "graphtube/weights.hpp"

namespace graphtube {

/// Position on the graph in edge coordinates: arc length s from the edge's
/// own s = 0 end.  Vertices are the states with s = 0 or s = edge length.
struct GraphState {
  int edge = 0;
  double s = 0.0;
};

struct GraphSimConfig {
  double dt = 1e-4;
  double T = 1.0;     ///< T = 0 returns the initial states
  long n_paths = 1;
  uint64_t seed = 1;
  long record_stride = 1;
  int workers = 1;

  void validate() const;
  long n_steps() const;
};

/// Recorded trajectory in (edge, s) coordinates, stored column-wise.
struct GraphPath {
  std::vector<double> times;
  std::vector<int> edges;
  std::vector<double> ss;

  long samples() const { return static_cast<long>(times.size()); }
  GraphState at(long k) const { return {edges[k], ss[k]}; }
};

/// The limit diffusion: 1D Euler steps along edges plus the Walsh-style
/// vertex rule.  A step whose endpoint would cross a vertex relocates the
/// overshoot magnitude onto an incident edge drawn with that vertex's
/// Kirchhoff weights (a single incident edge therefore reflects).  Raw
/// increments are clamped to the current edge's length; spider rays are
/// unbounded outward and never terminate.
class GraphProcess {
 public:
  /// `vertex_weights[v]` must describe vertex v with incident edges listed
  /// in the graph's own incidence order (as produced by kirchhoff_weights).
  GraphProcess(const Graph& g, std::vector<EdgeSde> sdes,
               std::vector<KirchhoffWeights> vertex_weights);

  int num_edges() const { return static_cast<int>(sdes_.size()); }
  const EdgeSde& sde(int e) const { return sdes_[e]; }
  const KirchhoffWeights& weights(int v) const { return vertex_weights_[v]; }
  const Graph& graph() const { return *graph_; }

  /// Edge length; +infinity for spider rays.
  double edge_length(int e) const { return length_[e]; }

  /// One Euler/Walsh step.  Consumes exactly the two supplied draws; `unif`
  /// is used only when a vertex is crossed but must always be provided, so
  /// a path's draw count is schedule-independent.
  GraphState step(const GraphState& st, double dt, double gauss, double unif) const;

 private:
  GraphState enter_vertex(int vertex, double overshoot, double unif) const;

  const Graph* graph_;
  std::vector<EdgeSde> sdes_;
  std::vector<KirchhoffWeights> vertex_weights_;
  std::vector<double> length_;
  std::vector<int> near_vertex_, far_vertex_;  ///< far = -1 on unbounded rays
};

using GraphStartSampler = std::function<GraphState(long path_index, PathRng& rng)>;

/// Streaming batch runner with the same observer contract and determinism
/// guarantees as run_tube_batch: per-path PathRng(seed, p), one gaussian and
/// one uniform draw per step in that order.
template <class Observer>
void run_graph_batch(const GraphProcess& proc, const GraphSimConfig& cfg,
                     const GraphStartSampler& start, Observer&& obs) {
  cfg.validate();
  const long n_steps = cfg.n_steps();
  parallel_for_ranges(cfg.n_paths, cfg.workers, [&](long begin, long end, int) {
    for (long p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, static_cast<uint64_t>(p));
      GraphState st = start(p, rng);
      if (st.edge < 0 || st.edge >= proc.num_edges() || st.s < 0.0 ||
          st.s > proc.edge_length(st.edge))
        throw ValidationError("start sampler produced a state outside the graph");
      bool alive = obs.on_sample(p, 0, 0.0, st);
      for (long k = 1; alive && k <= n_steps; ++k) {
        const double g = rng.gauss();
        const double u = rng.uniform01();
        st = proc.step(st, cfg.dt, g, u);
        alive = obs.on_sample(p, k, static_cast<double>(k) * cfg.dt, st);
      }
      obs.on_path_done(p);
    }
  });
}

std::vector<GraphPath> simulate_graph(const GraphProcess& proc, const GraphSimConfig& cfg,
                                      const GraphStartSampler& start);

}  // namespace graphtube
