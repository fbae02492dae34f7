#include "graphtube/graph_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphtube {

void GraphSimConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(T >= 0.0)) throw ValidationError("horizon must be nonnegative");
  if (n_paths < 0) throw ValidationError("n_paths must be >= 0");
  if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
}

long GraphSimConfig::n_steps() const { return std::llround(T / dt); }

GraphProcess::GraphProcess(const Graph& g, std::vector<EdgeSde> sdes,
                           std::vector<KirchhoffWeights> vertex_weights)
    : graph_(&g), sdes_(std::move(sdes)), vertex_weights_(std::move(vertex_weights)) {
  const int ne = graphtube::num_edges(*graph_);
  if (static_cast<int>(sdes_.size()) != ne)
    throw Error("graph process needs one EdgeSde per edge");
  length_.resize(ne);
  near_vertex_.resize(ne);
  far_vertex_.resize(ne);
  int nv = 0;
  if (std::holds_alternative<SpiderGraph>(*graph_)) {
    nv = 1;
    for (int e = 0; e < ne; ++e) {
      length_[e] = std::numeric_limits<double>::infinity();
      near_vertex_[e] = 0;
      far_vertex_[e] = -1;
    }
  } else {
    const auto& mg = std::get<MetricGraph>(*graph_);
    nv = mg.num_vertices();
    for (int e = 0; e < ne; ++e) {
      length_[e] = mg.edge(e).curve.length();
      near_vertex_[e] = mg.edge(e).from;
      far_vertex_[e] = mg.edge(e).to;
    }
  }
  if (static_cast<int>(vertex_weights_.size()) != nv)
    throw Error("graph process needs weights for every vertex");
  for (int v = 0; v < nv; ++v) {
    const KirchhoffWeights& w = vertex_weights_[v];
    if (w.vertex != v) throw Error("vertex weights out of order");
    for (size_t k = 0; k < w.incident.size(); ++k) {
      const Incidence& inc = w.incident[k];
      const int expect = inc.at_start ? near_vertex_[inc.edge] : far_vertex_[inc.edge];
      if (expect != v) throw Error("vertex weights incidence mismatch");
    }
  }
}

GraphState GraphProcess::enter_vertex(int vertex, double overshoot, double unif) const {
  const KirchhoffWeights& w = vertex_weights_[vertex];
  int k = 0;
  double cum = 0.0;
  const int m = static_cast<int>(w.incident.size());
  for (; k < m - 1; ++k) {
    cum += w.p[k];
    if (unif < cum) break;
  }
  const Incidence& inc = w.incident[k];
  const double len = length_[inc.edge];
  const double m_in = std::min(overshoot, len);
  return {inc.edge, inc.at_start ? m_in : len - m_in};
}

GraphState GraphProcess::step(const GraphState& st, double dt, double gauss,
                              double unif) const {
  const EdgeSde& sde = sdes_[st.edge];
  const double len = length_[st.edge];
  double ds = sde.drift(st.s) * dt + std::sqrt(sde.diffusion_sq(st.s) * dt) * gauss;
  if (std::isfinite(len)) ds = std::clamp(ds, -len, len);
  const double s2 = st.s + ds;
  if (s2 < 0.0) return enter_vertex(near_vertex_[st.edge], -s2, unif);
  if (s2 > len) return enter_vertex(far_vertex_[st.edge], s2 - len, unif);
  return {st.edge, s2};
}

namespace {

struct GraphRecorder {
  std::vector<GraphPath>* out;
  long stride;
  long n_steps;

  bool on_sample(long p, long k, double t, const GraphState& st) {
    if (k % stride == 0 || k == n_steps) {
      GraphPath& path = (*out)[static_cast<size_t>(p)];
      path.times.push_back(t);
      path.edges.push_back(st.edge);
      path.ss.push_back(st.s);
    }
    return true;
  }
  void on_path_done(long) {}
};

}  // namespace

std::vector<GraphPath> simulate_graph(const GraphProcess& proc, const GraphSimConfig& cfg,
                                      const GraphStartSampler& start) {
  std::vector<GraphPath> out(static_cast<size_t>(cfg.n_paths));
  GraphRecorder rec{&out, cfg.record_stride, cfg.n_steps()};
  run_graph_batch(proc, cfg, start, rec);
  return out;
}

}  // namespace graphtube
