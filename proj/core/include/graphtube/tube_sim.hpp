#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "graphtube/coefficients.hpp"
#include "graphtube/errors.hpp"
#include "graphtube/geometry.hpp"
#include "graphtube/parallel.hpp"
#include "graphtube/potential.hpp"
#include "graphtube/rng.hpp"

namespace graphtube {

struct TubeSimConfig {
  double eps = 0.1;
  double dt = 1e-4;
  double T = 1.0;
  long n_paths = 1;
  uint64_t seed = 1;
  int max_substep_halvings = 24;
  long record_stride = 1;
  int workers = 1;

  /// Throws ValidationError on inconsistent parameters (needs dt <= eps^2).
  void validate() const;
  long n_steps() const;
};

struct PathDiagnostics {
  long halving_events = 0;  ///< number of step splits
  int max_halving_depth = 0;
  long reflections = 0;     ///< reflected mode: boundary projections applied
};

/// Recorded trajectory: positions are row-major (sample, coordinate).
struct Path {
  int dim = 0;
  std::vector<double> times;
  std::vector<double> xs;
  PathDiagnostics diag;

  long samples() const { return static_cast<long>(times.size()); }
  Eigen::Map<const Vec> at(long k) const {
    return Eigen::Map<const Vec>(xs.data() + k * dim, dim);
  }
};

/// Draws x0 for a path from its own stream; must yield in-tube points.
using StartSampler = std::function<Vec(long path_index, PathRng& rng)>;

/// Euler-Maruyama stepping confined to the tube.  A confined step proposes
/// x' = x + sigma(x) dW + (b(x) - grad U^eps(x)) dt and retries with dt/2
/// (two independent half-increments, recursively, bounded depth) whenever x'
/// leaves the open tube or the drift impulse |grad U| dt exceeds half the
/// local margin.  Candidates must additionally satisfy the impulse bound at
/// the deepest allowed substep size, |grad U(x')| dt/2^budget <= margin(x')/2;
/// otherwise a single coarse jump could land in a boundary layer that no
/// bounded halving budget can resolve (|grad U| grows like margin^-2 there).
/// The excluded layer has width O(dt^(1/3)) in margin and its stationary mass
/// vanishes faster than any power of dt.  A reflected step drops the potential
/// and instead projects an exiting candidate radially back onto the tube
/// boundary.
class TubeStepper {
 public:
  TubeStepper(const ConfinementField& field, const SdeCoefficients& coeffs,
              double eps, int max_substep_halvings = 24);

  /// Reset per-path state (projection hint and cached field evaluation).
  void start_path();

  Vec step_confined(const Vec& x, double dt, const Vec& dW, PathRng& rng,
                    PathDiagnostics* diag = nullptr);
  Vec step_reflected(const Vec& x, double dt, const Vec& dW,
                     PathDiagnostics* diag = nullptr);

  const Graph& graph() const { return field_->graph(); }
  double eps() const { return eps_; }

 private:
  Vec confined_recurse(const Vec& x, double dt, const Vec& dW, PathRng& rng,
                       PathDiagnostics* diag, int depth);
  void drift_parts(const Vec& x, double dt, const Vec& dW, Vec& cand);

  const ConfinementField* field_;
  const SdeCoefficients* coeffs_;
  double eps_;
  int max_halvings_;
  bool sigma_identity_;
  Mat sigma_scratch_;
  Vec b_scratch_, grad_scratch_, cand_scratch_, cand_grad_;
  Projection hint_;
  bool has_hint_ = false;
  // Accepted candidates already paid for a field evaluation; reuse it when the
  // next step starts from the same point (bitwise match required).
  bool has_cache_ = false;
  Vec cache_x_, cache_grad_;
  double cache_margin_ = 0.0;
  double dt_floor_ = 0.0;
};

/// Convenience single-step entry points mirroring the stepper methods.
Vec step_confined(const SdeCoefficients& coeffs, const ConfinementField& field,
                  double eps, const Vec& x, double dt, const Vec& dW, PathRng& rng,
                  int max_substep_halvings = 24, PathDiagnostics* diag = nullptr);
Vec step_reflected(const SdeCoefficients& coeffs, const ConfinementField& field,
                   double eps, const Vec& x, double dt, const Vec& dW,
                   PathDiagnostics* diag = nullptr);

enum class TubeMode { Confined, Reflected };

/// Streaming batch runner.  For each path p in [0, n_paths): a fresh
/// PathRng(seed, p), x0 = start(p, rng), then n_steps steps of the selected
/// mode.  The observer sees every sample at full resolution:
///   bool on_sample(long path, long step, double t, const Vec& x)
///     -- return false to stop the path early;
///   void on_path_done(long path, const PathDiagnostics& diag)
/// Observers are invoked from worker threads but only for their own paths.
/// Results are bitwise independent of the worker count.
template <class Observer>
void run_tube_batch(const ConfinementField& field, const SdeCoefficients& coeffs,
                    const TubeSimConfig& cfg, TubeMode mode, const StartSampler& start,
                    Observer&& obs) {
  cfg.validate();
  const Graph& g = field.graph();
  if (const auto* mg = std::get_if<MetricGraph>(&g)) {
    for (int e = 0; e < mg->num_edges(); ++e) {
      const double reach = mg->width(e) * cfg.eps * mg->edge(e).curve.max_curvature();
      if (reach > 0.5)
        throw ValidationError("tube width exceeds half the curvature radius of an edge");
    }
  }
  const int n = ambient_dim(g);
  const long n_steps = cfg.n_steps();
  parallel_for_ranges(cfg.n_paths, cfg.workers, [&](long begin, long end, int) {
    TubeStepper stepper(field, coeffs, cfg.eps, cfg.max_substep_halvings);
    Vec x(n), dw(n);
    const double sq = std::sqrt(cfg.dt);
    for (long p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, static_cast<uint64_t>(p));
      stepper.start_path();
      x = start(p, rng);
      if (!(tube_margin(g, cfg.eps, x) > 0.0))
        throw ValidationError("start sampler produced a point outside the open tube");
      PathDiagnostics diag;
      bool alive = obs.on_sample(p, 0, 0.0, x);
      try {
        for (long k = 1; alive && k <= n_steps; ++k) {
          for (int i = 0; i < n; ++i) dw[i] = sq * rng.gauss();
          x = (mode == TubeMode::Confined) ? stepper.step_confined(x, cfg.dt, dw, rng, &diag)
                                           : stepper.step_reflected(x, cfg.dt, dw, &diag);
          alive = obs.on_sample(p, k, static_cast<double>(k) * cfg.dt, x);
        }
      } catch (const SubstepExhaustionError& e) {
        throw SubstepExhaustionError(e.what(), p);
      }
      obs.on_path_done(p, diag);
    }
  });
}

/// Full-resolution recording runs (subject to cfg.record_stride).
std::vector<Path> simulate_confined(const ConfinementField& field,
                                    const SdeCoefficients& coeffs,
                                    const TubeSimConfig& cfg, const StartSampler& start);
std::vector<Path> simulate_reflected(const ConfinementField& field,
                                     const SdeCoefficients& coeffs,
                                     const TubeSimConfig& cfg, const StartSampler& start);

/// Reference process: b = 0, sigma = I inside the same confining field.
std::vector<Path> simulate_driftless_reference(const ConfinementField& field,
                                               const TubeSimConfig& cfg,
                                               const StartSampler& start);

}  // namespace graphtube
