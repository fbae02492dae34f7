#include "graphtube/tube_sim.hpp"

#include <cmath>

namespace graphtube {

void TubeSimConfig::validate() const {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (dt > eps * eps + 1e-15)
    throw ValidationError("dt must not exceed eps^2 (transverse relaxation scale)");
  if (!(T >= dt)) throw ValidationError("horizon shorter than one step");
  if (n_paths < 0) throw ValidationError("n_paths must be >= 0");
  if (max_substep_halvings < 1 || max_substep_halvings > 48)
    throw ValidationError("max_substep_halvings out of range");
  if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
}

long TubeSimConfig::n_steps() const {
  const long k = std::llround(T / dt);
  return k >= 1 ? k : 1;
}

TubeStepper::TubeStepper(const ConfinementField& field, const SdeCoefficients& coeffs,
                         double eps, int max_substep_halvings)
    : field_(&field),
      coeffs_(&coeffs),
      eps_(eps),
      max_halvings_(max_substep_halvings) {
  const int n = ambient_dim(field.graph());
  sigma_identity_ = coeffs.sigma_is_constant() && coeffs.sigma_identity_at(Vec::Zero(n));
  sigma_scratch_.resize(n, n);
  b_scratch_.resize(n);
  grad_scratch_.resize(n);
  cand_scratch_.resize(n);
}

void TubeStepper::start_path() {
  has_hint_ = false;
  has_cache_ = false;
}

void TubeStepper::drift_parts(const Vec& x, double dt, const Vec& dW, Vec& cand) {
  if (sigma_identity_) {
    cand = x + dW;
  } else {
    coeffs_->sigma(x, sigma_scratch_);
    cand.noalias() = sigma_scratch_ * dW;
    cand += x;
  }
  coeffs_->b(x, b_scratch_);
  cand += dt * b_scratch_;
}

Vec TubeStepper::confined_recurse(const Vec& x, double dt, const Vec& dW, PathRng& rng,
                                  PathDiagnostics* diag, int depth) {
  double margin;
  if (has_cache_ && cache_x_.size() == x.size() && (cache_x_.array() == x.array()).all()) {
    grad_scratch_ = cache_grad_;
    margin = cache_margin_;
  } else {
    const Projection* hint = has_hint_ ? &hint_ : nullptr;
    const double u = field_->value_and_gradient(eps_, x, grad_scratch_, hint);
    if (u == std::numeric_limits<double>::infinity())
      throw OutOfTubeError("confined step started outside the open tube");
    const Clearance cl = tube_clearance(field_->graph(), eps_, x, hint);
    hint_ = cl.proj;
    has_hint_ = true;
    margin = cl.margin;
    cache_x_ = x;
    cache_grad_ = grad_scratch_;
    cache_margin_ = margin;
    has_cache_ = true;
  }
  const double impulse = grad_scratch_.norm() * dt;

  bool accepted = false;
  if (impulse <= 0.5 * margin) {
    drift_parts(x, dt, dW, cand_scratch_);
    cand_scratch_ -= dt * grad_scratch_;
    const Clearance cand_cl = tube_clearance(field_->graph(), eps_, cand_scratch_, &hint_);
    if (cand_cl.margin > 0.0) {
      // Entry guard: the candidate must itself be steppable at the deepest
      // allowed substep, or the next step could never leave the boundary
      // layer within the halving budget.
      const double cu =
          field_->value_and_gradient(eps_, cand_scratch_, cand_grad_, &cand_cl.proj);
      if (cu != std::numeric_limits<double>::infinity() &&
          cand_grad_.norm() * dt_floor_ <= 0.5 * cand_cl.margin) {
        hint_ = cand_cl.proj;
        cache_x_ = cand_scratch_;
        cache_grad_ = cand_grad_;
        cache_margin_ = cand_cl.margin;
        has_cache_ = true;
        accepted = true;
      }
    }
  }
  if (accepted) return cand_scratch_;

  if (depth >= max_halvings_)
    throw SubstepExhaustionError("confined step exhausted its halving budget (dt too coarse)");
  if (diag) {
    ++diag->halving_events;
    diag->max_halving_depth = std::max(diag->max_halving_depth, depth + 1);
  }
  // Retry as two independent half steps with fresh increments; the rejected
  // increment is discarded entirely, preserving the Markov property of the
  // discrete chain.
  const double h = 0.5 * dt;
  const double sq = std::sqrt(h);
  const int n = static_cast<int>(x.size());
  Vec half(n);
  for (int i = 0; i < n; ++i) half[i] = sq * rng.gauss();
  Vec mid = confined_recurse(x, h, half, rng, diag, depth + 1);
  for (int i = 0; i < n; ++i) half[i] = sq * rng.gauss();
  return confined_recurse(mid, h, half, rng, diag, depth + 1);
}

Vec TubeStepper::step_confined(const Vec& x, double dt, const Vec& dW, PathRng& rng,
                               PathDiagnostics* diag) {
  dt_floor_ = std::ldexp(dt, -max_halvings_);
  return confined_recurse(x, dt, dW, rng, diag, 0);
}

Vec TubeStepper::step_reflected(const Vec& x, double dt, const Vec& dW,
                                PathDiagnostics* diag) {
  drift_parts(x, dt, dW, cand_scratch_);
  const Projection* hint = has_hint_ ? &hint_ : nullptr;
  const Clearance cl = tube_clearance(field_->graph(), eps_, cand_scratch_, hint);
  if (cl.margin < 0.0) {
    // Transverse radial clamp: move the candidate back along (x' - foot) to
    // the tube surface of the least-violated edge.
    const double c = edge_width(field_->graph(), cl.proj.edge) * eps_;
    if (cl.proj.dist <= 0.0)
      throw ProjectionError("reflected step: degenerate clamp direction");
    cand_scratch_ = cl.proj.foot + (c / cl.proj.dist) * (cand_scratch_ - cl.proj.foot);
    if (diag) ++diag->reflections;
    hint_ = cl.proj;
    has_hint_ = true;
    return cand_scratch_;
  }
  hint_ = cl.proj;
  has_hint_ = true;
  return cand_scratch_;
}

Vec step_confined(const SdeCoefficients& coeffs, const ConfinementField& field, double eps,
                  const Vec& x, double dt, const Vec& dW, PathRng& rng,
                  int max_substep_halvings, PathDiagnostics* diag) {
  TubeStepper st(field, coeffs, eps, max_substep_halvings);
  return st.step_confined(x, dt, dW, rng, diag);
}

Vec step_reflected(const SdeCoefficients& coeffs, const ConfinementField& field, double eps,
                   const Vec& x, double dt, const Vec& dW, PathDiagnostics* diag) {
  TubeStepper st(field, coeffs, eps, 1);
  return st.step_reflected(x, dt, dW, diag);
}

namespace {

struct RecordingObserver {
  std::vector<Path>* out;
  long stride;
  long n_steps;
  int dim;

  bool on_sample(long p, long k, double t, const Vec& x) {
    Path& path = (*out)[static_cast<size_t>(p)];
    if (k == 0) {
      path.dim = dim;
      const long reserve = n_steps / stride + 2;
      path.times.reserve(reserve);
      path.xs.reserve(reserve * dim);
    }
    if (k % stride == 0 || k == n_steps) {
      path.times.push_back(t);
      path.xs.insert(path.xs.end(), x.data(), x.data() + dim);
    }
    return true;
  }
  void on_path_done(long p, const PathDiagnostics& d) {
    (*out)[static_cast<size_t>(p)].diag = d;
  }
};

std::vector<Path> run_recorded(const ConfinementField& field, const SdeCoefficients& coeffs,
                               const TubeSimConfig& cfg, TubeMode mode,
                               const StartSampler& start) {
  std::vector<Path> out(static_cast<size_t>(cfg.n_paths));
  RecordingObserver obs{&out, cfg.record_stride, cfg.n_steps(), ambient_dim(field.graph())};
  run_tube_batch(field, coeffs, cfg, mode, start, obs);
  return out;
}

}  // namespace

std::vector<Path> simulate_confined(const ConfinementField& field, const SdeCoefficients& coeffs,
                                    const TubeSimConfig& cfg, const StartSampler& start) {
  return run_recorded(field, coeffs, cfg, TubeMode::Confined, start);
}

std::vector<Path> simulate_reflected(const ConfinementField& field, const SdeCoefficients& coeffs,
                                     const TubeSimConfig& cfg, const StartSampler& start) {
  return run_recorded(field, coeffs, cfg, TubeMode::Reflected, start);
}

std::vector<Path> simulate_driftless_reference(const ConfinementField& field,
                                               const TubeSimConfig& cfg,
                                               const StartSampler& start) {
  const SdeCoefficients id = SdeCoefficients::identity(ambient_dim(field.graph()));
  return run_recorded(field, id, cfg, TubeMode::Confined, start);
}

}  // namespace graphtube
