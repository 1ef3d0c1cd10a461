#include "dszog/baselines.hpp"

#include "dszog/random.hpp"
#include "dszog/simplex.hpp"
#include "dszog/zo_grad.hpp"

namespace dszog {

SolveOutcome full_batch_gda_solve(const BlackBoxProblem& problem, const DszogConfig& cfg,
                                  const Vector& w0, const SolveHooks& hooks) {
  validate_config(cfg);
  DszogConfig plain = cfg;
  plain.a = 1.0;
  plain.b = 1.0;
  return detail::penalty_gda_loop(problem, plain, w0, hooks,
                                  {.full_batch = true, .interpolate_p = false, .momentum = false});
}

// ---------------------------------------------------------------------------

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw ConfigError("feasible_set", "box bounds differ in size");
  if (!lo.allFinite() || !hi.allFinite()) throw ConfigError("feasible_set", "box bounds must be finite");
  if ((lo.array() > hi.array()).any()) throw ConfigError("feasible_set", "box has lo > hi");
  return FeasibleSet{Kind::Box, std::move(lo), std::move(hi)};
}

FeasibleSet FeasibleSet::box(Index d, double lo, double hi) {
  return box(Vector::Constant(d, lo), Vector::Constant(d, hi));
}

FeasibleSet FeasibleSet::simplex() { return FeasibleSet{Kind::Simplex, {}, {}}; }

FeasibleSet FeasibleSet::parse(const std::string& name, Index d, double lo, double hi) {
  if (name == "box") return box(d, lo, hi);
  if (name == "simplex") return simplex();
  throw ConfigError("feasible_set", "unsupported set shape '" + name + "' (box or simplex)");
}

Vector FeasibleSet::project(const Vector& w) const {
  if (kind == Kind::Simplex) return project_to_simplex(w);
  if (w.size() != lo.size()) throw ContractError("FeasibleSet::project: dimension mismatch");
  return w.cwiseMax(lo).cwiseMin(hi);
}

bool FeasibleSet::contains(const Vector& w, double tol) const {
  if (kind == Kind::Simplex)
    return w.minCoeff() >= -tol && std::abs(w.sum() - 1.0) <= std::max(tol, 1e-12);
  return ((w - lo).array() >= -tol).all() && ((hi - w).array() >= -tol).all();
}

// ---------------------------------------------------------------------------

SolveOutcome zopsgd_solve(const BlackBoxProblem& problem, const FeasibleSet& set,
                          const DszogConfig& cfg, const Vector& w0, const SolveHooks& hooks) {
  validate_config(cfg);
  if (w0.size() != problem.dim()) throw ConfigError("w0", "dimension mismatch");
  if (!w0.allFinite()) throw ConfigError("w0", "must be finite");
  if (set.kind == FeasibleSet::Kind::Box && set.lo.size() != problem.dim())
    throw ConfigError("feasible_set", "box dimension does not match the problem");

  const double mu = effective_mu(cfg, w0);
  Rng dir_rng = make_stream(cfg.seed, 1);
  Rng data_rng = make_stream(cfg.seed, 2);
  const Index batch = std::min<Index>(cfg.batch_data, problem.n_components());
  // Diagnostics report the penalty against a uniform weighting; the method
  // itself has no constraint distribution.
  const SimplexPoint uniform = SimplexPoint::uniform(problem.n_constraints());

  OracleCalls calls, diag;
  detail::TrainingClock clock;
  RunRecord record(hooks.extra_metrics ? hooks.extra_names : std::vector<std::string>{});
  auto emit = [&](RunRow row) {
    if (hooks.on_row) hooks.on_row(row);
    record.append(std::move(row));
  };

  Vector w = set.project(w0);
  Vector last_grad = Vector::Zero(w.size());
  emit(detail::diagnostics_row(problem, hooks, 0, 0.0, w, uniform, 0.0, 0.0, 0.0, diag));

  Termination termination = Termination::MaxIters;
  std::string abort_reason;
  std::int64_t iter = 0;
  double last_step = 0.0;
  for (std::int64_t t = 1; t <= cfg.max_iters; ++t) {
    if (cfg.time_budget_s && clock.seconds() >= *cfg.time_budget_s) {
      termination = Termination::TimeBudget;
      break;
    }
    clock.start();
    const GaussianDirections dirs = GaussianDirections::draw(problem.dim(), cfg.q, dir_rng);
    const std::vector<Index> m1 = sample_without_replacement(problem.n_components(), batch, data_rng);
    WGradEstimate g = zo_objective_grad(problem, w, m1, dirs, mu);
    calls += g.oracle_calls_used;
    Vector w_next = set.project(w - cfg.eta_w * g.g);
    clock.stop();
    if (!w_next.allFinite()) {
      termination = Termination::NumericalAbort;
      abort_reason = "nonfinite iterate at iteration " + std::to_string(t);
      break;
    }
    last_step = (w_next - w).norm();
    w = std::move(w_next);
    last_grad = std::move(g.g);
    iter = t;
    if (t % cfg.metric_every == 0)
      emit(detail::diagnostics_row(problem, hooks, t, clock.seconds(), w, uniform, last_step,
                                   last_grad.norm(), 0.0, diag));
  }
  if (record.rows().back().iter != iter)
    emit(detail::diagnostics_row(problem, hooks, iter, clock.seconds(), w, uniform, last_step,
                                 last_grad.norm(), 0.0, diag));

  // Report stationarity against the exact inner maximizer at the final point.
  Vector phi = constraint_values(problem, w).cwiseMax(0.0).cwiseAbs2();
  diag.constraint += static_cast<std::uint64_t>(problem.n_constraints());
  SimplexPoint p_star = argmax_concave_p(phi, cfg.beta, cfg.lambda);

  SolveOutcome out{w, p_star, std::move(record), {}, termination, abort_reason, iter, calls, diag};
  out.stationarity = stationarity_report(problem, w, out.final_p, cfg, hooks.stationarity);
  out.diagnostic_calls += out.stationarity.oracle_calls;
  return out;
}

}  // namespace dszog
