#include "dszog/solver.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "dszog/random.hpp"
#include "dszog/simplex.hpp"
#include "dszog/zo_grad.hpp"

namespace dszog {

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::MaxIters: return "MaxIters";
    case Termination::TimeBudget: return "TimeBudget";
    case Termination::NumericalAbort: return "NumericalAbort";
  }
  return "unknown";
}

namespace {

// Stream ids for the per-purpose generators of one run.
constexpr std::uint64_t kDirectionStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kConstraintStream = 3;

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  return all;
}

struct Estimates {
  Vector g;
  PGradEstimate h;
};

class LoopRunner {
 public:
  LoopRunner(const BlackBoxProblem& problem, const DszogConfig& cfg, const SolveHooks& hooks,
             detail::LoopVariant variant, double mu)
      : problem_(problem),
        cfg_(cfg),
        hooks_(hooks),
        variant_(variant),
        mu_(mu),
        dir_rng_(make_stream(cfg.seed, kDirectionStream)),
        data_rng_(make_stream(cfg.seed, kDataStream)),
        cons_rng_(make_stream(cfg.seed, kConstraintStream)),
        all_data_(iota_indices(problem.n_components())),
        all_cons_(iota_indices(problem.n_constraints())) {
    batch_data_ = std::min<Index>(cfg.batch_data, problem.n_components());
    batch_cons_p_ = std::min<Index>(cfg.batch_cons_p, problem.n_constraints());
  }

  // Fresh randomness, then both estimators at (w, p).
  Estimates estimate(const Vector& w, const SimplexPoint& p) {
    const GaussianDirections dirs = GaussianDirections::draw(problem_.dim(), cfg_.q, dir_rng_);
    if (variant_.full_batch) {
      WGradEstimate g = zo_objective_grad(problem_, w, all_data_, dirs, mu_);
      WGradEstimate pen = zo_weighted_penalty_grad(problem_, w, p, dirs, mu_);
      g.g.noalias() += cfg_.beta * pen.g;
      PGradEstimate h = stoch_grad_p(problem_, w, p, all_cons_, cfg_.beta, cfg_.lambda);
      calls_ += g.oracle_calls_used + pen.oracle_calls_used + h.oracle_calls_used;
      return {std::move(g.g), std::move(h)};
    }
    const std::vector<Index> m1 = sample_without_replacement(problem_.n_components(), batch_data_,
                                                             data_rng_);
    std::vector<Index> m2 = sample_categorical(CategoricalSampler(p), cons_rng_, cfg_.batch_cons_w);
    std::sort(m2.begin(), m2.end());
    const std::vector<Index> m3 = sample_without_replacement(problem_.n_constraints(),
                                                             batch_cons_p_, cons_rng_);
    WGradEstimate g = zo_full_grad_w(problem_, w, m1, m2, dirs, mu_, cfg_.beta);
    PGradEstimate h = stoch_grad_p(problem_, w, p, m3, cfg_.beta, cfg_.lambda);
    calls_ += g.oracle_calls_used + h.oracle_calls_used;
    return {std::move(g.g), std::move(h)};
  }

  RunRow diagnostics_row(std::int64_t iter, double wall_s, const Vector& w, const SimplexPoint& p,
                         double step_norm, const Vector& z_w, const Vector& z_p) {
    return detail::diagnostics_row(problem_, hooks_, iter, wall_s, w, p, step_norm, z_w.norm(),
                                   z_p.norm(), diag_calls_);
  }

  OracleCalls calls_;
  OracleCalls diag_calls_;

 private:
  const BlackBoxProblem& problem_;
  const DszogConfig& cfg_;
  const SolveHooks& hooks_;
  detail::LoopVariant variant_;
  double mu_;
  Rng dir_rng_;
  Rng data_rng_;
  Rng cons_rng_;
  std::vector<Index> all_data_;
  std::vector<Index> all_cons_;
  Index batch_data_ = 0;
  Index batch_cons_p_ = 0;
};

}  // namespace

namespace detail {

void TrainingClock::start() { started_ = std::chrono::steady_clock::now(); }
void TrainingClock::stop() { elapsed_ += std::chrono::steady_clock::now() - started_; }
double TrainingClock::seconds() const {
  return std::chrono::duration<double>(elapsed_).count();
}

RunRow diagnostics_row(const BlackBoxProblem& problem, const SolveHooks& hooks, std::int64_t iter,
                       double wall_s, const Vector& w, const SimplexPoint& p, double step_norm,
                       double ema_norm_w, double ema_norm_p, OracleCalls& diag) {
  RunRow row;
  row.iter = iter;
  row.wall_s = wall_s;
  double obj = 0.0;
  for (Index i = 0; i < problem.n_components(); ++i) obj += problem.objective_component(i, w);
  row.objective = obj / static_cast<double>(problem.n_components());
  double pen = 0.0, max_v = 0.0, sum_sq = 0.0;
  for (Index j = 0; j < problem.n_constraints(); ++j) {
    const double v = std::max(problem.constraint(j, w), 0.0);
    pen += p[j] * v * v;
    sum_sq += v * v;
    max_v = std::max(max_v, v);
  }
  diag.objective += static_cast<std::uint64_t>(problem.n_components());
  diag.constraint += static_cast<std::uint64_t>(problem.n_constraints());
  row.penalty = pen;
  row.max_violation = max_v;
  row.sum_sq_violation = sum_sq;
  row.step_norm_w = step_norm;
  row.ema_norm_w = ema_norm_w;
  row.ema_norm_p = ema_norm_p;
  if (hooks.extra_metrics) row.extra = hooks.extra_metrics(w);
  return row;
}

SolveOutcome penalty_gda_loop(const BlackBoxProblem& problem, const DszogConfig& cfg,
                              const Vector& w0, const SolveHooks& hooks, LoopVariant variant) {
  detail::validate_config(cfg, /*allow_unit_b=*/true);
  if (w0.size() != problem.dim()) throw ConfigError("w0", "dimension mismatch");
  if (!w0.allFinite()) throw ConfigError("w0", "must be finite");
  if (hooks.extra_metrics && hooks.extra_names.empty())
    throw ContractError("SolveHooks: extra_metrics without extra_names");

  const double mu = effective_mu(cfg, w0);
  LoopRunner runner(problem, cfg, hooks, variant, mu);
  detail::TrainingClock clock;
  RunRecord record(hooks.extra_metrics ? hooks.extra_names : std::vector<std::string>{});

  auto emit = [&](RunRow row) {
    if (hooks.on_row) hooks.on_row(row);
    record.append(std::move(row));
  };

  clock.start();
  // p_1 maximizes the strongly concave inner problem at w_1.
  Vector phi(problem.n_constraints());
  for (Index j = 0; j < phi.size(); ++j) phi[j] = penalty_value(problem, j, w0);
  runner.calls_.constraint += static_cast<std::uint64_t>(phi.size());

  DszogState state{w0, argmax_concave_p(phi, cfg.beta, cfg.lambda), {}, {}, 0, {}};
  // Initial estimates seed the moving averages.
  {
    Estimates est = runner.estimate(state.w, state.p);
    state.z_w = std::move(est.g);
    state.z_p = est.h.to_dense();
  }
  clock.stop();
  emit(runner.diagnostics_row(0, clock.seconds(), state.w, state.p, 0.0, state.z_w, state.z_p));

  Termination termination = Termination::MaxIters;
  std::string abort_reason;
  double last_step = 0.0;
  const bool finite_start = state.z_w.allFinite() && state.z_p.allFinite();
  if (!finite_start) {
    termination = Termination::NumericalAbort;
    abort_reason = "nonfinite initial gradient estimate";
  }

  for (std::int64_t t = 1; finite_start && t <= cfg.max_iters; ++t) {
    if (cfg.time_budget_s && clock.seconds() >= *cfg.time_budget_s) {
      termination = Termination::TimeBudget;
      break;
    }
    clock.start();
    // Adaptive steps, projection, interpolation of p.
    Vector w_next = state.w - adaptive_step(state.z_w, cfg.eta_w, cfg.c_eps);
    const Vector ascent = state.p.values() + adaptive_step(state.z_p, cfg.eta_p, cfg.c_eps);
    if (!w_next.allFinite() || !ascent.allFinite()) {
      clock.stop();
      termination = Termination::NumericalAbort;
      abort_reason = "nonfinite iterate at iteration " + std::to_string(t);
      break;
    }
    const Vector p_hat = project_to_simplex(ascent);
    SimplexPoint p_next = variant.interpolate_p
                              ? SimplexPoint((1.0 - cfg.a) * state.p.values() + cfg.a * p_hat)
                              : SimplexPoint(p_hat);

    // Estimates at the new point.
    Estimates est = runner.estimate(w_next, p_next);

    // Moving averages.
    Vector z_w, z_p;
    if (variant.momentum) {
      z_w = ema_update(state.z_w, est.g, cfg.b);
      z_p = (1.0 - cfg.b) * state.z_p;
      est.h.add_to(z_p, cfg.b);
    } else {
      z_w = std::move(est.g);
      z_p = est.h.to_dense();
    }
    clock.stop();
    if (!z_w.allFinite() || !z_p.allFinite()) {
      termination = Termination::NumericalAbort;
      abort_reason = "nonfinite gradient estimate at iteration " + std::to_string(t);
      break;
    }
    last_step = (w_next - state.w).norm();
    state.w = std::move(w_next);
    state.p = std::move(p_next);
    state.z_w = std::move(z_w);
    state.z_p = std::move(z_p);
    state.iter = t;

    if (t % cfg.metric_every == 0)
      emit(runner.diagnostics_row(t, clock.seconds(), state.w, state.p, last_step, state.z_w,
                                  state.z_p));
  }
  if (record.rows().back().iter != state.iter)
    emit(runner.diagnostics_row(state.iter, clock.seconds(), state.w, state.p, last_step,
                                state.z_w, state.z_p));

  SolveOutcome out{state.w, state.p, std::move(record), {}, termination, abort_reason,
                   state.iter, runner.calls_, runner.diag_calls_};
  out.stationarity = stationarity_report(problem, state.w, state.p, cfg, hooks.stationarity);
  out.diagnostic_calls += out.stationarity.oracle_calls;
  return out;
}

}  // namespace detail

SolveOutcome dszog_solve(const BlackBoxProblem& problem, const DszogConfig& cfg, const Vector& w0,
                         const SolveHooks& hooks) {
  validate_config(cfg);
  return detail::penalty_gda_loop(problem, cfg, w0, hooks, {});
}

}  // namespace dszog
