#include "dszog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dszog/random.hpp"
#include "dszog/simplex.hpp"

namespace dszog {

Vector constraint_values(const BlackBoxProblem& problem, const Vector& w) {
  Vector f(problem.n_constraints());
  for (Index j = 0; j < f.size(); ++j) f[j] = problem.constraint(j, w);
  return f;
}

namespace {

Vector multipliers_from(const Vector& f, const SimplexPoint& p, double beta) {
  return (2.0 * beta) * p.values().cwiseProduct(f.cwiseMax(0.0));
}

}  // namespace

Vector recover_multipliers(const BlackBoxProblem& problem, const Vector& w, const SimplexPoint& p,
                           double beta) {
  if (p.size() != problem.n_constraints()) throw ContractError("recover_multipliers: p size");
  return multipliers_from(constraint_values(problem, w), p, beta);
}

FeasibilityResiduals feasibility_residuals(const BlackBoxProblem& problem, const Vector& w) {
  const Vector viol = constraint_values(problem, w).cwiseMax(0.0);
  return {viol.squaredNorm(), viol.maxCoeff()};
}

ZoGradientSummary zo_gradient_summary(const std::function<double(const Vector&)>& f,
                                      const Vector& w, Index q, double mu, std::uint64_t seed) {
  if (q < 2) throw ContractError("zo_gradient_summary: need at least two directions");
  if (!(mu > 0.0)) throw ConfigError("mu_small", "must be positive");
  Rng rng = make_stream(seed, 0xd1a9);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index d = w.size();
  const double base = f(w);

  Eigen::MatrixXd samples(d, q);
  Vector u(d);
  for (Index k = 0; k < q; ++k) {
    for (Index i = 0; i < d; ++i) u[i] = normal(rng);
    samples.col(k) = ((f(w + mu * u) - base) / mu) * u;
  }
  ZoGradientSummary out;
  out.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - out.mean;
  const double qd = static_cast<double>(q);
  // |mean|^2 overshoots |E g|^2 by tr(C)/q; remove it and clamp at zero.
  const double trace = centered.squaredNorm() / (qd - 1.0);
  out.norm_sq = std::max(0.0, out.mean.squaredNorm() - trace / qd);
  // Var(|g|^2) ~ 4 g' C g / q, plus the squared trace term.
  const double along = (out.mean.transpose() * centered).squaredNorm() / (qd - 1.0);
  out.norm_sq_stderr = std::sqrt(4.0 * along / qd + 2.0 * (trace / qd) * (trace / qd));
  return out;
}

namespace {

// f0(w) + sum_j weights_j phi_j(w) (or f_j when `raw`), skipping zero weights.
std::function<double(const Vector&)> weighted_sum(const BlackBoxProblem& problem,
                                                  const Vector& weights, bool raw) {
  std::vector<Index> active;
  for (Index j = 0; j < weights.size(); ++j)
    if (weights[j] != 0.0) active.push_back(j);
  return [&problem, weights, raw, active = std::move(active)](const Vector& x) {
    double obj = 0.0;
    for (Index i = 0; i < problem.n_components(); ++i) obj += problem.objective_component(i, x);
    obj /= static_cast<double>(problem.n_components());
    double pen = 0.0;
    for (const Index j : active) {
      const double fj = problem.constraint(j, x);
      const double term = raw ? fj : std::max(fj, 0.0) * std::max(fj, 0.0);
      pen += weights[j] * term;
    }
    return obj + pen;
  };
}

std::uint64_t active_count(const Vector& weights) {
  return static_cast<std::uint64_t>((weights.array() != 0.0).count());
}

struct PResiduals {
  double projected = 0.0;
  double raw = 0.0;
};

PResiduals p_residuals(const Vector& phi, const SimplexPoint& p, const DszogConfig& cfg) {
  const Vector grad = cfg.beta * phi - cfg.lambda * p.values();
  const Vector mapped = project_to_simplex(p.values() + grad);
  return {(p.values() - mapped).squaredNorm(), grad.squaredNorm()};
}

}  // namespace

MinimaxResiduals minimax_residuals(const BlackBoxProblem& problem, const Vector& w,
                                   const SimplexPoint& p, const DszogConfig& cfg,
                                   const StationarityOptions& opts) {
  if (opts.q_big <= 0) throw ConfigError("q_big", "must be positive");
  if (!(opts.mu_small > 0.0)) throw ConfigError("mu_small", "must be positive");
  const Vector f = constraint_values(problem, w);
  const Vector phi = f.cwiseMax(0.0).cwiseAbs2();
  const PResiduals pr = p_residuals(phi, p, cfg);
  const ZoGradientSummary gw = zo_gradient_summary(
      weighted_sum(problem, cfg.beta * p.values(), false), w, opts.q_big, opts.mu_small, opts.seed);
  return {gw.norm_sq, gw.norm_sq_stderr, pr.projected, pr.raw};
}

StationarityReport stationarity_report(const BlackBoxProblem& problem, const Vector& w,
                                       const SimplexPoint& p, const DszogConfig& cfg,
                                       const StationarityOptions& opts) {
  if (p.size() != problem.n_constraints()) throw ContractError("stationarity_report: p size");
  StationarityReport r;
  const Index m = problem.n_constraints();
  const Index n = problem.n_components();

  const Vector f = constraint_values(problem, w);
  r.oracle_calls.constraint += static_cast<std::uint64_t>(m);
  const Vector viol = f.cwiseMax(0.0);
  const Vector phi = viol.cwiseAbs2();
  r.eps2_sq = phi.sum();
  r.max_violation = viol.maxCoeff();
  r.alphas = multipliers_from(f, p, cfg.beta);
  r.eps3_sq = r.alphas.cwiseProduct(f).squaredNorm();
  const PResiduals pr = p_residuals(phi, p, cfg);
  r.grad_norm_sq_p = pr.projected;
  r.grad_norm_sq_p_raw = pr.raw;

  if (!opts.estimate_gradients) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.eps1_sq = r.eps1_sq_stderr = nan;
    r.grad_norm_sq_w = r.grad_norm_sq_w_stderr = nan;
    r.grad_norm_sq_g = r.grad_norm_sq_g_stderr = nan;
    return r;
  }
  if (opts.q_big < 2) throw ConfigError("q_big", "must be at least 2");
  if (!(opts.mu_small > 0.0)) throw ConfigError("mu_small", "must be positive");

  const auto q1 = static_cast<std::uint64_t>(opts.q_big) + 1;
  auto account = [&](const Vector& weights) {
    r.oracle_calls.objective += q1 * static_cast<std::uint64_t>(n);
    r.oracle_calls.constraint += q1 * active_count(weights);
  };

  const ZoGradientSummary kkt = zo_gradient_summary(weighted_sum(problem, r.alphas, true), w,
                                                    opts.q_big, opts.mu_small, opts.seed);
  account(r.alphas);
  r.eps1_sq = kkt.norm_sq;
  r.eps1_sq_stderr = kkt.norm_sq_stderr;

  const Vector wp = cfg.beta * p.values();
  const ZoGradientSummary lw = zo_gradient_summary(weighted_sum(problem, wp, false), w,
                                                   opts.q_big, opts.mu_small, opts.seed + 1);
  account(wp);
  r.grad_norm_sq_w = lw.norm_sq;
  r.grad_norm_sq_w_stderr = lw.norm_sq_stderr;

  const Vector wg = cfg.beta * argmax_concave_p(phi, cfg.beta, cfg.lambda).values();
  const ZoGradientSummary lg = zo_gradient_summary(weighted_sum(problem, wg, false), w,
                                                   opts.q_big, opts.mu_small, opts.seed + 2);
  account(wg);
  r.grad_norm_sq_g = lg.norm_sq;
  r.grad_norm_sq_g_stderr = lg.norm_sq_stderr;
  return r;
}

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}
}  // namespace

std::vector<std::pair<std::string, std::string>> report_entries(const StationarityReport& r) {
  std::ostringstream alphas;
  alphas.precision(12);
  for (Index j = 0; j < r.alphas.size(); ++j) alphas << (j ? ";" : "") << r.alphas[j];
  return {
      {"eps1_sq", fmt(r.eps1_sq)},
      {"eps1_sq_stderr", fmt(r.eps1_sq_stderr)},
      {"eps2_sq", fmt(r.eps2_sq)},
      {"eps3_sq", fmt(r.eps3_sq)},
      {"max_violation", fmt(r.max_violation)},
      {"grad_norm_sq_w", fmt(r.grad_norm_sq_w)},
      {"grad_norm_sq_w_stderr", fmt(r.grad_norm_sq_w_stderr)},
      {"grad_norm_sq_p", fmt(r.grad_norm_sq_p)},
      {"grad_norm_sq_p_raw", fmt(r.grad_norm_sq_p_raw)},
      {"grad_norm_sq_g", fmt(r.grad_norm_sq_g)},
      {"grad_norm_sq_g_stderr", fmt(r.grad_norm_sq_g_stderr)},
      {"objective_calls", std::to_string(r.oracle_calls.objective)},
      {"constraint_calls", std::to_string(r.oracle_calls.constraint)},
      {"alphas", alphas.str()},
  };
}

}  // namespace dszog
