#include "dszog/zo_grad.hpp"

#include <algorithm>

namespace dszog {

GaussianDirections GaussianDirections::draw(Index d, Index q, Rng& rng) {
  if (d <= 0 || q <= 0) throw ContractError("GaussianDirections: d and q must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  GaussianDirections out{Eigen::MatrixXd(d, q)};
  for (Index k = 0; k < q; ++k)
    for (Index i = 0; i < d; ++i) out.u(i, k) = normal(rng);
  return out;
}

Vector PGradEstimate::to_dense() const {
  Vector h = -lambda * p;
  for (const auto& [j, v] : entries) h[j] += v;
  return h;
}

void PGradEstimate::add_to(Vector& z, double weight) const {
  z.noalias() -= (weight * lambda) * p;
  for (const auto& [j, v] : entries) z[j] += weight * v;
}

double penalty_value(const BlackBoxProblem& problem, Index j, const Vector& w) {
  const double f = std::max(problem.constraint(j, w), 0.0);
  return f * f;
}

namespace {

void check_inputs(const BlackBoxProblem& problem, const Vector& w, std::span<const Index> batch,
                  const GaussianDirections& dirs, double mu) {
  if (!(mu > 0.0)) throw ConfigError("mu", "must be positive");
  if (batch.empty()) throw ContractError("zo estimator: empty batch");
  if (w.size() != problem.dim() || dirs.dim() != problem.dim())
    throw ContractError("zo estimator: dimension mismatch");
}

// sum_k (F(w + mu u_k) - F(w)) / mu * u_k for a scalar function F, given F(w).
template <typename F>
void accumulate_directional(Vector& acc, const Vector& w, double base,
                            const GaussianDirections& dirs, double mu, double weight, F&& eval) {
  Vector shifted(w.size());
  for (Index k = 0; k < dirs.count(); ++k) {
    shifted.noalias() = w + mu * dirs.u.col(k);
    const double diff = (eval(shifted) - base) / mu;
    acc.noalias() += (weight * diff) * dirs.u.col(k);
  }
}

}  // namespace

WGradEstimate zo_objective_grad(const BlackBoxProblem& problem, const Vector& w,
                                std::span<const Index> batch, const GaussianDirections& dirs,
                                double mu) {
  check_inputs(problem, w, batch, dirs, mu);
  WGradEstimate out{Vector::Zero(w.size()), {}};
  for (const Index i : batch) {
    const double base = problem.objective_component(i, w);
    accumulate_directional(out.g, w, base, dirs, mu, 1.0,
                           [&](const Vector& x) { return problem.objective_component(i, x); });
  }
  const auto q = static_cast<std::uint64_t>(dirs.count());
  out.g /= static_cast<double>(dirs.count()) * static_cast<double>(batch.size());
  out.oracle_calls_used.objective = batch.size() * (q + 1);
  return out;
}

namespace {

// Shared by the sampled and the exact weighted penalty estimators so the two
// agree to the last bit when m = 1.
WGradEstimate penalty_grad_impl(const BlackBoxProblem& problem, const Vector& w,
                                std::span<const Index> indices, const Vector* weights,
                                double count, const GaussianDirections& dirs, double mu) {
  check_inputs(problem, w, indices, dirs, mu);
  WGradEstimate out{Vector::Zero(w.size()), {}};
  for (const Index j : indices) {
    const double weight = weights ? (*weights)[j] : 1.0;
    const double base = penalty_value(problem, j, w);
    accumulate_directional(out.g, w, base, dirs, mu, weight,
                           [&](const Vector& x) { return penalty_value(problem, j, x); });
  }
  const auto q = static_cast<std::uint64_t>(dirs.count());
  out.g /= static_cast<double>(dirs.count()) * count;
  out.oracle_calls_used.constraint = indices.size() * (q + 1);
  return out;
}

}  // namespace

WGradEstimate zo_penalty_grad(const BlackBoxProblem& problem, const Vector& w,
                              std::span<const Index> batch, const GaussianDirections& dirs,
                              double mu) {
  return penalty_grad_impl(problem, w, batch, nullptr, static_cast<double>(batch.size()), dirs, mu);
}

WGradEstimate zo_weighted_penalty_grad(const BlackBoxProblem& problem, const Vector& w,
                                       const SimplexPoint& p, const GaussianDirections& dirs,
                                       double mu) {
  if (p.size() != problem.n_constraints()) throw ContractError("weighted penalty: p has wrong size");
  std::vector<Index> all(static_cast<std::size_t>(problem.n_constraints()));
  for (Index j = 0; j < problem.n_constraints(); ++j) all[static_cast<std::size_t>(j)] = j;
  return penalty_grad_impl(problem, w, all, &p.values(), 1.0, dirs, mu);
}

WGradEstimate zo_full_grad_w(const BlackBoxProblem& problem, const Vector& w,
                             std::span<const Index> batch_data, std::span<const Index> batch_cons,
                             const GaussianDirections& dirs, double mu, double beta) {
  WGradEstimate obj = zo_objective_grad(problem, w, batch_data, dirs, mu);
  WGradEstimate pen = zo_penalty_grad(problem, w, batch_cons, dirs, mu);
  obj.g.noalias() += beta * pen.g;
  obj.oracle_calls_used += pen.oracle_calls_used;
  return obj;
}

PGradEstimate stoch_grad_p(const BlackBoxProblem& problem, const Vector& w, const SimplexPoint& p,
                           std::span<const Index> batch, double beta, double lambda) {
  if (batch.empty()) throw ContractError("stoch_grad_p: empty batch");
  if (p.size() != problem.n_constraints()) throw ContractError("stoch_grad_p: p has wrong size");
  const double scale = beta * static_cast<double>(problem.n_constraints()) /
                       static_cast<double>(batch.size());
  PGradEstimate out;
  out.lambda = lambda;
  out.p = p.values();
  out.entries.reserve(batch.size());
  for (const Index j : batch) out.entries.emplace_back(j, scale * penalty_value(problem, j, w));
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  // Merge repeated indices so to_dense()/add_to() touch each j once.
  std::vector<std::pair<Index, double>> merged;
  merged.reserve(out.entries.size());
  for (const auto& e : out.entries) {
    if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
    else merged.push_back(e);
  }
  out.entries = std::move(merged);
  out.oracle_calls_used.constraint = batch.size();
  return out;
}

}  // namespace dszog
