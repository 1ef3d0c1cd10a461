#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dszog/core.hpp"
#include "dszog/random.hpp"

namespace dszog {

/// q standard-normal directions in R^d, stored as the columns of a d x q matrix.
struct GaussianDirections {
  Eigen::MatrixXd u;

  Index dim() const noexcept { return u.rows(); }
  Index count() const noexcept { return u.cols(); }

  static GaussianDirections draw(Index d, Index q, Rng& rng);
};

/// Gradient estimate in w together with the oracle calls spent on it.
struct WGradEstimate {
  Vector g;
  OracleCalls oracle_calls_used;
};

/// Stochastic gradient in p, kept as sparse batch entries plus the dense
/// -lambda * p part so large m never materializes per-sample vectors.
struct PGradEstimate {
  std::vector<std::pair<Index, double>> entries;  ///< (j, scaled phi_j), ascending j, merged
  double lambda = 0.0;
  Vector p;
  OracleCalls oracle_calls_used;

  Vector to_dense() const;
  /// z <- z + weight * H, without forming H.
  void add_to(Vector& z, double weight) const;
};

/// phi_j(w) = max(f_j(w), 0)^2. One constraint-oracle call.
double penalty_value(const BlackBoxProblem& problem, Index j, const Vector& w);

/// Forward-difference Gaussian-smoothing estimate of grad f0:
///
///     (1 / (q |M1|)) sum_{i in M1} sum_k (l_i(w + mu u_k) - l_i(w)) / mu * u_k.
///
/// l_i(w) is evaluated once per i, so the cost is |M1| (q + 1) objective calls.
WGradEstimate zo_objective_grad(const BlackBoxProblem& problem, const Vector& w,
                                std::span<const Index> batch, const GaussianDirections& dirs,
                                double mu);

/// Same estimator applied to phi_j over a batch M2 already drawn from p.
/// Every index in the batch is weighted equally; |M2| (q + 1) constraint calls.
WGradEstimate zo_penalty_grad(const BlackBoxProblem& problem, const Vector& w,
                              std::span<const Index> batch, const GaussianDirections& dirs,
                              double mu);

/// Exact p-weighted version over all m constraints:
///     (1 / q) sum_j p_j sum_k (phi_j(w + mu u_k) - phi_j(w)) / mu * u_k.
/// m (q + 1) constraint calls.
WGradEstimate zo_weighted_penalty_grad(const BlackBoxProblem& problem, const Vector& w,
                                       const SimplexPoint& p, const GaussianDirections& dirs,
                                       double mu);

/// Objective part + beta * penalty part, sharing one direction set.
WGradEstimate zo_full_grad_w(const BlackBoxProblem& problem, const Vector& w,
                             std::span<const Index> batch_data, std::span<const Index> batch_cons,
                             const GaussianDirections& dirs, double mu, double beta);

/// H = (beta m / |M3|) sum_{j in M3} e_j phi_j(w) - lambda p.
PGradEstimate stoch_grad_p(const BlackBoxProblem& problem, const Vector& w, const SimplexPoint& p,
                           std::span<const Index> batch, double beta, double lambda);

}  // namespace dszog
