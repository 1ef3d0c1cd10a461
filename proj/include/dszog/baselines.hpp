#pragma once

#include <string>

#include "dszog/solver.hpp"

namespace dszog {

/// Penalty GDA with exact sweeps: every iteration uses all n components, the
/// exact p-weighted penalty estimate over all m constraints, and the exact
/// p-gradient, with no EMA (b = 1) and no interpolation (a = 1). The
/// adaptive steps are kept, so stochastic constraint sampling is the only
/// difference from dszog_solve. Per iteration: n(q+1) objective calls and
/// m(q+1) + m constraint calls.
SolveOutcome full_batch_gda_solve(const BlackBoxProblem& problem, const DszogConfig& cfg,
                                  const Vector& w0, const SolveHooks& hooks = {});

/// Simple feasible sets supported by the projected baseline.
struct FeasibleSet {
  enum class Kind { Box, Simplex };
  Kind kind = Kind::Box;
  Vector lo;
  Vector hi;

  static FeasibleSet box(Vector lo, Vector hi);
  static FeasibleSet box(Index d, double lo, double hi);
  static FeasibleSet simplex();
  /// "box" or "simplex"; anything else is a ConfigError.
  static FeasibleSet parse(const std::string& name, Index d, double lo, double hi);

  Vector project(const Vector& w) const;
  bool contains(const Vector& w, double tol = 0.0) const;
};

/// Projected zeroth-order SGD on the objective alone:
///     w_{t+1} = P_set(w_t - eta_w * G_mu^f(w_t)),
/// with G_mu^f from a uniform batch of batch_data components and q
/// directions. Constraints of the problem are not queried by the method
/// (only by the diagnostics); the feasible set replaces them.
SolveOutcome zopsgd_solve(const BlackBoxProblem& problem, const FeasibleSet& set,
                          const DszogConfig& cfg, const Vector& w0, const SolveHooks& hooks = {});

}  // namespace dszog
