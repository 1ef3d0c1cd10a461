#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dszog/core.hpp"

namespace dszog {

/// Controls the high-accuracy zeroth-order sweeps used for gradient residuals.
struct StationarityOptions {
  Index q_big = 64;
  double mu_small = 1e-6;
  std::uint64_t seed = 0x5eed;
  /// When false only the exact (sweep-based) residuals are computed and the
  /// gradient fields are reported as NaN.
  bool estimate_gradients = true;
};

/// Constrained-stationarity diagnostics at a point (w, p).
///
/// eps2_sq, eps3_sq, max_violation, alphas and the p-residuals are exact
/// (one constraint sweep each). eps1_sq and the w-gradient residuals are
/// zeroth-order estimates; each carries a Monte-Carlo standard error.
struct StationarityReport {
  double eps1_sq = 0.0;           ///< |grad f0 + sum_j alpha_j grad f_j|^2 (estimate)
  double eps1_sq_stderr = 0.0;
  double eps2_sq = 0.0;           ///< sum_j max(f_j, 0)^2
  double eps3_sq = 0.0;           ///< sum_j (alpha_j f_j)^2
  double max_violation = 0.0;     ///< max_j max(f_j, 0)
  Vector alphas;                  ///< recovered multipliers 2 beta p_j max(f_j, 0)
  double grad_norm_sq_w = 0.0;    ///< |grad_w L(w, p)|^2 (estimate)
  double grad_norm_sq_w_stderr = 0.0;
  double grad_norm_sq_p = 0.0;    ///< |p - P(p + grad_p L)|^2, projected-gradient mapping
  double grad_norm_sq_p_raw = 0.0;  ///< |beta phi - lambda p|^2
  /// |grad_w L(w, p*(w))|^2 with p*(w) the exact inner maximizer; stands in
  /// for |grad g(w)|^2, g(w) = max_p L(w, p). Estimate.
  double grad_norm_sq_g = 0.0;
  double grad_norm_sq_g_stderr = 0.0;
  OracleCalls oracle_calls;
};

/// f_j(w) for every constraint (m calls).
Vector constraint_values(const BlackBoxProblem& problem, const Vector& w);

/// alpha_j = 2 beta p_j max(f_j(w), 0). One constraint sweep.
Vector recover_multipliers(const BlackBoxProblem& problem, const Vector& w, const SimplexPoint& p,
                           double beta);

struct FeasibilityResiduals {
  double eps2_sq = 0.0;
  double max_violation = 0.0;
};

FeasibilityResiduals feasibility_residuals(const BlackBoxProblem& problem, const Vector& w);

struct MinimaxResiduals {
  double grad_norm_sq_w = 0.0;
  double grad_norm_sq_w_stderr = 0.0;
  double grad_norm_sq_p = 0.0;
  double grad_norm_sq_p_raw = 0.0;
};

/// Residuals of the min-max stationarity conditions at (w, p). The p part is
/// exact; the w part uses q_big directions with radius mu_small over full
/// component and constraint sweeps.
MinimaxResiduals minimax_residuals(const BlackBoxProblem& problem, const Vector& w,
                                   const SimplexPoint& p, const DszogConfig& cfg,
                                   const StationarityOptions& opts);

/// Everything above in one report.
StationarityReport stationarity_report(const BlackBoxProblem& problem, const Vector& w,
                                       const SimplexPoint& p, const DszogConfig& cfg,
                                       const StationarityOptions& opts);

/// key=value pairs for every report field (alphas as a ';'-joined list).
std::vector<std::pair<std::string, std::string>> report_entries(const StationarityReport& report);

/// Zeroth-order mean-gradient estimate of an arbitrary scalar function with
/// the standard error of its squared norm. `norm_sq` is |mean|^2 minus the
/// sample trace term tr(C)/q (unbiased for |E g|^2), clamped at zero.
struct ZoGradientSummary {
  Vector mean;
  double norm_sq = 0.0;
  double norm_sq_stderr = 0.0;
};

ZoGradientSummary zo_gradient_summary(const std::function<double(const Vector&)>& f,
                                      const Vector& w, Index q, double mu, std::uint64_t seed);

}  // namespace dszog
