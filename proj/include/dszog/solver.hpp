#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "dszog/core.hpp"
#include "dszog/metrics.hpp"

namespace dszog {

/// eta * z / (sqrt(|z|_2) + c_eps).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> adaptive_step(
    const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar eta,
    typename Derived::Scalar c_eps) {
  using std::sqrt;
  return (eta / (sqrt(z.norm()) + c_eps)) * z;
}

/// (1 - b) z_old + b fresh. Shapes must agree.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> ema_update(
    const Eigen::MatrixBase<DerivedA>& z_old, const Eigen::MatrixBase<DerivedB>& fresh,
    typename DerivedA::Scalar b) {
  if (z_old.size() != fresh.size()) throw ContractError("ema_update: shape mismatch");
  return (1 - b) * z_old + b * fresh;
}

enum class Termination { MaxIters, TimeBudget, NumericalAbort };

const char* to_string(Termination t) noexcept;

/// Optional callbacks for a run.
struct SolveHooks {
  /// Called with each RunRecord row as it is appended.
  std::function<void(const RunRow&)> on_row;
  /// Extra per-row metrics (e.g. test accuracy), named by `extra_names`.
  std::vector<std::string> extra_names;
  std::function<std::vector<double>(const Vector& w)> extra_metrics;
  /// Options for the final stationarity report.
  StationarityOptions stationarity;
};

struct SolveOutcome {
  Vector final_w;
  SimplexPoint final_p;
  RunRecord record;
  StationarityReport stationarity;
  Termination termination = Termination::MaxIters;
  std::string abort_reason;
  std::int64_t iterations = 0;  ///< completed iterations
  OracleCalls algorithm_calls;   ///< spent by the method itself
  OracleCalls diagnostic_calls;  ///< spent on RunRecord rows and the final report
};

/// Doubly stochastic zeroth-order gradient descent-ascent on
///
///     L(w, p) = f0(w) + beta sum_j p_j phi_j(w) - (lambda / 2) |p|^2.
///
/// p starts at the exact maximizer for w0 (one full constraint sweep). Each
/// iteration then
///   1. steps w against z_w and p along z_p, both scaled by
///      1 / (sqrt(|z|) + c_eps); p is projected back to the simplex and
///      blended with the previous p by weight `a`;
///   2. draws fresh directions, a uniform data batch M1, a constraint batch
///      M2 ~ p and a uniform constraint batch M3;
///   3. folds the new estimates into z_w, z_p by an EMA with weight `b`.
/// Per iteration this costs |M1|(q+1) objective and |M2|(q+1) + |M3|
/// constraint calls, independent of m.
///
/// Throws ConfigError for an invalid configuration or w0. A NaN/Inf in the
/// state stops the run with Termination::NumericalAbort and the last finite
/// iterate.
SolveOutcome dszog_solve(const BlackBoxProblem& problem, const DszogConfig& cfg, const Vector& w0,
                         const SolveHooks& hooks = {});

namespace detail {

/// Switches used to check degenerate cases against the main loop.
struct LoopVariant {
  bool full_batch = false;      ///< M1 = [n], exact p-weighted penalty, M3 = [m]
  bool interpolate_p = true;    ///< false: p_{t+1} = p_hat_{t+1}
  bool momentum = true;         ///< false: z = fresh estimate
};

/// One RunRecord row at (w, p): full objective and constraint sweeps plus
/// the hook's extra metrics. Sweep costs are added to `diag`.
RunRow diagnostics_row(const BlackBoxProblem& problem, const SolveHooks& hooks, std::int64_t iter,
                       double wall_s, const Vector& w, const SimplexPoint& p, double step_norm,
                       double ema_norm_w, double ema_norm_p, OracleCalls& diag);

/// Wall clock that only runs while the method itself is working, so
/// diagnostics never count against the time budget or the trace timestamps.
class TrainingClock {
 public:
  void start();
  void stop();
  double seconds() const;

 private:
  std::chrono::steady_clock::time_point started_{};
  std::chrono::steady_clock::duration elapsed_{};
};

SolveOutcome penalty_gda_loop(const BlackBoxProblem& problem, const DszogConfig& cfg,
                              const Vector& w0, const SolveHooks& hooks, LoopVariant variant);

}  // namespace detail

}  // namespace dszog
