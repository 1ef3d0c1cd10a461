#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dszog {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Invalid configuration value. `field()` names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// NaN/Inf encountered where finite values are required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition (shape mismatch, bad index, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Dataset content cannot support the requested operation.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; `line()` is 1-based.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

// ---------------------------------------------------------------------------
// Problem abstraction
// ---------------------------------------------------------------------------

/// Scalar oracle: (component index, point) -> value. Indices are 0-based.
using ScalarOracle = std::function<double(Index, const Vector&)>;

/// Black-box instance of
///
///     min_w (1/n) sum_i l_i(w)   s.t.  f_j(w) <= 0,  j = 0..m-1.
///
/// Solvers only ever see a problem through the two indexed scalar oracles,
/// so every query is counted. Counters are atomic; the oracles themselves
/// must be reentrant.
class BlackBoxProblem {
 public:
  BlackBoxProblem(Index dim, Index n_components, Index n_constraints,
                  ScalarOracle objective, ScalarOracle constraint);

  BlackBoxProblem(BlackBoxProblem&&) noexcept = default;
  BlackBoxProblem& operator=(BlackBoxProblem&&) noexcept = default;
  BlackBoxProblem(const BlackBoxProblem&) = delete;
  BlackBoxProblem& operator=(const BlackBoxProblem&) = delete;

  Index dim() const noexcept { return dim_; }
  Index n_components() const noexcept { return n_; }
  Index n_constraints() const noexcept { return m_; }

  double objective_component(Index i, const Vector& w) const;
  double constraint(Index j, const Vector& w) const;

  std::uint64_t objective_calls() const noexcept;
  std::uint64_t constraint_calls() const noexcept;

 private:
  struct Counters {
    std::atomic<std::uint64_t> objective{0};
    std::atomic<std::uint64_t> constraint{0};
  };

  Index dim_;
  Index n_;
  Index m_;
  ScalarOracle objective_;
  ScalarOracle constraint_;
  std::unique_ptr<Counters> counters_;
};

/// Oracle calls split by kind.
struct OracleCalls {
  std::uint64_t objective = 0;
  std::uint64_t constraint = 0;

  std::uint64_t total() const noexcept { return objective + constraint; }
  OracleCalls& operator+=(const OracleCalls& o) noexcept {
    objective += o.objective;
    constraint += o.constraint;
    return *this;
  }
  friend OracleCalls operator+(OracleCalls a, const OracleCalls& b) noexcept { return a += b; }
  friend bool operator==(const OracleCalls&, const OracleCalls&) = default;
};

// ---------------------------------------------------------------------------
// Simplex point
// ---------------------------------------------------------------------------

/// A probability vector over the m constraints.
///
/// Construction clamps rounding-level negatives to zero and renormalizes so
/// that the entries sum to one; anything further from the simplex than
/// rounding noise is rejected with ContractError.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit SimplexPoint(Vector p);

  static SimplexPoint uniform(Index m);

  const Vector& values() const noexcept { return p_; }
  Index size() const noexcept { return p_.size(); }
  double operator[](Index j) const { return p_[j]; }

 private:
  Vector p_;
};

// ---------------------------------------------------------------------------
// Solver configuration and state
// ---------------------------------------------------------------------------

/// Hyperparameters of the doubly stochastic solver.
struct DszogConfig {
  double beta = 10.0;        ///< penalty weight
  double lambda = 1e-6;      ///< concavity regularizer on p
  std::optional<double> mu;  ///< smoothing radius; unset = 1e-4 * max(1, |w0|)
  int q = 10;                ///< Gaussian directions per estimate
  int batch_data = 128;      ///< |M1|, clamped to n
  int batch_cons_w = 128;    ///< |M2|, drawn with replacement from p
  int batch_cons_p = 128;    ///< |M3|, clamped to m
  double eta_w = 1e-3;
  double eta_p = 1e-3;
  double a = 0.5;            ///< interpolation weight for p, in (0,1]
  double b = 0.1;            ///< EMA weight, in (0,1)
  double c_eps = 1e-8;       ///< adaptive-step denominator guard
  std::int64_t max_iters = 1000;
  std::uint64_t seed = 0;
  std::int64_t metric_every = 100;
  std::optional<double> time_budget_s;
};

/// Throws ConfigError naming the first field that violates its range.
void validate_config(const DszogConfig& cfg);

namespace detail {
/// validate_config, optionally admitting b = 1 (EMA switched off), which the
/// degenerate-case checks of the solver loop need.
void validate_config(const DszogConfig& cfg, bool allow_unit_b);
}  // namespace detail

/// Names of every DszogConfig field, in declaration order.
const std::vector<std::string>& config_field_names();

/// key=value rendering of every field (used for manifests).
std::vector<std::pair<std::string, std::string>> config_entries(const DszogConfig& cfg);

/// Smoothing radius actually used for a run started at w0.
double effective_mu(const DszogConfig& cfg, const Vector& w0);

/// Mutable quantities of one solver run.
struct DszogState {
  Vector w;
  SimplexPoint p;
  Vector z_w;
  Vector z_p;
  std::int64_t iter = 0;
  OracleCalls oracle_calls;
};

// ---------------------------------------------------------------------------
// Run record
// ---------------------------------------------------------------------------

struct RunRow {
  std::int64_t iter = 0;
  double wall_s = 0.0;
  double objective = 0.0;   ///< f0(w), full sweep over components
  double penalty = 0.0;     ///< sum_j p_j phi_j(w)
  double max_violation = 0.0;
  double sum_sq_violation = 0.0;
  double step_norm_w = 0.0;
  double ema_norm_w = 0.0;
  double ema_norm_p = 0.0;
  std::vector<double> extra;  ///< values for RunRecord::extra_names()
};

/// Per-iteration metrics stream. Rows are strictly increasing in `iter` and
/// nondecreasing in `wall_s`; appending a row that breaks either is a
/// ContractError.
class RunRecord {
 public:
  RunRecord() = default;
  explicit RunRecord(std::vector<std::string> extra_names)
      : extra_names_(std::move(extra_names)) {}

  void append(RunRow row);

  const std::vector<RunRow>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& extra_names() const noexcept { return extra_names_; }
  bool empty() const noexcept { return rows_.empty(); }

 private:
  std::vector<std::string> extra_names_;
  std::vector<RunRow> rows_;
};

}  // namespace dszog
