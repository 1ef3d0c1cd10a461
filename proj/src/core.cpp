#include "dszog/core.hpp"

#include <cmath>
#include <sstream>

namespace dszog {

BlackBoxProblem::BlackBoxProblem(Index dim, Index n_components, Index n_constraints,
                                 ScalarOracle objective, ScalarOracle constraint)
    : dim_(dim),
      n_(n_components),
      m_(n_constraints),
      objective_(std::move(objective)),
      constraint_(std::move(constraint)),
      counters_(std::make_unique<Counters>()) {
  if (dim_ <= 0) throw ContractError("BlackBoxProblem: dim must be positive");
  if (n_ <= 0) throw ContractError("BlackBoxProblem: n_components must be positive");
  if (m_ <= 0) throw ContractError("BlackBoxProblem: n_constraints must be positive");
  if (!objective_ || !constraint_) throw ContractError("BlackBoxProblem: null oracle");
}

double BlackBoxProblem::objective_component(Index i, const Vector& w) const {
  if (i < 0 || i >= n_) throw ContractError("objective component index out of range");
  if (w.size() != dim_) throw ContractError("objective oracle: dimension mismatch");
  counters_->objective.fetch_add(1, std::memory_order_relaxed);
  return objective_(i, w);
}

double BlackBoxProblem::constraint(Index j, const Vector& w) const {
  if (j < 0 || j >= m_) throw ContractError("constraint index out of range");
  if (w.size() != dim_) throw ContractError("constraint oracle: dimension mismatch");
  counters_->constraint.fetch_add(1, std::memory_order_relaxed);
  return constraint_(j, w);
}

std::uint64_t BlackBoxProblem::objective_calls() const noexcept {
  return counters_->objective.load(std::memory_order_relaxed);
}

std::uint64_t BlackBoxProblem::constraint_calls() const noexcept {
  return counters_->constraint.load(std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------

SimplexPoint::SimplexPoint(Vector p) : p_(std::move(p)) {
  if (p_.size() == 0) throw ContractError("SimplexPoint: empty vector");
  if (!p_.allFinite()) throw ContractError("SimplexPoint: nonfinite entry");
  // Rounding noise from projections and convex combinations stays far below
  // these bounds; anything larger is a caller bug.
  if (p_.minCoeff() < -1e-9) throw ContractError("SimplexPoint: negative entry");
  p_ = p_.cwiseMax(0.0);
  const double sum = p_.sum();
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(17);
    os << "SimplexPoint: entries sum to " << sum;
    throw ContractError(os.str());
  }
  p_ /= sum;
  p_ = p_.cwiseMin(1.0);
}

SimplexPoint SimplexPoint::uniform(Index m) {
  if (m <= 0) throw ContractError("SimplexPoint::uniform: m must be positive");
  return SimplexPoint(Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

// ---------------------------------------------------------------------------

void validate_config(const DszogConfig& cfg) { detail::validate_config(cfg, false); }

void detail::validate_config(const DszogConfig& cfg, bool allow_unit_b) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(cfg.beta)) throw ConfigError("beta", "must be positive");
  if (!positive(cfg.lambda)) throw ConfigError("lambda", "must be positive");
  if (cfg.mu && !positive(*cfg.mu)) throw ConfigError("mu", "must be positive");
  if (cfg.q <= 0) throw ConfigError("q", "must be a positive integer");
  if (cfg.batch_data <= 0) throw ConfigError("batch_data", "must be a positive integer");
  if (cfg.batch_cons_w <= 0) throw ConfigError("batch_cons_w", "must be a positive integer");
  if (cfg.batch_cons_p <= 0) throw ConfigError("batch_cons_p", "must be a positive integer");
  if (!positive(cfg.eta_w)) throw ConfigError("eta_w", "must be positive");
  if (!positive(cfg.eta_p)) throw ConfigError("eta_p", "must be positive");
  if (!(cfg.a > 0.0 && cfg.a <= 1.0)) throw ConfigError("a", "must lie in (0, 1]");
  if (!(cfg.b > 0.0 && (cfg.b < 1.0 || (allow_unit_b && cfg.b == 1.0))))
    throw ConfigError("b", "must lie in (0, 1)");
  if (!positive(cfg.c_eps)) throw ConfigError("c_eps", "must be positive");
  if (cfg.max_iters <= 0) throw ConfigError("max_iters", "must be a positive integer");
  if (cfg.metric_every <= 0) throw ConfigError("metric_every", "must be a positive integer");
  if (cfg.time_budget_s && !positive(*cfg.time_budget_s))
    throw ConfigError("time_budget_s", "must be positive");
}

const std::vector<std::string>& config_field_names() {
  static const std::vector<std::string> names = {
      "beta",  "lambda", "mu",     "q",     "batch_data", "batch_cons_w",
      "batch_cons_p", "eta_w", "eta_p", "a", "b", "c_eps",
      "max_iters", "seed", "metric_every", "time_budget_s"};
  return names;
}

namespace {
std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

std::vector<std::pair<std::string, std::string>> config_entries(const DszogConfig& cfg) {
  return {
      {"beta", format_real(cfg.beta)},
      {"lambda", format_real(cfg.lambda)},
      {"mu", cfg.mu ? format_real(*cfg.mu) : std::string("auto")},
      {"q", std::to_string(cfg.q)},
      {"batch_data", std::to_string(cfg.batch_data)},
      {"batch_cons_w", std::to_string(cfg.batch_cons_w)},
      {"batch_cons_p", std::to_string(cfg.batch_cons_p)},
      {"eta_w", format_real(cfg.eta_w)},
      {"eta_p", format_real(cfg.eta_p)},
      {"a", format_real(cfg.a)},
      {"b", format_real(cfg.b)},
      {"c_eps", format_real(cfg.c_eps)},
      {"max_iters", std::to_string(cfg.max_iters)},
      {"seed", std::to_string(cfg.seed)},
      {"metric_every", std::to_string(cfg.metric_every)},
      {"time_budget_s", cfg.time_budget_s ? format_real(*cfg.time_budget_s) : std::string("none")},
  };
}

double effective_mu(const DszogConfig& cfg, const Vector& w0) {
  if (cfg.mu) return *cfg.mu;
  return 1e-4 * std::max(1.0, w0.norm());
}

// ---------------------------------------------------------------------------

void RunRecord::append(RunRow row) {
  if (!rows_.empty()) {
    if (row.iter <= rows_.back().iter)
      throw ContractError("RunRecord: iterations must be strictly increasing");
    if (row.wall_s < rows_.back().wall_s)
      throw ContractError("RunRecord: wall time must be nondecreasing");
  }
  if (row.extra.size() != extra_names_.size())
    throw ContractError("RunRecord: extra column count mismatch");
  rows_.push_back(std::move(row));
}

}  // namespace dszog
