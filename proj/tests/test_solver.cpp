#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "dszog/baselines.hpp"
#include "dszog/simplex.hpp"
#include "dszog/solver.hpp"
#include "support.hpp"

using namespace dszog;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

// Every column except wall_s.
bool same_rows(const RunRecord& a, const RunRecord& b) {
  if (a.rows().size() != b.rows().size()) return false;
  for (std::size_t k = 0; k < a.rows().size(); ++k) {
    const RunRow& x = a.rows()[k];
    const RunRow& y = b.rows()[k];
    if (x.iter != y.iter || x.objective != y.objective || x.penalty != y.penalty ||
        x.max_violation != y.max_violation || x.sum_sq_violation != y.sum_sq_violation ||
        x.step_norm_w != y.step_norm_w || x.ema_norm_w != y.ema_norm_w || x.ema_norm_p != y.ema_norm_p ||
        x.extra != y.extra)
      return false;
  }
  return true;
}

StationarityOptions cheap_stationarity() {
  StationarityOptions o;
  o.estimate_gradients = false;
  return o;
}

SolveHooks cheap_hooks() {
  SolveHooks h;
  h.stationarity = cheap_stationarity();
  return h;
}

// Heavily constrained toy: min |w - 2|^2 s.t. w_{j mod d} <= 1 + j / m.
BlackBoxProblem bounded_problem(Index d, Index m) {
  return BlackBoxProblem(
      d, 4, m, [](Index i, const Vector& w) { return (w.array() - 2.0 - 0.01 * double(i)).square().sum(); },
      [d, m](Index j, const Vector& w) { return w[j % d] - 1.0 - double(j) / double(m); });
}

}  // namespace

TEST_CASE("adaptive_step examples") {
  CHECK(adaptive_step(Vector::Zero(3), 0.5, 1e-8).norm() == 0.0);
  const Vector unit = vec({0.6, 0.8});
  CHECK((adaptive_step(unit, 0.3, 1e-300) - 0.3 * unit).norm() <= 1e-15);
  CHECK((adaptive_step(vec({4.0, 0.0}), 1.0, 0.0) - vec({2.0, 0.0})).norm() == 0.0);
}

TEST_CASE("ema_update examples") {
  const Vector fresh = vec({1.5, -2.0});
  CHECK(same_bits(ema_update(vec({9.0, 9.0}), fresh, 1.0), fresh));
  CHECK(ema_update(vec({2.0}), vec({0.0}), 0.5)[0] == 1.0);
  CHECK_THROWS_AS(ema_update(vec({1.0}), vec({1.0, 2.0}), 0.5), ContractError);

  Vector z = vec({10.0, -10.0});
  const Vector g = vec({1.0, 1.0});
  double gap = (z - g).norm();
  for (int t = 0; t < 50; ++t) {
    z = ema_update(z, g, 0.2);
    const double next = (z - g).norm();
    CHECK(next == doctest::Approx(0.8 * gap).epsilon(1e-9));
    gap = next;
  }
}

TEST_CASE("one-dimensional problem converges") {
  auto problem = testing::one_dim_problem();
  DszogConfig cfg;
  cfg.beta = 1000.0;
  cfg.eta_w = 1e-3;
  cfg.eta_p = 1e-3;
  cfg.mu = 1e-4;
  cfg.max_iters = 50000;
  cfg.metric_every = 10000;
  const auto out = dszog_solve(problem, cfg, Vector::Zero(1), cheap_hooks());
  CHECK(out.termination == Termination::MaxIters);
  CHECK(std::abs(out.final_w[0] - 1.0) <= 1e-2);
  CHECK(out.record.rows().back().sum_sq_violation <= 1e-3);
  CHECK(out.stationarity.eps2_sq <= 1e-3);
}

TEST_CASE("quadratic penalty settles at beta / (1 + beta) on the 1-D problem") {
  // min w^2 + beta max(1 - w, 0)^2 has its minimizer at beta / (1 + beta).
  auto problem = testing::one_dim_problem();
  DszogConfig cfg;
  cfg.beta = 10.0;
  cfg.eta_w = 1e-3;
  cfg.eta_p = 1e-3;
  cfg.mu = 1e-4;
  cfg.max_iters = 30000;
  cfg.metric_every = 10000;
  const auto out = dszog_solve(problem, cfg, Vector::Zero(1), cheap_hooks());
  CHECK(std::abs(out.final_w[0] - 10.0 / 11.0) <= 1e-2);
}

TEST_CASE("a = 1 matches the uninterpolated update bitwise") {
  auto problem = bounded_problem(3, 40);
  DszogConfig cfg;
  cfg.a = 1.0;
  cfg.beta = 5.0;
  cfg.max_iters = 60;
  cfg.metric_every = 10;
  cfg.batch_data = 2;
  cfg.batch_cons_w = 8;
  cfg.batch_cons_p = 8;
  cfg.seed = 9;
  const Vector w0 = vec({0.1, -0.3, 0.2});
  const auto a = detail::penalty_gda_loop(problem, cfg, w0, cheap_hooks(), {});
  const auto b = detail::penalty_gda_loop(problem, cfg, w0, cheap_hooks(),
                                          {.full_batch = false, .interpolate_p = false, .momentum = true});
  CHECK(same_bits(a.final_w, b.final_w));
  CHECK(same_bits(a.final_p.values(), b.final_p.values()));
  CHECK(same_rows(a.record, b.record));
}

TEST_CASE("b = 1 matches the momentum-free update") {
  auto problem = bounded_problem(3, 40);
  DszogConfig cfg;
  cfg.b = 1.0;
  cfg.max_iters = 10;
  cfg.metric_every = 1;
  cfg.batch_data = 3;
  cfg.batch_cons_w = 5;
  cfg.batch_cons_p = 6;
  cfg.seed = 10;
  const Vector w0 = vec({0.5, 0.5, 0.5});
  const auto a = detail::penalty_gda_loop(problem, cfg, w0, cheap_hooks(), {});
  const auto b = detail::penalty_gda_loop(problem, cfg, w0, cheap_hooks(),
                                          {.full_batch = false, .interpolate_p = true, .momentum = false});
  CHECK(a.final_w == b.final_w);
  CHECK(a.final_p.values() == b.final_p.values());
  CHECK(same_rows(a.record, b.record));
}

TEST_CASE("single constraint: full-batch GDA and DSZOG with a = b = 1 coincide") {
  auto problem = BlackBoxProblem(
      2, 1, 1, [](Index, const Vector& w) { return (w - vec({2.0, -1.0})).squaredNorm(); },
      [](Index, const Vector& w) { return w[0] + w[1] - 0.5; });
  DszogConfig cfg;
  cfg.a = 1.0;
  cfg.b = 1.0;
  cfg.batch_cons_w = 1;
  cfg.batch_cons_p = 1;
  cfg.max_iters = 200;
  cfg.metric_every = 20;
  cfg.seed = 3;
  const Vector w0 = vec({0.0, 0.0});
  const auto sampled = detail::penalty_gda_loop(problem, cfg, w0, cheap_hooks(), {});
  DszogConfig gda_cfg = cfg;
  gda_cfg.b = 0.5;  // full_batch_gda_solve validates the public range, then forces b = 1
  const auto full = full_batch_gda_solve(problem, gda_cfg, w0, cheap_hooks());
  CHECK(same_bits(sampled.final_w, full.final_w));
  CHECK(same_rows(sampled.record, full.record));
}

TEST_CASE("oracle budget of DSZOG is independent of m") {
  for (Index m : {50, 500, 5000}) {
    auto problem = testing::counting_stub(3, 20, m);
    DszogConfig cfg;
    cfg.q = 4;
    cfg.batch_data = 5;
    cfg.batch_cons_w = 7;
    cfg.batch_cons_p = 6;
    cfg.max_iters = 25;
    cfg.metric_every = 1000;
    const auto out = dszog_solve(problem, cfg, Vector::Zero(3), cheap_hooks());
    const std::uint64_t T = 25, q1 = 5;
    // Initial sweep for p_1, then T + 1 estimator calls (line 3 and one per iteration).
    CHECK(out.algorithm_calls.constraint == std::uint64_t(m) + (T + 1) * (7 * q1 + 6));
    CHECK(out.algorithm_calls.objective == (T + 1) * 5 * q1);
    CHECK(problem.constraint_calls() == out.algorithm_calls.constraint + out.diagnostic_calls.constraint);
    CHECK(problem.objective_calls() == out.algorithm_calls.objective + out.diagnostic_calls.objective);
  }
}

TEST_CASE("oracle budget of full-batch GDA is linear in m") {
  for (Index m : {10, 100}) {
    auto problem = testing::counting_stub(2, 6, m);
    DszogConfig cfg;
    cfg.q = 3;
    cfg.max_iters = 4;
    cfg.metric_every = 1000;
    const auto out = full_batch_gda_solve(problem, cfg, Vector::Zero(2), cheap_hooks());
    const std::uint64_t T = 4, q1 = 4, n = 6, M = std::uint64_t(m);
    CHECK(out.algorithm_calls.objective == (T + 1) * n * q1);
    CHECK(out.algorithm_calls.constraint == M + (T + 1) * (M * q1 + M));
    CHECK(problem.constraint_calls() == out.algorithm_calls.constraint + out.diagnostic_calls.constraint);
  }
}

TEST_CASE("runs are deterministic") {
  auto problem = bounded_problem(4, 300);
  DszogConfig cfg;
  cfg.max_iters = 300;
  cfg.metric_every = 50;
  cfg.seed = 77;
  const Vector w0 = Vector::Constant(4, 0.1);
  const auto a = dszog_solve(problem, cfg, w0);
  const auto b = dszog_solve(problem, cfg, w0);
  CHECK(same_bits(a.final_w, b.final_w));
  CHECK(same_bits(a.final_p.values(), b.final_p.values()));
  CHECK(same_rows(a.record, b.record));
  CHECK(a.stationarity.eps1_sq == b.stationarity.eps1_sq);
  cfg.seed = 78;
  const auto c = dszog_solve(problem, cfg, w0);
  CHECK(!same_bits(a.final_w, c.final_w));
}

TEST_CASE("record cadence and hooks") {
  auto problem = bounded_problem(2, 10);
  DszogConfig cfg;
  cfg.max_iters = 25;
  cfg.metric_every = 10;
  SolveHooks hooks = cheap_hooks();
  std::vector<std::int64_t> seen;
  hooks.on_row = [&](const RunRow& r) { seen.push_back(r.iter); };
  hooks.extra_names = {"w0"};
  hooks.extra_metrics = [](const Vector& w) { return std::vector<double>{w[0]}; };
  const auto out = dszog_solve(problem, cfg, Vector::Zero(2), hooks);
  CHECK(seen == std::vector<std::int64_t>{0, 10, 20, 25});
  CHECK(out.record.rows().back().extra[0] == out.final_w[0]);
  CHECK(out.record.extra_names() == std::vector<std::string>{"w0"});
  for (std::size_t k = 1; k < out.record.rows().size(); ++k)
    CHECK(out.record.rows()[k].wall_s >= out.record.rows()[k - 1].wall_s);
  CHECK(std::abs(out.final_p.values().sum() - 1.0) <= 1e-12);
}

TEST_CASE("nonfinite oracle values abort the run") {
  auto problem = BlackBoxProblem(
      1, 1, 1, [](Index, const Vector& w) { return w[0] > 0.05 ? std::nan("") : -w[0]; },
      [](Index, const Vector& w) { return w[0] - 10.0; });
  DszogConfig cfg;
  cfg.eta_w = 1e-2;
  cfg.max_iters = 10000;
  const auto out = dszog_solve(problem, cfg, Vector::Zero(1), cheap_hooks());
  CHECK(out.termination == Termination::NumericalAbort);
  CHECK(!out.abort_reason.empty());
  CHECK(out.final_w.allFinite());
  CHECK(out.iterations < 10000);
}

TEST_CASE("time budget stops the run") {
  auto problem = bounded_problem(5, 1000);
  DszogConfig cfg;
  cfg.max_iters = 100000000;
  cfg.metric_every = 1000000;
  cfg.time_budget_s = 0.2;
  const auto out = dszog_solve(problem, cfg, Vector::Zero(5), cheap_hooks());
  CHECK(out.termination == Termination::TimeBudget);
  CHECK(out.record.rows().back().wall_s >= 0.2);
  CHECK(out.record.rows().back().wall_s < 5.0);
}

TEST_CASE("solver rejects bad input before the loop") {
  auto problem = testing::one_dim_problem();
  DszogConfig cfg;
  cfg.b = 1.0;
  CHECK_THROWS_AS(dszog_solve(problem, cfg, Vector::Zero(1)), ConfigError);
  CHECK_THROWS_AS(dszog_solve(problem, DszogConfig{}, Vector::Zero(2)), ConfigError);
  CHECK_THROWS_AS(dszog_solve(problem, DszogConfig{}, vec({INFINITY})), ConfigError);
  CHECK(problem.objective_calls() == 0);
}

TEST_CASE("full-batch GDA converges on the 1-D problem") {
  auto problem = testing::one_dim_problem();
  DszogConfig cfg;
  cfg.beta = 1000.0;
  cfg.eta_w = 1e-3;
  cfg.eta_p = 1e-3;
  cfg.mu = 1e-4;
  cfg.max_iters = 20000;
  cfg.metric_every = 5000;
  const auto out = full_batch_gda_solve(problem, cfg, Vector::Zero(1), cheap_hooks());
  CHECK(std::abs(out.final_w[0] - 1.0) <= 1e-2);
}

TEST_CASE("feasible sets") {
  const FeasibleSet box = FeasibleSet::box(3, 0.0, 1.0);
  CHECK((box.project(vec({-0.5, 0.3, 2.0})) - vec({0.0, 0.3, 1.0})).norm() == 0.0);
  CHECK(box.contains(vec({0.0, 1.0, 0.5})));
  CHECK(!box.contains(vec({0.0, 1.1, 0.5})));
  const FeasibleSet simplex = FeasibleSet::simplex();
  CHECK(simplex.contains(simplex.project(vec({3.0, -1.0, 0.2})), 1e-12));
  CHECK_THROWS_AS(FeasibleSet::parse("ball", 3, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(FeasibleSet::box(vec({1.0}), vec({0.0})), ConfigError);
  CHECK(FeasibleSet::parse("simplex", 3, 0, 0).kind == FeasibleSet::Kind::Simplex);
}

TEST_CASE("zopsgd on a box converges to the projected optimum") {
  auto problem = BlackBoxProblem(
      1, 1, 1, [](Index, const Vector& w) { return w[0] * w[0]; }, [](Index, const Vector&) { return -1.0; });
  DszogConfig cfg;
  cfg.eta_w = 1e-2;
  cfg.max_iters = 2000;
  cfg.metric_every = 500;
  const auto out = zopsgd_solve(problem, FeasibleSet::box(1, 1.0, 2.0), cfg, vec({1.7}), cheap_hooks());
  CHECK(std::abs(out.final_w[0] - 1.0) <= 1e-6);
  // The method never queries constraints; diagnostics do.
  CHECK(out.algorithm_calls.constraint == 0);
}

TEST_CASE("zopsgd iterates stay in the set") {
  auto problem = BlackBoxProblem(
      4, 3, 2, [](Index i, const Vector& w) { return (w.array() - double(i)).square().sum(); },
      [](Index, const Vector& w) { return w.sum(); });
  DszogConfig cfg;
  cfg.eta_w = 0.1;
  cfg.max_iters = 40;
  cfg.metric_every = 1;
  const FeasibleSet simplex = FeasibleSet::simplex();
  SolveHooks hooks = cheap_hooks();
  hooks.extra_names = {"in_set"};
  hooks.extra_metrics = [&](const Vector& w) { return std::vector<double>{simplex.contains(w, 1e-12) ? 1.0 : 0.0}; };
  const auto out = zopsgd_solve(problem, simplex, cfg, vec({5.0, 0.0, 0.0, 0.0}), hooks);
  for (const auto& row : out.record.rows()) CHECK(row.extra[0] == 1.0);
  const FeasibleSet box = FeasibleSet::box(4, -0.1, 0.1);
  hooks.extra_metrics = [&](const Vector& w) { return std::vector<double>{box.contains(w) ? 1.0 : 0.0}; };
  const auto out_box = zopsgd_solve(problem, box, cfg, Vector::Zero(4), hooks);
  for (const auto& row : out_box.record.rows()) CHECK(row.extra[0] == 1.0);
  CHECK_THROWS_AS(zopsgd_solve(problem, FeasibleSet::box(2, 0.0, 1.0), cfg, Vector::Zero(4)), ConfigError);
}
