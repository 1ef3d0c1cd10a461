#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dszog/core.hpp"
#include "support.hpp"

using namespace dszog;

namespace {

std::string rejected_field(const DszogConfig& cfg) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("validate_config accepts in-range settings") {
  DszogConfig cfg;
  cfg.b = 0.5;
  cfg.a = 0.9;
  cfg.lambda = 1e-6;
  CHECK_NOTHROW(validate_config(cfg));
  cfg.a = 1.0;
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("validate_config names the offending field") {
  DszogConfig cfg;
  auto with = [&](auto mutate) {
    DszogConfig c = cfg;
    mutate(c);
    return rejected_field(c);
  };
  CHECK(with([](DszogConfig& c) { c.b = 1.0; }) == "b");
  CHECK(with([](DszogConfig& c) { c.b = 0.0; }) == "b");
  CHECK(with([](DszogConfig& c) { c.mu = 0.0; }) == "mu");
  CHECK(with([](DszogConfig& c) { c.beta = -1.0; }) == "beta");
  CHECK(with([](DszogConfig& c) { c.lambda = 0.0; }) == "lambda");
  CHECK(with([](DszogConfig& c) { c.q = 0; }) == "q");
  CHECK(with([](DszogConfig& c) { c.batch_data = 0; }) == "batch_data");
  CHECK(with([](DszogConfig& c) { c.batch_cons_w = -3; }) == "batch_cons_w");
  CHECK(with([](DszogConfig& c) { c.batch_cons_p = 0; }) == "batch_cons_p");
  CHECK(with([](DszogConfig& c) { c.eta_w = 0.0; }) == "eta_w");
  CHECK(with([](DszogConfig& c) { c.eta_p = std::nan(""); }) == "eta_p");
  CHECK(with([](DszogConfig& c) { c.a = 0.0; }) == "a");
  CHECK(with([](DszogConfig& c) { c.a = 1.5; }) == "a");
  CHECK(with([](DszogConfig& c) { c.c_eps = 0.0; }) == "c_eps");
  CHECK(with([](DszogConfig& c) { c.max_iters = 0; }) == "max_iters");
  CHECK(with([](DszogConfig& c) { c.metric_every = 0; }) == "metric_every");
  CHECK(with([](DszogConfig& c) { c.time_budget_s = -1.0; }) == "time_budget_s");
}

TEST_CASE("unit EMA weight is only admitted by the internal validator") {
  DszogConfig cfg;
  cfg.b = 1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  CHECK_NOTHROW(detail::validate_config(cfg, true));
}

TEST_CASE("config_entries lists every field exactly once") {
  const auto entries = config_entries(DszogConfig{});
  std::vector<std::string> keys;
  for (const auto& kv : entries) keys.push_back(kv.first);
  CHECK(keys == config_field_names());
  CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
}

TEST_CASE("effective_mu scales with the start point") {
  DszogConfig cfg;
  CHECK(effective_mu(cfg, Vector::Zero(3)) == doctest::Approx(1e-4));
  CHECK(effective_mu(cfg, Vector::Constant(4, 5.0)) == doctest::Approx(1e-3));
  cfg.mu = 0.25;
  CHECK(effective_mu(cfg, Vector::Constant(4, 5.0)) == 0.25);
}

TEST_CASE("SimplexPoint keeps its invariants") {
  Vector v(3);
  v << 0.2, 0.3, 0.5;
  const SimplexPoint p(v);
  CHECK(std::abs(p.values().sum() - 1.0) <= 1e-12);

  v << 0.5, 0.5 + 1e-11, -1e-11;  // rounding noise is absorbed
  const SimplexPoint q(v);
  CHECK(q.values().minCoeff() >= 0.0);
  CHECK(q.values().maxCoeff() <= 1.0);
  CHECK(std::abs(q.values().sum() - 1.0) <= 1e-12);

  v << 0.6, 0.6, -0.2;
  CHECK_THROWS_AS(SimplexPoint{v}, ContractError);
  v << 0.2, 0.2, 0.2;
  CHECK_THROWS_AS(SimplexPoint{v}, ContractError);
  CHECK_THROWS_AS(SimplexPoint{Vector()}, ContractError);
  v << 0.5, std::nan(""), 0.5;
  CHECK_THROWS_AS(SimplexPoint{v}, ContractError);

  const SimplexPoint u = SimplexPoint::uniform(4);
  CHECK(u[2] == 0.25);
}

TEST_CASE("BlackBoxProblem counts every oracle call once") {
  auto problem = testing::counting_stub(2, 3, 5);
  const Vector w = Vector::Zero(2);
  CHECK(problem.objective_calls() == 0);
  for (int k = 0; k < 7; ++k) problem.objective_component(k % 3, w);
  for (int k = 0; k < 4; ++k) problem.constraint(k, w);
  CHECK(problem.objective_calls() == 7);
  CHECK(problem.constraint_calls() == 4);

  CHECK_THROWS_AS(problem.objective_component(3, w), ContractError);
  CHECK_THROWS_AS(problem.constraint(-1, w), ContractError);
  CHECK_THROWS_AS(problem.constraint(0, Vector::Zero(3)), ContractError);
  // Rejected calls are not counted.
  CHECK(problem.objective_calls() == 7);
  CHECK(problem.constraint_calls() == 4);

  // Pure oracles: identical inputs give identical values.
  const Vector x = Vector::Constant(2, 0.3);
  CHECK(problem.constraint(2, x) == problem.constraint(2, x));
}

TEST_CASE("BlackBoxProblem rejects invalid shapes") {
  auto f = [](Index, const Vector&) { return 0.0; };
  CHECK_THROWS_AS(BlackBoxProblem(0, 1, 1, f, f), ContractError);
  CHECK_THROWS_AS(BlackBoxProblem(1, 0, 1, f, f), ContractError);
  CHECK_THROWS_AS(BlackBoxProblem(1, 1, 0, f, f), ContractError);
  CHECK_THROWS_AS(BlackBoxProblem(1, 1, 1, ScalarOracle{}, f), ContractError);
}

TEST_CASE("RunRecord enforces ordering") {
  RunRecord rec({"acc"});
  RunRow row;
  row.iter = 0;
  row.extra = {0.5};
  rec.append(row);
  row.iter = 5;
  row.wall_s = 1.0;
  rec.append(row);

  RunRow same = row;
  CHECK_THROWS_AS(rec.append(same), ContractError);
  RunRow earlier = row;
  earlier.iter = 6;
  earlier.wall_s = 0.5;
  CHECK_THROWS_AS(rec.append(earlier), ContractError);
  RunRow wrong_width = row;
  wrong_width.iter = 7;
  wrong_width.extra = {};
  CHECK_THROWS_AS(rec.append(wrong_width), ContractError);
  CHECK(rec.rows().size() == 2);
}

TEST_CASE("OracleCalls arithmetic") {
  OracleCalls a{3, 4};
  a += OracleCalls{1, 2};
  CHECK(a == OracleCalls{4, 6});
  CHECK(a.total() == 10);
}
