#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "dszog/random.hpp"
#include "dszog/simplex.hpp"
#include "support.hpp"

using namespace dszog;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double concave_objective(const Vector& p, const Vector& phi, double beta, double lambda) {
  return beta * phi.dot(p) - 0.5 * lambda * p.squaredNorm();
}

}  // namespace

TEST_CASE("projection examples") {
  CHECK((project_simplex(vec({1, 0, 0})).values() - vec({1, 0, 0})).norm() == 0.0);
  CHECK(project_simplex(vec({-7.5})).values()[0] == 1.0);
  CHECK(project_simplex(vec({42.0})).values()[0] == 1.0);
  const Vector p = project_simplex(vec({0.5, 0.5, 1.0})).values();
  CHECK((p - vec({1.0 / 6, 1.0 / 6, 2.0 / 3})).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("[0.5, 0.5, 1] agrees with a grid search over the 2-simplex") {
  // Grid oracle, independent of the enumeration oracle.
  const Vector v = vec({0.5, 0.5, 1.0});
  const int N = 600;
  double best = 1e300;
  Vector arg;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) {
      const Vector p = vec({double(i) / N, double(j) / N, double(N - i - j) / N});
      const double d = (p - v).squaredNorm();
      if (d < best) {
        best = d;
        arg = p;
      }
    }
  CHECK((arg - project_simplex(v).values()).lpNorm<Eigen::Infinity>() <= 1.0 / N);
  CHECK((testing::brute_force_simplex(v) - vec({1.0 / 6, 1.0 / 6, 2.0 / 3})).norm() <= 1e-12);
}

TEST_CASE("projection matches exhaustive active-set enumeration") {
  Rng rng = make_stream(11, 0);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_int_distribution<int> size(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector v(size(rng));
    for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    const Vector p = project_to_simplex(v);
    worst = std::max(worst, (p - testing::brute_force_simplex(v)).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("projection properties") {
  Rng rng = make_stream(12, 0);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(7);
    for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    const Vector p = project_to_simplex(v);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    CHECK((project_to_simplex(p) - p).lpNorm<Eigen::Infinity>() <= 1e-12);
    for (Index i = 0; i < v.size(); ++i)
      for (Index j = 0; j < v.size(); ++j)
        if (v[i] >= v[j]) CHECK(p[i] >= p[j]);
  }
}

TEST_CASE("projection of many large tied entries stays on the simplex") {
  Vector v = Vector::Constant(10000, 3.0);
  v.head(1000).setConstant(1.2345678e5);
  const SimplexPoint p = project_simplex(v);
  CHECK(std::abs(p.values().sum() - 1.0) <= 1e-12);
  CHECK(p.values().head(1000).minCoeff() == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(p.values().tail(9000).maxCoeff() == 0.0);
}

TEST_CASE("projection rejects nonfinite input") {
  CHECK_THROWS_AS(project_simplex(vec({1.0, std::nan("")})), NumericalError);
  CHECK_THROWS_AS(project_simplex(vec({INFINITY, 0.0})), NumericalError);
}

TEST_CASE("projection accepts expressions and float scalars") {
  const Vector a = vec({0.2, 0.9});
  const Vector p = project_to_simplex(2.0 * a);
  CHECK((p - project_to_simplex(Vector(2.0 * a))).norm() == 0.0);
  Eigen::VectorXf f(2);
  f << 3.0f, 0.0f;
  CHECK(project_to_simplex(f)[0] == 1.0f);
}

TEST_CASE("argmax_concave_p examples") {
  const Vector zero = argmax_concave_p(Vector::Zero(4), 1.0, 1e-6).values();
  CHECK((zero - Vector::Constant(4, 0.25)).norm() <= 1e-15);
  CHECK(argmax_concave_p(vec({3.0}), 2.0, 0.5).values()[0] == 1.0);
  CHECK((argmax_concave_p(vec({0, 4, 0}), 1.0, 1.0).values() - vec({0, 1, 0})).norm() == 0.0);
  CHECK_THROWS_AS(argmax_concave_p(vec({1, 2}), 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(argmax_concave_p(vec({1, 2}), 1.0, -1.0), ConfigError);
  CHECK_THROWS_AS(argmax_concave_p(vec({1, -2}), 1.0, 1.0), ContractError);
}

TEST_CASE("argmax_concave_p is the projection of beta phi / lambda") {
  Rng rng = make_stream(13, 0);
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector phi(5);
    for (Index i = 0; i < 5; ++i) phi[i] = unit(rng);
    const double beta = 0.5 + unit(rng), lambda = 0.1 + unit(rng);
    CHECK((argmax_concave_p(phi, beta, lambda).values() - project_to_simplex(beta * phi / lambda))
              .norm() <= 1e-14);
  }
}

TEST_CASE("argmax_concave_p beats a simplex grid") {
  const Vector phi = vec({0.3, 0.7, 0.55});
  const double beta = 1.0, lambda = 1.0;
  const Vector best = argmax_concave_p(phi, beta, lambda).values();
  const double f_best = concave_objective(best, phi, beta, lambda);
  const int N = 140;  // 10011 grid points
  double margin = INFINITY;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) {
      const Vector p = vec({double(i) / N, double(j) / N, double(N - i - j) / N});
      margin = std::min(margin, f_best - concave_objective(p, phi, beta, lambda));
    }
  CHECK(margin >= -1e-9);
}

TEST_CASE("categorical sampler examples") {
  Rng rng = make_stream(14, 0);
  const auto all_first = sample_categorical(CategoricalSampler(SimplexPoint(vec({1, 0, 0}))), rng, 5);
  CHECK(all_first == std::vector<Index>(5, 0));
  const auto all_second = sample_categorical(CategoricalSampler(SimplexPoint(vec({0, 1}))), rng, 3);
  CHECK(all_second == std::vector<Index>(3, 1));
}

TEST_CASE("categorical sampler invariants") {
  const CategoricalSampler s(SimplexPoint(vec({0.1, 0.0, 0.6, 0.3})));
  const auto& c = s.cumulative();
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK(std::abs(c.back() - 1.0) <= 1e-12);
  Rng rng = make_stream(15, 0);
  for (int k = 0; k < 20000; ++k) CHECK(s.sample(rng) != 1);  // zero-mass entry
}

TEST_CASE("uniform categorical frequencies") {
  Rng rng = make_stream(16, 0);
  const auto draws = sample_categorical(CategoricalSampler(SimplexPoint::uniform(4)), rng, 1000000);
  std::vector<double> freq(4, 0.0);
  for (Index j : draws) freq[static_cast<std::size_t>(j)] += 1.0;
  for (double f : freq) CHECK(std::abs(f / 1e6 - 0.25) <= 0.002);
}

TEST_CASE("skewed categorical frequencies within five standard errors") {
  const Vector p = vec({0.05, 0.15, 0.5, 0.3});
  Rng rng = make_stream(17, 0);
  const int k = 200000;
  const auto draws = sample_categorical(CategoricalSampler(SimplexPoint(p)), rng, k);
  std::vector<double> freq(4, 0.0);
  for (Index j : draws) freq[static_cast<std::size_t>(j)] += 1.0 / k;
  for (Index j = 0; j < 4; ++j) CHECK(std::abs(freq[j] - p[j]) <= 5.0 * std::sqrt(p[j] * (1 - p[j]) / k));
}

TEST_CASE("sampling without replacement") {
  Rng rng = make_stream(18, 0);
  std::vector<double> hits(10, 0.0);
  for (int trial = 0; trial < 20000; ++trial) {
    const auto idx = sample_without_replacement(10, 3, rng);
    CHECK(idx.size() == 3);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK(std::set<Index>(idx.begin(), idx.end()).size() == 3);
    for (Index i : idx) hits[static_cast<std::size_t>(i)] += 1.0;
  }
  for (double h : hits) CHECK(std::abs(h / 20000 - 0.3) <= 0.02);
  CHECK(sample_without_replacement(5, 5, rng) == std::vector<Index>{0, 1, 2, 3, 4});
  CHECK(sample_without_replacement(5, 0, rng).empty());
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a = make_stream(1, 1), b = make_stream(1, 1), c = make_stream(1, 2);
  const auto x = a(), y = b(), z = c();
  CHECK(x == y);
  CHECK(x != z);
}
