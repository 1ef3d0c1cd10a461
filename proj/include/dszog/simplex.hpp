#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "dszog/core.hpp"
#include "dszog/random.hpp"

namespace dszog {

/// Euclidean projection of `v` onto the probability simplex
/// { p : p >= 0, sum(p) = 1 }, by sorting and thresholding:
///
///     theta = (sum_{i<=k} u_i - 1) / k,  k = max{ j : u_j > (sum_{i<=j} u_i - 1) / j },
///     p = max(v - theta, 0),
///
/// with u the entries of v sorted in decreasing order. O(m log m).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_to_simplex(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index m = v.size();
  if (m == 0) throw ContractError("project_to_simplex: empty input");
  if (!v.allFinite()) throw NumericalError("project_to_simplex: nonfinite input");

  std::vector<Scalar> sorted(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) sorted[static_cast<std::size_t>(i)] = v(i);
  std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());

  Scalar running = 0;
  Scalar theta = sorted.front() - Scalar(1);
  for (Index j = 0; j < m; ++j) {
    running += sorted[static_cast<std::size_t>(j)];
    const Scalar t = (running - Scalar(1)) / static_cast<Scalar>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] > t) theta = t;
    else break;
  }
  // The running sum loses digits when the entries are large and many; a few
  // Newton steps on sum(max(v - theta, 0)) = 1 recover them.
  for (int step = 0; step < 3; ++step) {
    Scalar excess = -Scalar(1);
    Index support = 0;
    for (Index i = 0; i < m; ++i)
      if (v(i) > theta) {
        excess += v(i) - theta;
        ++support;
      }
    if (support == 0 || excess == Scalar(0)) break;
    theta += excess / static_cast<Scalar>(support);
  }
  Out p = (v.array() - theta).cwiseMax(Scalar(0)).matrix();
  // Large tied entries can leave the sum off by more than theta's spacing
  // allows to fix; rescale onto the simplex.
  const Scalar total = p.sum();
  if (total > Scalar(0)) p /= total;
  return p;
}

/// project_to_simplex wrapped as a validated SimplexPoint.
SimplexPoint project_simplex(const Vector& v);

/// Closed-form maximizer over the simplex of
///     beta * <p, phi> - (lambda / 2) |p|^2,
/// i.e. project_simplex(beta * phi / lambda). Throws ConfigError if
/// lambda <= 0 and ContractError for negative or nonfinite phi.
SimplexPoint argmax_concave_p(const Vector& phi, double beta, double lambda);

/// Inverse-CDF sampler over a fixed probability vector.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const SimplexPoint& p);

  /// One index in [0, m), drawn with probability p_j.
  Index sample(Rng& rng) const;

  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  Index size() const noexcept { return static_cast<Index>(cumulative_.size()); }

 private:
  std::vector<double> cumulative_;
};

/// k i.i.d. draws (with replacement), returned in draw order.
std::vector<Index> sample_categorical(const CategoricalSampler& sampler, Rng& rng, Index k);

}  // namespace dszog
