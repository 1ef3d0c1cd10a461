#include "dszog/simplex.hpp"

#include <unordered_set>

namespace dszog {

std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  if (k < 0 || k > n) throw ContractError("sample_without_replacement: need 0 <= k <= n");
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  if (k == n) {
    for (Index i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::unordered_set<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(k) * 2);
  for (Index j = n - k; j < n; ++j) {
    std::uniform_int_distribution<Index> pick(0, j);
    const Index t = pick(rng);
    if (chosen.insert(t).second) out.push_back(t);
    else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SimplexPoint project_simplex(const Vector& v) { return SimplexPoint(project_to_simplex(v)); }

SimplexPoint argmax_concave_p(const Vector& phi, double beta, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("lambda", "must be positive");
  if (phi.size() == 0) throw ContractError("argmax_concave_p: empty phi");
  if (!phi.allFinite()) throw NumericalError("argmax_concave_p: nonfinite phi");
  if (phi.minCoeff() < 0.0) throw ContractError("argmax_concave_p: phi must be nonnegative");
  return project_simplex((beta / lambda) * phi);
}

CategoricalSampler::CategoricalSampler(const SimplexPoint& p) {
  const Vector& v = p.values();
  cumulative_.resize(static_cast<std::size_t>(v.size()));
  double acc = 0.0;
  for (Index j = 0; j < v.size(); ++j) {
    acc += v[j];
    cumulative_[static_cast<std::size_t>(j)] = acc;
  }
}

Index CategoricalSampler::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double target = unit(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  // upper_bound never lands on a zero-mass entry unless target hits the
  // right edge exactly; walk back to the last index with positive mass.
  Index j = static_cast<Index>(it - cumulative_.begin());
  while (j > 0 && cumulative_[static_cast<std::size_t>(j)] == cumulative_[static_cast<std::size_t>(j - 1)])
    --j;
  return j;
}

std::vector<Index> sample_categorical(const CategoricalSampler& sampler, Rng& rng, Index k) {
  if (k <= 0) throw ContractError("sample_categorical: k must be positive");
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) out.push_back(sampler.sample(rng));
  return out;
}

}  // namespace dszog
