#pragma once

// Independent oracles and small fixtures shared by the unit tests.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dszog/core.hpp"
#include "dszog/problems.hpp"

namespace testing {

using dszog::Index;
using dszog::Vector;

// Euclidean projection onto the simplex by enumerating every support set:
// on support S the KKT point is v_S - (sum v_S - 1)/|S|; keep the
// nonnegative candidate closest to v.
inline Vector brute_force_simplex(const Vector& v) {
  const Index m = v.size();
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (Index i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        sum += v[i];
        ++count;
      }
    const double shift = (sum - 1.0) / count;
    Vector p = Vector::Zero(m);
    bool ok = true;
    for (Index i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        p[i] = v[i] - shift;
        if (p[i] < -1e-15) ok = false;
      }
    if (!ok) continue;
    const double dist = (p - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

// d-dimensional problem whose oracles are given lambdas.
template <typename Obj, typename Cons>
dszog::BlackBoxProblem make_problem(Index d, Index n, Index m, Obj obj, Cons cons) {
  return dszog::BlackBoxProblem(d, n, m, obj, cons);
}

// min (1/n) sum_i |w - c_i|^2 s.t. f_j(w) = w_0 - j / m <= 0 (cheap stub for
// call counting; values do not matter).
inline dszog::BlackBoxProblem counting_stub(Index d, Index n, Index m) {
  return dszog::BlackBoxProblem(
      d, n, m,
      [](Index i, const Vector& w) { return (w.array() - static_cast<double>(i)).square().sum(); },
      [m](Index j, const Vector& w) { return w[0] - static_cast<double>(j) / static_cast<double>(m); });
}

// 1-D problem min w^2 s.t. 1 - w <= 0.
inline dszog::BlackBoxProblem one_dim_problem() {
  return dszog::BlackBoxProblem(
      1, 1, 1, [](Index, const Vector& w) { return w[0] * w[0]; },
      [](Index, const Vector& w) { return 1.0 - w[0]; });
}

// Writer used only by tests: labels as +1/-1, nonzeros with 17 significant
// digits so the parser round-trips exactly.
inline std::string to_sparse_text(const dszog::Dataset& data) {
  std::ostringstream os;
  os.precision(17);
  for (Index i = 0; i < data.rows(); ++i) {
    os << (data.labels[i] > 0 ? "+1" : "-1");
    for (Index j = 0; j < data.dim(); ++j)
      if (data.features(i, j) != 0.0) os << ' ' << (j + 1) << ':' << data.features(i, j);
    os << '\n';
  }
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testing
