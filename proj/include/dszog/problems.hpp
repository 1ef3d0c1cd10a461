#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dszog/core.hpp"

namespace dszog {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Labelled rows, optionally with binary sensitive attributes.
struct Dataset {
  RowMatrix features;                 ///< n x d
  Vector labels;                      ///< n entries in {-1, +1}
  std::optional<RowMatrix> sensitive; ///< n x r entries in {0, 1}

  Index rows() const noexcept { return features.rows(); }
  Index dim() const noexcept { return features.cols(); }

  /// Throws DataError unless row counts agree, labels are +-1 and
  /// sensitive entries are 0/1.
  void validate() const;

  /// Rows `idx` (in the given order).
  Dataset select(const std::vector<Index>& idx) const;

  Index count_label(double y) const;
};

struct SplitSpec {
  double train = 0.5;
  double test = 0.3;
  double validation = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  Dataset train;
  Dataset test;
  Dataset validation;
};

/// Seeded shuffle, then contiguous train/test/validation blocks. Sizes are
/// round(train * n), round(test * n) and the remainder.
Split split(const Dataset& data, const SplitSpec& spec);

/// Fraction of rows with sign(x'w) == y, sign(0) taken as +1.
double accuracy(const Vector& w, const Dataset& data);

/// Linear classification with pairwise ranking constraints.
///
/// Objective components: l_i(w) = c^2 (1 - exp(-(y_i - x_i'w)^2 / c^2)).
/// Constraints: one per (positive, negative) pair,
///     f_k(w) = x_neg[j]'w - x_pos[i]'w,   k = i * n_neg + j,
/// with positives and negatives numbered in row order. m = n_pos * n_neg;
/// nothing of size m is stored. Throws DataError unless both classes occur.
BlackBoxProblem build_pairwise_problem(const Dataset& data, double c_loss = 1.0);

enum class FairnessLoss { Hinge };

/// Linear classification with covariance-type fairness constraints.
///
/// Objective components: hinge loss max(1 - y_i x_i'w, 0).
/// For each sensitive column s and each decision-boundary function
///     g_0(y, x) = min(0, (1 + y)/2 * y * x'w),
///     g_1(y, x) = min(0, (1 - y)/2 * x'w),
/// the covariance cov_{s,k}(w) = (1/n) sum_i (z_is - zbar_s) g_k(y_i, x_i)
/// yields the pair of constraints
///     f_{2t}(w)   =  cov - c_cov <= 0,
///     f_{2t+1}(w) = -cov - c_cov <= 0,     t = 2 s + k,
/// so m = 4 r. Each constraint call is one pass over the n rows.
BlackBoxProblem build_fairness_problem(const Dataset& data, double c_cov = 1e-3,
                                       FairnessLoss loss = FairnessLoss::Hinge);

/// A test problem with a known solution.
struct AnalyticCase {
  std::string name;
  BlackBoxProblem problem;
  Vector optimum;
  double tolerance = 1e-2;
};

/// Minimizer of |w - center|^2 subject to A w <= b, by enumerating every
/// active set of at most d rows and keeping the feasible KKT point with
/// nonnegative multipliers. Exponential in the row count; meant for d <= 4,
/// k <= 6. Throws DataError if no active set qualifies.
Vector halfspace_projection_by_enumeration(const Vector& center, const Eigen::MatrixXd& A,
                                           const Vector& b);

/// The analytic suite:
///   "a"  min w^2 s.t. 1 - w <= 0                         (d = 1, w* = 1)
///   "b"  min |w - c|^2 s.t. k random half-spaces          (d = 3, k = 5, w* by enumeration)
///   "c"  min |w|^2 s.t. w_{j mod d} >= 1/m, m = 10^4      (d = 10, w* = 1/m)
///   "d"  as "c" with coordinate bounds 1 + i/d replicated at lower levels,
///        so only d of the m constraints are active        (d = 10, m = 10^4)
std::vector<AnalyticCase> build_analytic_suite(std::uint64_t seed = 7);

/// Parameters of the synthetic fairness generator.
struct FairnessDataSpec {
  Index n = 2000;
  Index d = 100;
  Index r = 10;
  double rho = 0.6;         ///< label/sensitive correlation
  double separation = 1.5;  ///< class-mean distance along the hidden separator
  std::uint64_t seed = 0;
};

/// Two Gaussian classes (y = +-1 with equal probability) shifted by
/// +-separation along a random unit direction. r randomly chosen columns are
/// replaced by binary sensitive bits with P(z = 1 | y) = (1 + rho * y) / 2;
/// the same bits are returned as the sensitive matrix. Throws ConfigError if
/// r > d.
Dataset generate_fairness_dataset(const FairnessDataSpec& spec);

inline Dataset generate_fairness_dataset(Index n, Index d, Index r, std::uint64_t seed) {
  return generate_fairness_dataset(FairnessDataSpec{n, d, r, 0.6, 1.5, seed});
}

/// Covariance values cov_{s,k}(w) in constraint order t = 2 s + k.
Vector fairness_covariances(const Dataset& data, const Vector& w);

/// Largest delta such that every w with |w|_inf <= delta satisfies all
/// fairness constraints of `data`:
///     delta = c_cov / max_s (1/n) sum_i |z_is - zbar_s| |x_i|_1,
/// since |g_k(y_i, x_i)| <= |x_i'w| <= |x_i|_1 |w|_inf.
double fairness_box_radius(const Dataset& data, double c_cov);

}  // namespace dszog
