#include "dszog/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "dszog/random.hpp"

namespace dszog {

void Dataset::validate() const {
  if (labels.size() != features.rows())
    throw DataError("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                    std::to_string(labels.size()) + " labels");
  for (Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw DataError("dataset: label at row " + std::to_string(i) + " is not +-1");
  if (sensitive) {
    if (sensitive->rows() != features.rows())
      throw DataError("dataset: sensitive matrix row count differs from features");
    if (((sensitive->array() != 0.0) && (sensitive->array() != 1.0)).any())
      throw DataError("dataset: sensitive entries must be 0 or 1");
  }
}

Dataset Dataset::select(const std::vector<Index>& idx) const {
  Dataset out;
  out.features.resize(static_cast<Index>(idx.size()), dim());
  out.labels.resize(static_cast<Index>(idx.size()));
  if (sensitive) out.sensitive = RowMatrix(static_cast<Index>(idx.size()), sensitive->cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto row = static_cast<Index>(r);
    out.features.row(row) = features.row(idx[r]);
    out.labels[row] = labels[idx[r]];
    if (sensitive) out.sensitive->row(row) = sensitive->row(idx[r]);
  }
  return out;
}

Index Dataset::count_label(double y) const { return (labels.array() == y).count(); }

void SplitSpec::validate() const {
  if (!(train > 0.0)) throw ConfigError("split.train", "must be positive");
  if (!(test > 0.0)) throw ConfigError("split.test", "must be positive");
  if (!(validation > 0.0)) throw ConfigError("split.validation", "must be positive");
  if (std::abs(train + test + validation - 1.0) > 1e-9)
    throw ConfigError("split", "fractions must sum to 1");
}

Split split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  const Index n = data.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = make_stream(spec.seed, 0x5b1);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<Index>(std::llround(spec.train * static_cast<double>(n)));
  const auto n_test = std::min<Index>(static_cast<Index>(std::llround(spec.test * static_cast<double>(n))),
                                      n - n_train);
  auto slice = [&](Index from, Index to) {
    return data.select(std::vector<Index>(order.begin() + from, order.begin() + to));
  };
  return {slice(0, n_train), slice(n_train, n_train + n_test), slice(n_train + n_test, n)};
}

double accuracy(const Vector& w, const Dataset& data) {
  if (data.rows() == 0) return 0.0;
  if (w.size() != data.dim()) throw ContractError("accuracy: dimension mismatch");
  const Vector scores = data.features * w;
  Index correct = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    const double predicted = scores[i] >= 0.0 ? 1.0 : -1.0;
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

// ---------------------------------------------------------------------------

BlackBoxProblem build_pairwise_problem(const Dataset& data, double c_loss) {
  data.validate();
  if (!(c_loss > 0.0)) throw ConfigError("c_loss", "must be positive");
  const Index n_pos = data.count_label(1.0);
  const Index n_neg = data.count_label(-1.0);
  if (n_pos == 0 || n_neg == 0)
    throw DataError("pairwise problem needs both positive and negative rows");

  struct Shared {
    RowMatrix x;
    Vector y;
    RowMatrix pos;
    RowMatrix neg;
    double c2;
  };
  auto shared = std::make_shared<Shared>();
  shared->x = data.features;
  shared->y = data.labels;
  shared->c2 = c_loss * c_loss;
  shared->pos.resize(n_pos, data.dim());
  shared->neg.resize(n_neg, data.dim());
  for (Index i = 0, ip = 0, in = 0; i < data.rows(); ++i) {
    if (data.labels[i] > 0) shared->pos.row(ip++) = data.features.row(i);
    else shared->neg.row(in++) = data.features.row(i);
  }

  auto objective = [shared](Index i, const Vector& w) {
    const double r = shared->y[i] - shared->x.row(i).dot(w);
    return shared->c2 * (1.0 - std::exp(-(r * r) / shared->c2));
  };
  auto constraint = [shared, n_neg](Index k, const Vector& w) {
    const Index i = k / n_neg;
    const Index j = k % n_neg;
    return shared->neg.row(j).dot(w) - shared->pos.row(i).dot(w);
  };
  return BlackBoxProblem(data.dim(), data.rows(), n_pos * n_neg, objective, constraint);
}

// ---------------------------------------------------------------------------

namespace {

struct FairnessShared {
  RowMatrix x;
  Vector y;
  RowMatrix z_centered;  // z - zbar, n x r
  Vector w0_weight;      // (1 + y)/2 * y
  Vector w1_weight;      // (1 - y)/2
};

std::shared_ptr<FairnessShared> fairness_shared(const Dataset& data) {
  auto s = std::make_shared<FairnessShared>();
  s->x = data.features;
  s->y = data.labels;
  const Eigen::RowVectorXd zbar = data.sensitive->colwise().mean();
  s->z_centered = data.sensitive->rowwise() - zbar;
  s->w0_weight = ((1.0 + data.labels.array()) / 2.0 * data.labels.array()).matrix();
  s->w1_weight = ((1.0 - data.labels.array()) / 2.0).matrix();
  return s;
}

// cov_{s,k}(w), t = 2 s + k.
double fairness_covariance(const FairnessShared& s, Index t, const Vector& w) {
  const Index col = t / 2;
  const Vector h = s.x * w;
  const Vector& weight = (t % 2 == 0) ? s.w0_weight : s.w1_weight;
  const Vector g = weight.cwiseProduct(h).cwiseMin(0.0);
  return s.z_centered.col(col).dot(g) / static_cast<double>(s.x.rows());
}

}  // namespace

BlackBoxProblem build_fairness_problem(const Dataset& data, double c_cov, FairnessLoss loss) {
  data.validate();
  if (!data.sensitive || data.sensitive->cols() == 0)
    throw DataError("fairness problem needs sensitive features");
  if (!(c_cov > 0.0)) throw ConfigError("c_cov", "must be positive");
  if (data.rows() == 0) throw DataError("fairness problem needs at least one row");
  if (loss != FairnessLoss::Hinge) throw ConfigError("loss", "only hinge loss is supported");

  auto shared = fairness_shared(data);
  auto objective = [shared](Index i, const Vector& w) {
    return std::max(1.0 - shared->y[i] * shared->x.row(i).dot(w), 0.0);
  };
  auto constraint = [shared, c_cov](Index j, const Vector& w) {
    const double cov = fairness_covariance(*shared, j / 2, w);
    return (j % 2 == 0) ? cov - c_cov : -cov - c_cov;
  };
  const Index m = 4 * data.sensitive->cols();
  return BlackBoxProblem(data.dim(), data.rows(), m, objective, constraint);
}

Vector fairness_covariances(const Dataset& data, const Vector& w) {
  data.validate();
  if (!data.sensitive) throw DataError("fairness_covariances: no sensitive features");
  auto shared = fairness_shared(data);
  Vector out(2 * data.sensitive->cols());
  for (Index t = 0; t < out.size(); ++t) out[t] = fairness_covariance(*shared, t, w);
  return out;
}

double fairness_box_radius(const Dataset& data, double c_cov) {
  data.validate();
  if (!data.sensitive || data.rows() == 0) throw DataError("fairness_box_radius: no sensitive features");
  if (!(c_cov > 0.0)) throw ConfigError("c_cov", "must be positive");
  auto shared = fairness_shared(data);
  const Vector l1 = data.features.rowwise().lpNorm<1>();
  const double worst =
      (shared->z_centered.cwiseAbs().transpose() * l1).maxCoeff() / static_cast<double>(data.rows());
  if (worst <= 0.0) return std::numeric_limits<double>::infinity();
  return c_cov / worst;
}

// ---------------------------------------------------------------------------

Vector halfspace_projection_by_enumeration(const Vector& center, const Eigen::MatrixXd& A,
                                           const Vector& b) {
  const Index k = A.rows();
  const Index d = A.cols();
  if (center.size() != d || b.size() != k) throw ContractError("halfspace projection: shapes");
  if (k > 20) throw ContractError("halfspace projection: too many rows to enumerate");

  std::optional<Vector> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    std::vector<Index> active;
    for (Index i = 0; i < k; ++i)
      if (mask & (1u << i)) active.push_back(i);
    if (static_cast<Index>(active.size()) > d) continue;

    Vector w = center;
    if (!active.empty()) {
      Eigen::MatrixXd As(static_cast<Index>(active.size()), d);
      Vector bs(static_cast<Index>(active.size()));
      for (std::size_t r = 0; r < active.size(); ++r) {
        As.row(static_cast<Index>(r)) = A.row(active[r]);
        bs[static_cast<Index>(r)] = b[active[r]];
      }
      const Eigen::MatrixXd gram = As * As.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (!lu.isInvertible()) continue;
      const Vector nu = lu.solve(As * center - bs);
      if (nu.minCoeff() < -1e-12) continue;
      w = center - As.transpose() * nu;
    }
    if (((A * w - b).array() > 1e-9).any()) continue;
    const double value = (w - center).squaredNorm();
    if (value < best_value) {
      best_value = value;
      best = w;
    }
  }
  if (!best) throw DataError("halfspace projection: no KKT point found (infeasible system?)");
  return *best;
}

std::vector<AnalyticCase> build_analytic_suite(std::uint64_t seed) {
  std::vector<AnalyticCase> suite;

  // (a)
  suite.push_back(AnalyticCase{
      "a",
      BlackBoxProblem(
          1, 1, 1, [](Index, const Vector& w) { return w[0] * w[0]; },
          [](Index, const Vector& w) { return 1.0 - w[0]; }),
      Vector::Ones(1), 1e-2});

  // (b) half-spaces a_i'w <= b_i with w = 0 strictly feasible and the
  // center placed outside so that some of them bind.
  {
    constexpr Index d = 3;
    constexpr Index k = 5;
    Rng rng = make_stream(seed, 0xb);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> slack(0.2, 1.0);
    Eigen::MatrixXd A(k, d);
    Vector b(k);
    for (Index i = 0; i < k; ++i) {
      for (Index c = 0; c < d; ++c) A(i, c) = normal(rng);
      A.row(i).normalize();
      b[i] = slack(rng);
    }
    Vector center(d);
    for (Index c = 0; c < d; ++c) center[c] = normal(rng);
    // Push the center along the mean outward normal until it violates constraints.
    center += 2.0 * A.colwise().mean().transpose().normalized();
    Vector optimum = halfspace_projection_by_enumeration(center, A, b);
    auto shared_a = std::make_shared<const Eigen::MatrixXd>(A);
    auto shared_b = std::make_shared<const Vector>(b);
    suite.push_back(AnalyticCase{
        "b",
        BlackBoxProblem(
            d, 1, k, [center](Index, const Vector& w) { return (w - center).squaredNorm(); },
            [shared_a, shared_b](Index i, const Vector& w) {
              return shared_a->row(i).dot(w) - (*shared_b)[i];
            }),
        optimum, 5e-2});
  }

  // (c) m replicated lower bounds w_{j mod d} >= 1/m.
  {
    constexpr Index d = 10;
    constexpr Index m = 10000;
    const double bound = 1.0 / static_cast<double>(m);
    suite.push_back(AnalyticCase{
        "c",
        BlackBoxProblem(
            d, 1, m, [](Index, const Vector& w) { return w.squaredNorm(); },
            [bound](Index j, const Vector& w) { return bound - w[j % d]; }),
        Vector::Constant(d, bound), 1e-2});
  }

  // (d) m lower bounds on d coordinates at m/d levels; only the top level
  // (1 + i/d on coordinate i) binds.
  {
    constexpr Index d = 10;
    constexpr Index m = 10000;
    constexpr Index levels = m / d;
    auto level_bound = [](Index j) {
      const Index i = j % d;
      const Index level = j / d;
      return (1.0 + static_cast<double>(i) / d) * static_cast<double>(level + 1) /
             static_cast<double>(levels);
    };
    Vector optimum(d);
    for (Index i = 0; i < d; ++i) optimum[i] = 1.0 + static_cast<double>(i) / d;
    suite.push_back(AnalyticCase{
        "d",
        BlackBoxProblem(
            d, 1, m, [](Index, const Vector& w) { return w.squaredNorm(); },
            [level_bound](Index j, const Vector& w) { return level_bound(j) - w[j % d]; }),
        optimum, 5e-2});
  }
  return suite;
}

// ---------------------------------------------------------------------------

Dataset generate_fairness_dataset(const FairnessDataSpec& spec) {
  if (spec.n <= 0) throw ConfigError("n", "must be positive");
  if (spec.d <= 0) throw ConfigError("d", "must be positive");
  if (spec.r <= 0) throw ConfigError("r", "must be positive");
  if (spec.r > spec.d) throw ConfigError("r", "cannot exceed d");
  if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) throw ConfigError("rho", "must lie in [0, 1]");

  Rng rng = make_stream(spec.seed, 0xfa1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Vector direction(spec.d);
  for (Index c = 0; c < spec.d; ++c) direction[c] = normal(rng);
  direction.normalize();
  const std::vector<Index> sensitive_cols = sample_without_replacement(spec.d, spec.r, rng);

  Dataset out;
  out.features.resize(spec.n, spec.d);
  out.labels.resize(spec.n);
  out.sensitive = RowMatrix(spec.n, spec.r);
  for (Index i = 0; i < spec.n; ++i) {
    const double y = unit(rng) < 0.5 ? 1.0 : -1.0;
    out.labels[i] = y;
    for (Index c = 0; c < spec.d; ++c)
      out.features(i, c) = y * spec.separation * direction[c] + normal(rng);
    for (Index s = 0; s < spec.r; ++s) {
      const double z = unit(rng) < (1.0 + spec.rho * y) / 2.0 ? 1.0 : 0.0;
      (*out.sensitive)(i, s) = z;
      out.features(i, sensitive_cols[static_cast<std::size_t>(s)]) = z;
    }
  }
  return out;
}

}  // namespace dszog
