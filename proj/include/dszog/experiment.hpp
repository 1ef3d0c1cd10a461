#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dszog/core.hpp"
#include "dszog/dataio.hpp"
#include "dszog/problems.hpp"

namespace dszog {

/// One experiment, read from a key=value file.
///
/// Keys (all optional unless noted):
///   task            pairwise | fairness | analytic            (required)
///   method          comma list of dszog, full_gda, zopsgd     (required)
///   repeats         runs per method, seeds seed + r           (default 1)
///   out_dir         output root                               (default "out")
///   any DszogConfig field; `seed` is the base seed, `mu` and
///   `time_budget_s` also accept "auto" / "none"
///   grid.<field>    comma list for beta, lambda, eta_w, eta_p, a, b, mu;
///                   the grid point with the best validation accuracy is
///                   used for the repeats (not for task=analytic)
///   pairwise:  dataset (path, required), dataset_dim, subsample (rows, 0 = all),
///              stratified (true|false), c_loss
///   fairness:  dataset_n, dataset_d, dataset_r, dataset_rho,
///              dataset_separation, dataset_seed, c_cov
///   both:      split_train, split_test, split_validation, split_seed
///   analytic:  case (a|b|c|d), suite_seed
///   zopsgd:    zopsgd_set (box|simplex), zopsgd_box (radius, or "auto" for
///              the certified fairness box; default auto for fairness, 1 otherwise)
///   w0_scale        w0 ~ N(0, w0_scale^2 I) from the run seed (default 0.01;
///                   0 starts at the origin)
///   stat_q_big, stat_mu_small, stat_estimate   final-report options
struct ExperimentConfig {
  std::string task;
  std::vector<std::string> methods;
  int repeats = 1;
  std::filesystem::path out_dir = "out";
  DszogConfig solver;
  std::vector<std::pair<std::string, std::vector<double>>> grid;

  std::string dataset;
  std::optional<Index> dataset_dim;
  Index subsample_rows = 0;
  bool stratified = true;
  double c_loss = 1.0;

  FairnessDataSpec generator;
  double c_cov = 1e-3;

  SplitSpec split;

  std::string analytic_case = "a";
  std::uint64_t suite_seed = 7;

  std::string zopsgd_set = "box";
  std::optional<double> zopsgd_box;  ///< unset = auto

  double w0_scale = 0.01;

  StationarityOptions stationarity;

  /// Throws ConfigError naming the offending key.
  static ExperimentConfig from_entries(const KeyValues& entries);
  void validate() const;
  /// Canonical key=value rendering (manifest header).
  KeyValues entries() const;
};

/// Reads and validates a config file. ParseError for malformed lines,
/// ConfigError for unknown, repeated or out-of-range keys.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Sets one DszogConfig field from text; ConfigError on unknown names or
/// unparsable values. Returns false if `name` is not a DszogConfig field.
bool set_config_field(DszogConfig& cfg, const std::string& name, const std::string& value);

/// Starting point of the run with `seed`: i.i.d. N(0, scale^2), drawn from
/// its own stream so it does not shift the solver's random draws.
Vector initial_point(Index d, double scale, std::uint64_t seed);

/// Per-run summary kept by the runner.
struct RunSummary {
  std::string method;
  std::uint64_t seed = 0;
  std::string termination;
  double final_metric = 0.0;  ///< test accuracy, or distance to the optimum
  std::filesystem::path dir;
};

struct ExperimentResult {
  std::string metric_name;  ///< "test_acc" or "dist_opt"
  std::vector<RunSummary> runs;
};

/// Runs every (method, seed) pair, writing out_dir/<method>/seed_<s>/ and
/// then summary.csv and plot_accuracy_vs_time.csv. Progress goes to `log`.
/// On any exception, files created by this call are removed before
/// rethrowing.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Reads the final value of the metric column of every trace under out_dir
/// and writes summary.csv:
///     method,runs,metric,mean,std
/// (std is the n-1 sample deviation, 0 for a single run). Values are the
/// 12-digit numbers as written in the traces; mean and std are printed with
/// 17 significant digits.
void write_summary(const std::filesystem::path& out_dir, const std::string& metric_name);

/// Writes plot_accuracy_vs_time.csv (method,seed,wall_s,test_accuracy) from
/// the traces under out_dir, sorted by (method, seed, wall_s). Throws
/// std::runtime_error if there are no traces with a test_acc column.
void emit_plot_data(const std::filesystem::path& out_dir);

/// Command-line entry point: `<config> [--out DIR] [--seed S] [--dry-run]`.
/// Returns 0 on success, 1 on configuration errors, 2 on runtime errors.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dszog
