#include "dszog/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "dszog/baselines.hpp"
#include "dszog/random.hpp"
#include "dszog/solver.hpp"

namespace dszog {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kMethods = {"dszog", "full_gda", "zopsgd"};
const std::vector<std::string> kGridFields = {"beta", "lambda", "eta_w", "eta_p", "a", "b", "mu"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (value.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + value + "'");
  return v;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& value) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

std::string join(const std::vector<std::string>& items, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
  return s;
}

}  // namespace

bool set_config_field(DszogConfig& cfg, const std::string& name, const std::string& value) {
  if (name == "beta") cfg.beta = parse_real(name, value);
  else if (name == "lambda") cfg.lambda = parse_real(name, value);
  else if (name == "mu") cfg.mu = value == "auto" ? std::nullopt : std::optional(parse_real(name, value));
  else if (name == "q") cfg.q = parse_integer<int>(name, value);
  else if (name == "batch_data") cfg.batch_data = parse_integer<int>(name, value);
  else if (name == "batch_cons_w") cfg.batch_cons_w = parse_integer<int>(name, value);
  else if (name == "batch_cons_p") cfg.batch_cons_p = parse_integer<int>(name, value);
  else if (name == "eta_w") cfg.eta_w = parse_real(name, value);
  else if (name == "eta_p") cfg.eta_p = parse_real(name, value);
  else if (name == "a") cfg.a = parse_real(name, value);
  else if (name == "b") cfg.b = parse_real(name, value);
  else if (name == "c_eps") cfg.c_eps = parse_real(name, value);
  else if (name == "max_iters") cfg.max_iters = parse_integer<std::int64_t>(name, value);
  else if (name == "seed") cfg.seed = parse_integer<std::uint64_t>(name, value);
  else if (name == "metric_every") cfg.metric_every = parse_integer<std::int64_t>(name, value);
  else if (name == "time_budget_s")
    cfg.time_budget_s = value == "none" ? std::nullopt : std::optional(parse_real(name, value));
  else return false;
  return true;
}

ExperimentConfig ExperimentConfig::from_entries(const KeyValues& entries) {
  ExperimentConfig c;
  std::set<std::string> seen;
  bool have_task = false, have_method = false;
  for (const auto& [key, value] : entries) {
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    if (set_config_field(c.solver, key, value)) continue;
    if (key == "task") {
      c.task = value;
      have_task = true;
    } else if (key == "method") {
      c.methods = split_list(value);
      have_method = true;
    } else if (key == "repeats") c.repeats = parse_integer<int>(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key.rfind("grid.", 0) == 0) {
      const std::string field = key.substr(5);
      if (std::find(kGridFields.begin(), kGridFields.end(), field) == kGridFields.end())
        throw ConfigError(key, "grids are supported for " + join(kGridFields, ", "));
      std::vector<double> values;
      for (const auto& item : split_list(value)) values.push_back(parse_real(key, item));
      if (values.empty()) throw ConfigError(key, "empty grid");
      c.grid.emplace_back(field, std::move(values));
    } else if (key == "dataset") c.dataset = value;
    else if (key == "dataset_dim") c.dataset_dim = parse_integer<Index>(key, value);
    else if (key == "subsample") c.subsample_rows = parse_integer<Index>(key, value);
    else if (key == "stratified") c.stratified = parse_bool(key, value);
    else if (key == "c_loss") c.c_loss = parse_real(key, value);
    else if (key == "dataset_n") c.generator.n = parse_integer<Index>(key, value);
    else if (key == "dataset_d") c.generator.d = parse_integer<Index>(key, value);
    else if (key == "dataset_r") c.generator.r = parse_integer<Index>(key, value);
    else if (key == "dataset_rho") c.generator.rho = parse_real(key, value);
    else if (key == "dataset_separation") c.generator.separation = parse_real(key, value);
    else if (key == "dataset_seed") c.generator.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "c_cov") c.c_cov = parse_real(key, value);
    else if (key == "split_train") c.split.train = parse_real(key, value);
    else if (key == "split_test") c.split.test = parse_real(key, value);
    else if (key == "split_validation") c.split.validation = parse_real(key, value);
    else if (key == "split_seed") c.split.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "case") c.analytic_case = value;
    else if (key == "suite_seed") c.suite_seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "zopsgd_set") c.zopsgd_set = value;
    else if (key == "zopsgd_box")
      c.zopsgd_box = value == "auto" ? std::nullopt : std::optional(parse_real(key, value));
    else if (key == "w0_scale") c.w0_scale = parse_real(key, value);
    else if (key == "stat_q_big") c.stationarity.q_big = parse_integer<Index>(key, value);
    else if (key == "stat_mu_small") c.stationarity.mu_small = parse_real(key, value);
    else if (key == "stat_estimate") c.stationarity.estimate_gradients = parse_bool(key, value);
    else throw ConfigError(key, "unknown key");
  }
  if (!have_task) throw ConfigError("task", "required");
  if (!have_method) throw ConfigError("method", "required");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (task != "pairwise" && task != "fairness" && task != "analytic")
    throw ConfigError("task", "must be pairwise, fairness or analytic, got '" + task + "'");
  if (methods.empty()) throw ConfigError("method", "at least one method is required");
  std::set<std::string> distinct;
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      throw ConfigError("method", "unknown method '" + m + "' (dszog, full_gda, zopsgd)");
    if (!distinct.insert(m).second) throw ConfigError("method", "'" + m + "' listed twice");
  }
  if (repeats < 1) throw ConfigError("repeats", "must be at least 1");
  if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  validate_config(solver);
  for (const auto& [field, values] : grid) {
    for (double v : values) {
      DszogConfig probe = solver;
      set_config_field(probe, field, format_number(v));
      try {
        validate_config(probe);
      } catch (const ConfigError& e) {
        throw ConfigError("grid." + field, e.what());
      }
    }
  }
  if (task == "analytic") {
    if (!grid.empty()) throw ConfigError("grid", "needs a validation split; not available for task=analytic");
    if (analytic_case != "a" && analytic_case != "b" && analytic_case != "c" && analytic_case != "d")
      throw ConfigError("case", "must be a, b, c or d");
  } else {
    split.validate();
  }
  if (task == "pairwise") {
    if (dataset.empty()) throw ConfigError("dataset", "required for task=pairwise");
    if (dataset_dim && *dataset_dim <= 0) throw ConfigError("dataset_dim", "must be positive");
    if (subsample_rows < 0) throw ConfigError("subsample", "must be nonnegative");
    if (!(c_loss > 0.0)) throw ConfigError("c_loss", "must be positive");
  }
  if (task == "fairness") {
    if (generator.n <= 0) throw ConfigError("dataset_n", "must be positive");
    if (generator.d <= 0) throw ConfigError("dataset_d", "must be positive");
    if (generator.r <= 0) throw ConfigError("dataset_r", "must be positive");
    if (generator.r > generator.d) throw ConfigError("dataset_r", "cannot exceed dataset_d");
    if (!(generator.rho >= 0.0 && generator.rho <= 1.0))
      throw ConfigError("dataset_rho", "must lie in [0, 1]");
    if (!(c_cov > 0.0)) throw ConfigError("c_cov", "must be positive");
  }
  if (zopsgd_set != "box" && zopsgd_set != "simplex")
    throw ConfigError("zopsgd_set", "unsupported set shape '" + zopsgd_set + "' (box or simplex)");
  if (zopsgd_box && !(*zopsgd_box > 0.0)) throw ConfigError("zopsgd_box", "must be positive");
  if (!(w0_scale >= 0.0)) throw ConfigError("w0_scale", "must be nonnegative");
  if (stationarity.q_big < 1) throw ConfigError("stat_q_big", "must be positive");
  if (!(stationarity.mu_small > 0.0)) throw ConfigError("stat_mu_small", "must be positive");
}

KeyValues ExperimentConfig::entries() const {
  KeyValues kv{{"task", task}, {"method", join(methods)}, {"repeats", std::to_string(repeats)},
               {"out_dir", out_dir.string()}};
  for (const auto& [field, values] : grid) {
    std::vector<std::string> items;
    for (double v : values) items.push_back(format_number(v));
    kv.emplace_back("grid." + field, join(items));
  }
  if (task == "pairwise") {
    kv.emplace_back("dataset", dataset);
    kv.emplace_back("dataset_dim", dataset_dim ? std::to_string(*dataset_dim) : "auto");
    kv.emplace_back("subsample", std::to_string(subsample_rows));
    kv.emplace_back("stratified", stratified ? "true" : "false");
    kv.emplace_back("c_loss", format_number(c_loss));
  }
  if (task == "fairness") {
    kv.emplace_back("dataset_n", std::to_string(generator.n));
    kv.emplace_back("dataset_d", std::to_string(generator.d));
    kv.emplace_back("dataset_r", std::to_string(generator.r));
    kv.emplace_back("dataset_rho", format_number(generator.rho));
    kv.emplace_back("dataset_separation", format_number(generator.separation));
    kv.emplace_back("dataset_seed", std::to_string(generator.seed));
    kv.emplace_back("c_cov", format_number(c_cov));
  }
  if (task != "analytic") {
    kv.emplace_back("split_train", format_number(split.train));
    kv.emplace_back("split_test", format_number(split.test));
    kv.emplace_back("split_validation", format_number(split.validation));
    kv.emplace_back("split_seed", std::to_string(split.seed));
  } else {
    kv.emplace_back("case", analytic_case);
    kv.emplace_back("suite_seed", std::to_string(suite_seed));
  }
  kv.emplace_back("zopsgd_set", zopsgd_set);
  kv.emplace_back("zopsgd_box", zopsgd_box ? format_number(*zopsgd_box) : "auto");
  kv.emplace_back("w0_scale", format_number(w0_scale));
  kv.emplace_back("stat_q_big", std::to_string(stationarity.q_big));
  kv.emplace_back("stat_mu_small", format_number(stationarity.mu_small));
  kv.emplace_back("stat_estimate", stationarity.estimate_gradients ? "true" : "false");
  return kv;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", path.string() + ": cannot open for reading");
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, path.string() + ": expected key=value");
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return ExperimentConfig::from_entries(kv);
}

Vector initial_point(Index d, double scale, std::uint64_t seed) {
  Vector w0 = Vector::Zero(d);
  if (scale == 0.0) return w0;
  Rng rng = make_stream(seed, 4);
  std::normal_distribution<double> normal(0.0, scale);
  for (Index i = 0; i < d; ++i) w0[i] = normal(rng);
  return w0;
}

// ---------------------------------------------------------------------------

namespace {

struct Prepared {
  BlackBoxProblem problem;
  std::optional<Dataset> train, test, validation;
  std::optional<Vector> optimum;
  KeyValues entries;
};

Prepared prepare(const ExperimentConfig& cfg) {
  if (cfg.task == "analytic") {
    auto suite = build_analytic_suite(cfg.suite_seed);
    for (auto& c : suite) {
      if (c.name != cfg.analytic_case) continue;
      KeyValues kv{{"n", std::to_string(c.problem.n_components())},
                   {"m", std::to_string(c.problem.n_constraints())},
                   {"d", std::to_string(c.problem.dim())}};
      return Prepared{std::move(c.problem), {}, {}, {}, c.optimum, kv};
    }
    throw ConfigError("case", "no analytic case '" + cfg.analytic_case + "'");
  }

  Dataset data;
  if (cfg.task == "pairwise") {
    data = read_sparse_dataset(cfg.dataset, cfg.dataset_dim);
    if (cfg.subsample_rows > 0) data = subsample(data, cfg.subsample_rows, cfg.stratified, cfg.split.seed);
  } else {
    data = generate_fairness_dataset(cfg.generator);
  }
  data.validate();
  Split parts = split(data, cfg.split);
  BlackBoxProblem problem = cfg.task == "pairwise" ? build_pairwise_problem(parts.train, cfg.c_loss)
                                                   : build_fairness_problem(parts.train, cfg.c_cov);
  KeyValues kv{{"dataset_checksum", checksum_hex(dataset_checksum(data))},
               {"train_checksum", checksum_hex(dataset_checksum(parts.train))},
               {"rows_total", std::to_string(data.rows())},
               {"rows_train", std::to_string(parts.train.rows())},
               {"rows_test", std::to_string(parts.test.rows())},
               {"rows_validation", std::to_string(parts.validation.rows())},
               {"n", std::to_string(problem.n_components())},
               {"m", std::to_string(problem.n_constraints())},
               {"d", std::to_string(problem.dim())}};
  return Prepared{std::move(problem), std::move(parts.train), std::move(parts.test),
                  std::move(parts.validation), std::nullopt, kv};
}

double zopsgd_radius(const ExperimentConfig& cfg, const Prepared& prep) {
  if (cfg.zopsgd_box) return *cfg.zopsgd_box;
  if (cfg.task == "fairness") return fairness_box_radius(*prep.train, cfg.c_cov);
  return 1.0;
}

SolveOutcome solve(const std::string& method, const ExperimentConfig& cfg, const Prepared& prep,
                   const DszogConfig& solver, const SolveHooks& hooks) {
  const Vector w0 = initial_point(prep.problem.dim(), cfg.w0_scale, solver.seed);
  if (method == "dszog") return dszog_solve(prep.problem, solver, w0, hooks);
  if (method == "full_gda") return full_batch_gda_solve(prep.problem, solver, w0, hooks);
  const double r = zopsgd_radius(cfg, prep);
  const FeasibleSet set = FeasibleSet::parse(cfg.zopsgd_set, prep.problem.dim(), -r, r);
  return zopsgd_solve(prep.problem, set, solver, w0, hooks);
}

// Cartesian product of the grid, first field varying slowest.
std::vector<std::vector<double>> grid_points(const ExperimentConfig& cfg) {
  std::vector<std::vector<double>> points{{}};
  for (const auto& [field, values] : cfg.grid) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points)
      for (double v : values) {
        next.push_back(p);
        next.back().push_back(v);
      }
    points = std::move(next);
  }
  return points;
}

DszogConfig apply_point(const ExperimentConfig& cfg, const std::vector<double>& point) {
  DszogConfig s = cfg.solver;
  for (std::size_t k = 0; k < point.size(); ++k)
    set_config_field(s, cfg.grid[k].first, format_number(point[k]));
  return s;
}

struct Selection {
  DszogConfig solver;
  KeyValues chosen;
};

Selection select_on_validation(const std::string& method, const ExperimentConfig& cfg,
                               const Prepared& prep, const fs::path& method_dir, std::ostream& log) {
  if (cfg.grid.empty()) return {cfg.solver, {}};
  std::string table;
  for (const auto& g : cfg.grid) table += g.first + ",";
  table += "validation_acc\n";
  SolveHooks hooks;
  hooks.stationarity = cfg.stationarity;
  hooks.stationarity.estimate_gradients = false;

  double best = -1.0;
  std::vector<double> best_point;
  for (const auto& point : grid_points(cfg)) {
    const DszogConfig s = apply_point(cfg, point);
    const SolveOutcome out = solve(method, cfg, prep, s, hooks);
    const double acc = accuracy(out.final_w, *prep.validation);
    for (double v : point) table += format_number(v) + ",";
    table += format_number(acc) + "\n";
    if (acc > best) {
      best = acc;
      best_point = point;
    }
  }
  std::ofstream f(method_dir / "selection.csv", std::ios::binary);
  f << table;
  if (!f) throw std::runtime_error((method_dir / "selection.csv").string() + ": write failed");

  Selection sel{apply_point(cfg, best_point), {}};
  for (std::size_t k = 0; k < best_point.size(); ++k)
    sel.chosen.emplace_back("selected." + cfg.grid[k].first, format_number(best_point[k]));
  sel.chosen.emplace_back("selected.validation_acc", format_number(best));
  log << "[" << method << "] grid selection: validation accuracy " << format_number(best) << "\n";
  return sel;
}

struct Trace {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::ptrdiff_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }
};

Trace read_trace(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  Trace t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  t.header = split_list(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_list(line));
    if (t.rows.back().size() != t.header.size())
      throw std::runtime_error(path.string() + ": row width differs from header");
  }
  return t;
}

struct TraceFile {
  std::string method;
  std::uint64_t seed;
  fs::path path;
};

// Every <method>/seed_<s>/trace.csv under out_dir, ordered by (method, seed).
std::vector<TraceFile> find_traces(const fs::path& out_dir) {
  std::vector<TraceFile> found;
  if (!fs::is_directory(out_dir)) throw std::runtime_error(out_dir.string() + ": not a directory");
  for (const auto& method_dir : fs::directory_iterator(out_dir)) {
    if (!method_dir.is_directory()) continue;
    for (const auto& seed_dir : fs::directory_iterator(method_dir.path())) {
      const std::string name = seed_dir.path().filename().string();
      if (!seed_dir.is_directory() || name.rfind("seed_", 0) != 0) continue;
      const fs::path trace = seed_dir.path() / "trace.csv";
      if (!fs::exists(trace)) continue;
      found.push_back({method_dir.path().filename().string(),
                       parse_integer<std::uint64_t>("seed", name.substr(5)), trace});
    }
  }
  std::sort(found.begin(), found.end(), [](const TraceFile& a, const TraceFile& b) {
    return std::tie(a.method, a.seed) < std::tie(b.method, b.seed);
  });
  return found;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    if (s == "nan" || s == "-nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    throw std::runtime_error("trace: bad number '" + s + "'");
  }
  return v;
}

// Summary statistics keep every digit so they can be recomputed exactly.
std::string round_trip(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  f << text;
  f.close();
  if (!f) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace

void write_summary(const fs::path& out_dir, const std::string& metric_name) {
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  const std::vector<std::string> columns{metric_name, "obj", "max_viol"};
  for (const TraceFile& tf : find_traces(out_dir)) {
    const Trace t = read_trace(tf.path);
    if (t.rows.empty()) continue;
    for (const auto& col : columns) {
      const auto c = t.column(col);
      if (c < 0) throw std::runtime_error(tf.path.string() + ": no column " + col);
      values[tf.method][col].push_back(to_double(t.rows.back()[static_cast<std::size_t>(c)]));
    }
  }
  std::string csv = "method,runs,metric,mean,std\n";
  for (const auto& [method, by_col] : values) {
    for (const auto& col : columns) {
      const std::vector<double>& v = by_col.at(col);
      const double n = static_cast<double>(v.size());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      csv += method + "," + std::to_string(v.size()) + "," + col + "," + round_trip(mean) + "," +
             round_trip(sd) + "\n";
    }
  }
  write_text(out_dir / "summary.csv", csv);
}

void emit_plot_data(const fs::path& out_dir) {
  struct Point {
    std::string method;
    std::uint64_t seed;
    double wall_s;
    std::string wall, acc;
  };
  std::vector<Point> points;
  std::size_t series = 0;
  for (const TraceFile& tf : find_traces(out_dir)) {
    const Trace t = read_trace(tf.path);
    const auto cw = t.column("wall_s"), ca = t.column("test_acc");
    if (ca < 0) continue;
    ++series;
    for (const auto& row : t.rows) {
      const auto& wall = row[static_cast<std::size_t>(cw)];
      points.push_back({tf.method, tf.seed, to_double(wall), wall, row[static_cast<std::size_t>(ca)]});
    }
  }
  if (series == 0) throw std::runtime_error(out_dir.string() + ": no traces with a test_acc column");
  std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return std::tie(a.method, a.seed, a.wall_s) < std::tie(b.method, b.seed, b.wall_s);
  });
  std::string csv = "method,seed,wall_s,test_accuracy\n";
  for (const auto& p : points)
    csv += p.method + "," + std::to_string(p.seed) + "," + p.wall + "," + p.acc + "\n";
  write_text(out_dir / "plot_accuracy_vs_time.csv", csv);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const bool root_existed = fs::exists(cfg.out_dir);
  std::vector<fs::path> created;
  auto track = [&](const fs::path& p) {
    if (!fs::exists(p)) created.push_back(p);
  };

  try {
    Prepared prep = prepare(cfg);
    ExperimentResult result;
    result.metric_name = cfg.task == "analytic" ? "dist_opt" : "test_acc";

    std::vector<std::string> seeds;
    for (int r = 0; r < cfg.repeats; ++r) seeds.push_back(std::to_string(cfg.solver.seed + r));

    fs::create_directories(cfg.out_dir);
    for (const std::string& method : cfg.methods) {
      const fs::path method_dir = cfg.out_dir / method;
      track(method_dir);
      fs::create_directories(method_dir);
      const Selection sel = select_on_validation(method, cfg, prep, method_dir, log);

      for (int r = 0; r < cfg.repeats; ++r) {
        DszogConfig solver = sel.solver;
        solver.seed = cfg.solver.seed + static_cast<std::uint64_t>(r);

        SolveHooks hooks;
        hooks.stationarity = cfg.stationarity;
        hooks.stationarity.seed = solver.seed;
        hooks.extra_names = {result.metric_name};
        if (prep.optimum) {
          const Vector opt = *prep.optimum;
          hooks.extra_metrics = [opt](const Vector& w) { return std::vector<double>{(w - opt).norm()}; };
        } else {
          const Dataset* test = &*prep.test;
          hooks.extra_metrics = [test](const Vector& w) { return std::vector<double>{accuracy(w, *test)}; };
        }

        const SolveOutcome out = solve(method, cfg, prep, solver, hooks);

        KeyValues manifest{{"task", cfg.task}, {"method", method}};
        const KeyValues solver_kv = config_entries(solver);
        manifest.insert(manifest.end(), solver_kv.begin(), solver_kv.end());
        manifest.emplace_back(
            "mu_effective",
            format_number(effective_mu(solver, initial_point(prep.problem.dim(), cfg.w0_scale, solver.seed))));
        manifest.emplace_back("base_seed", std::to_string(cfg.solver.seed));
        manifest.emplace_back("seed_schedule", join(seeds));
        for (const auto& kv : cfg.entries())
          if (kv.first != "task" && kv.first != "method") manifest.push_back(kv);
        manifest.insert(manifest.end(), prep.entries.begin(), prep.entries.end());
        manifest.insert(manifest.end(), sel.chosen.begin(), sel.chosen.end());
        if (method == "zopsgd")
          manifest.emplace_back("zopsgd_radius", format_number(zopsgd_radius(cfg, prep)));
        manifest.emplace_back("metric_cadence",
                              result.metric_name + " at iteration 0, every metric_every iterations "
                              "and at the last iteration; wall_s is training time excluding metrics");

        RunSummary summary{method, solver.seed, to_string(out.termination),
                           out.record.rows().back().extra.at(0), method_dir / ("seed_" + seeds[r])};
        const KeyValues report_extra{
            {"termination", summary.termination},
            {"abort_reason", out.abort_reason},
            {"iterations", std::to_string(out.iterations)},
            {"algorithm_objective_calls", std::to_string(out.algorithm_calls.objective)},
            {"algorithm_constraint_calls", std::to_string(out.algorithm_calls.constraint)},
            {"diagnostic_objective_calls", std::to_string(out.diagnostic_calls.objective)},
            {"diagnostic_constraint_calls", std::to_string(out.diagnostic_calls.constraint)},
            {"final_" + result.metric_name, format_number(summary.final_metric)}};
        write_run(out.record, out.stationarity, manifest, summary.dir, report_extra);
        log << "[" << method << " seed=" << solver.seed << "] " << summary.termination << " after "
            << out.iterations << " iterations, " << result.metric_name << "="
            << format_number(summary.final_metric) << "\n";
        result.runs.push_back(std::move(summary));
      }
    }

    track(cfg.out_dir / "summary.csv");
    write_summary(cfg.out_dir, result.metric_name);
    if (cfg.task != "analytic") {
      track(cfg.out_dir / "plot_accuracy_vs_time.csv");
      emit_plot_data(cfg.out_dir);
    }
    return result;
  } catch (...) {
    std::error_code ec;
    if (!root_existed) {
      fs::remove_all(cfg.out_dir, ec);
    } else {
      for (const auto& p : created) fs::remove_all(p, ec);
    }
    throw;
  }
}

// ---------------------------------------------------------------------------

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Doubly stochastic zeroth-order experiments"};
  std::string config_path;
  std::optional<std::string> out_override;
  std::optional<std::uint64_t> seed_override;
  bool dry_run = false;
  app.add_option("config", config_path, "key=value experiment file")->required();
  app.add_option("--out", out_override, "output directory (overrides out_dir)");
  app.add_option("--seed", seed_override, "base seed (overrides seed)");
  app.add_flag("--dry-run", dry_run, "validate the configuration only");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
    if (out_override) cfg.out_dir = *out_override;
    if (seed_override) cfg.solver.seed = *seed_override;
    cfg.validate();
    if (cfg.task == "pairwise" && !std::ifstream(cfg.dataset))
      throw ConfigError("dataset", cfg.dataset + ": cannot open for reading");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  if (dry_run) {
    out << "config ok: task=" << cfg.task << " methods=" << join(cfg.methods)
        << " repeats=" << cfg.repeats << " out_dir=" << cfg.out_dir.string() << "\n";
    return 0;
  }

  try {
    run_experiment(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace dszog
