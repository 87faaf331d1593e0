#ifndef RIAL_EXPERIMENT_HPP
#define RIAL_EXPERIMENT_HPP

#include "rial/csv.hpp"
#include "rial/problems.hpp"
#include "rial/random.hpp"
#include "rial/rial.hpp"
#include "rial/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace rial {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ProblemFamily { pca, cca, nonlinear };

inline const char* to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::pca:
      return "pca";
    case ProblemFamily::cca:
      return "cca";
    case ProblemFamily::nonlinear:
      return "nonlinear";
  }
  return "unknown";
}

struct ArmSpec {
  std::string name;
  OuterConfig config;
};

/// One point of the instance grid. Fields not used by the family stay 0.
struct GridPoint {
  Index d = 0;
  Index n = 0;
  Index p = 0;
  Index q = 0;
  Index r = 0;
  double mu = 0.0;
};

struct ExperimentConfig {
  ProblemFamily family = ProblemFamily::pca;
  std::vector<Index> d;
  std::vector<Index> n;
  std::vector<Index> p;
  std::vector<Index> q;
  std::vector<Index> r;
  std::vector<double> mu;
  std::vector<std::uint64_t> seeds;
  std::vector<ArmSpec> arms;
  std::filesystem::path output_dir;
  int workers = 1;
  bool traces = true;
  /// CCA data; a latent rank of 0 means "use r".
  Index cca_latent_rank = 0;
  double cca_snr = 1.0;

  void validate() const;
  std::vector<GridPoint> grid() const;
};

inline constexpr const char* kOutputDirEnv = "RIAL_OUTPUT_DIR";

inline std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "rial-out";
}

inline void ExperimentConfig::validate() const {
  auto nonempty = [](const auto& v, const char* what) {
    if (v.empty()) throw ConfigError(std::string("config: grid '") + what + "' is empty");
  };
  auto positive = [](const std::vector<Index>& v, const char* what) {
    for (Index x : v) {
      if (x < 1) throw ConfigError(std::string("config: '") + what + "' entries must be >= 1");
    }
  };
  switch (family) {
    case ProblemFamily::pca:
      nonempty(d, "d");
      nonempty(n, "n");
      positive(d, "d");
      positive(n, "n");
      break;
    case ProblemFamily::cca:
      nonempty(d, "d");
      nonempty(p, "p");
      nonempty(q, "q");
      positive(d, "d");
      positive(p, "p");
      positive(q, "q");
      break;
    case ProblemFamily::nonlinear:
      nonempty(p, "p");
      positive(p, "p");
      break;
  }
  nonempty(r, "r");
  positive(r, "r");
  nonempty(mu, "mu");
  for (double m : mu) {
    if (!(m >= 0.0)) throw ConfigError("config: 'mu' entries must be >= 0");
  }
  if (seeds.empty()) throw ConfigError("config: no seeds");
  if (arms.empty()) throw ConfigError("config: no arms");
  for (const auto& arm : arms) {
    try {
      arm.config.validate();
    } catch (const ParameterError& e) {
      throw ConfigError("config: arm '" + arm.name + "': " + e.what());
    }
  }
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (cca_latent_rank < 0) throw ConfigError("config: cca latent_rank must be >= 0");
  if (!(cca_snr >= 0.0)) throw ConfigError("config: cca snr must be >= 0");
}

inline std::vector<GridPoint> ExperimentConfig::grid() const {
  const std::vector<Index> none{0};
  const auto& dd = family == ProblemFamily::nonlinear ? none : d;
  const auto& nn = family == ProblemFamily::pca ? n : none;
  const auto& pp = family == ProblemFamily::pca ? none : p;
  const auto& qq = family == ProblemFamily::cca ? q : none;
  std::vector<GridPoint> out;
  for (Index d0 : dd)
    for (Index n0 : nn)
      for (Index p0 : pp)
        for (Index q0 : qq)
          for (Index r0 : r)
            for (double m0 : mu) out.push_back({d0, n0, p0, q0, r0, m0});
  return out;
}

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

using json = nlohmann::json;

template <class T>
std::vector<T> as_list(const json& j, const char* key) {
  if (j.is_array()) return j.get<std::vector<T>>();
  if (j.is_number()) return {j.get<T>()};
  throw ConfigError(std::string("config: '") + key + "' must be a number or a list");
}

inline void apply_inner_overrides(const json& j, InnerConfig& c) {
  for (const auto& [key, v] : j.items()) {
    if (key == "max_inner_iters") c.max_inner_iters = v.get<int>();
    else if (key == "armijo") c.armijo = v.get<double>();
    else if (key == "shrink") c.shrink = v.get<double>();
    else if (key == "step_min") c.step_min = v.get<double>();
    else if (key == "step_max") c.step_max = v.get<double>();
    else if (key == "nonmonotone_window") c.nonmonotone_window = v.get<int>();
    else if (key == "max_backtracks") c.max_backtracks = v.get<int>();
    else throw ConfigError("config: unknown inner option '" + key + "'");
  }
}

inline void apply_outer_overrides(const json& j, OuterConfig& c) {
  if (!j.is_object()) throw ConfigError("config: arm overrides must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "eps") c.eps = v.get<double>();
    else if (key == "eps1") c.eps1 = v.get<double>();
    else if (key == "sigma1") c.sigma1 = v.get<double>();
    else if (key == "b") c.b = v.get<double>();
    else if (key == "max_outer") c.max_outer = v.get<int>();
    else if (key == "beta0") c.beta0 = v.get<double>();
    else if (key == "check_invariants") c.check_invariants = v.get<bool>();
    else if (key == "inner") apply_inner_overrides(v, c.inner);
    else throw ConfigError("config: unknown solver option '" + key + "'");
  }
}

inline DualMode parse_dual_mode(const std::string& s) {
  if (s == "classical") return DualMode::classical;
  if (s == "damped") return DualMode::damped;
  throw ConfigError("config: unknown dual mode '" + s + "'");
}

}  // namespace detail

/// Parses a JSON experiment description:
///
///   {
///     "problem": "pca" | "cca" | "nonlinear",
///     "grid": {"d": [200], "n": [50], "r": [5], "mu": [0.5, 1.0]},
///     "seeds": [1, 2, 3] | {"start": 1, "count": 20},
///     "solver": {...},                         // shared overrides
///     "arms": {"classical": {...}, "damped": {"beta0": 1.0}},
///     "output_dir": "out", "workers": 2, "traces": true,
///     "cca": {"latent_rank": 2, "snr": 1.0}
///   }
///
/// Arms default to classical and damped. An arm's "dual" key picks the
/// multiplier update; otherwise the arm name does.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key != "problem" && key != "grid" && key != "seeds" && key != "solver" &&
          key != "arms" && key != "output_dir" && key != "workers" &&
          key != "traces" && key != "cca") {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
    const std::string fam = j.value("problem", std::string("pca"));
    if (fam == "pca") cfg.family = ProblemFamily::pca;
    else if (fam == "cca") cfg.family = ProblemFamily::cca;
    else if (fam == "nonlinear") cfg.family = ProblemFamily::nonlinear;
    else throw ConfigError("config: unknown problem family '" + fam + "'");

    if (!j.contains("grid") || !j["grid"].is_object()) {
      throw ConfigError("config: missing 'grid' object");
    }
    for (const auto& [key, v] : j["grid"].items()) {
      if (key == "d") cfg.d = detail::as_list<Index>(v, "d");
      else if (key == "n") cfg.n = detail::as_list<Index>(v, "n");
      else if (key == "p") cfg.p = detail::as_list<Index>(v, "p");
      else if (key == "q") cfg.q = detail::as_list<Index>(v, "q");
      else if (key == "r") cfg.r = detail::as_list<Index>(v, "r");
      else if (key == "mu") cfg.mu = detail::as_list<double>(v, "mu");
      else throw ConfigError("config: unknown grid key '" + key + "'");
    }

    if (j.contains("seeds")) {
      const json& s = j["seeds"];
      if (s.is_object()) {
        const auto start = s.value("start", std::uint64_t{1});
        const auto count = s.value("count", std::int64_t{1});
        if (count < 1) throw ConfigError("config: seeds.count must be >= 1");
        for (std::int64_t i = 0; i < count; ++i) cfg.seeds.push_back(start + i);
      } else {
        cfg.seeds = detail::as_list<std::uint64_t>(s, "seeds");
      }
    } else {
      cfg.seeds = {1};
    }

    OuterConfig shared;
    if (j.contains("solver")) detail::apply_outer_overrides(j["solver"], shared);

    if (j.contains("arms")) {
      if (!j["arms"].is_object()) throw ConfigError("config: 'arms' must be an object");
      for (const auto& [name, v] : j["arms"].items()) {
        ArmSpec arm{name, shared};
        json overrides = v;
        std::string dual = name;
        if (overrides.is_object() && overrides.contains("dual")) {
          dual = overrides["dual"].get<std::string>();
          overrides.erase("dual");
        }
        arm.config.dual_mode = detail::parse_dual_mode(dual);
        if (!overrides.is_null()) detail::apply_outer_overrides(overrides, arm.config);
        cfg.arms.push_back(std::move(arm));
      }
    } else {
      for (auto mode : {DualMode::classical, DualMode::damped}) {
        ArmSpec arm{to_string(mode), shared};
        arm.config.dual_mode = mode;
        cfg.arms.push_back(std::move(arm));
      }
    }

    cfg.output_dir = j.contains("output_dir")
                         ? std::filesystem::path(j["output_dir"].get<std::string>())
                         : default_output_dir();
    cfg.workers = j.value("workers", 1);
    cfg.traces = j.value("traces", true);
    if (j.contains("cca")) {
      for (const auto& [key, v] : j["cca"].items()) {
        if (key == "latent_rank") cfg.cca_latent_rank = v.get<Index>();
        else if (key == "snr") cfg.cca_snr = v.get<double>();
        else throw ConfigError("config: unknown cca option '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

// ---------------------------------------------------------------------------
// Cells

struct CellKey {
  std::size_t grid_index = 0;
  std::size_t seed_index = 0;
  std::size_t arm_index = 0;
};

struct CellResult {
  CellKey key;
  GridPoint point;
  std::uint64_t seed = 0;
  std::string arm;
  bool failed = false;
  std::string error;
  bool converged = false;
  int outer = 0;
  std::int64_t total = 0;
  std::uint64_t oracle_calls = 0;
  double phi = 0.0;
  double spar = 0.0;   ///< whole variable
  double sparu = 0.0;  ///< CCA: U block
  double sparv = 0.0;  ///< CCA: V block
  double cpu_seconds = 0.0;
  std::vector<IterationRecord> history;
};

/// Instance and starting point for one grid point and seed. Data use the seed
/// itself; the starting point uses a derived stream, so it is shared by arms.
struct CellInstance {
  CompositeProblem problem;
  Matrix x1;
  Index split = 0;  ///< CCA: rows of U
};

inline CellInstance make_cell_instance(const ExperimentConfig& cfg,
                                       const GridPoint& g, std::uint64_t seed) {
  auto start = [seed](const CompositeProblem& prob) {
    return prob.manifold().random_point(derive_seed(seed, 1));
  };
  switch (cfg.family) {
    case ProblemFamily::pca: {
      PcaInstance inst{generate_pca_data(g.d, g.n, seed), g.mu, g.r};
      CompositeProblem prob = build_sparse_pca(inst);
      Matrix x1 = start(prob);
      return {std::move(prob), std::move(x1), 0};
    }
    case ProblemFamily::cca: {
      CcaDataOptions opts;
      opts.latent_rank = cfg.cca_latent_rank > 0 ? cfg.cca_latent_rank : g.r;
      opts.snr = cfg.cca_snr;
      auto [a, b] = generate_cca_data(g.d, g.p, g.q, seed, opts);
      CcaInstance inst{std::move(a), std::move(b), g.mu, g.mu, g.r};
      CompositeProblem prob = build_sparse_cca(inst);
      Matrix x1 = start(prob);
      return {std::move(prob), std::move(x1), g.p};
    }
    case ProblemFamily::nonlinear: {
      NonlinearOptions opts;
      opts.mu = g.mu;
      CompositeProblem prob = build_nonlinear_test(g.p, g.r, seed, opts);
      Matrix x1 = start(prob);
      return {std::move(prob), std::move(x1), 0};
    }
  }
  throw ConfigError("unknown problem family");
}

inline CellResult run_cell(const ExperimentConfig& cfg, const CellKey& key) {
  const std::vector<GridPoint> grid = cfg.grid();
  CellResult res;
  res.key = key;
  res.point = grid.at(key.grid_index);
  res.seed = cfg.seeds.at(key.seed_index);
  const ArmSpec& arm = cfg.arms.at(key.arm_index);
  res.arm = arm.name;
  try {
    CellInstance ci = make_cell_instance(cfg, res.point, res.seed);
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult sol = rial_solve(ci.problem, arm.config, ci.x1);
    res.cpu_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.converged = sol.status == SolveStatus::converged;
    res.outer = sol.outer_iterations();
    res.total = sol.total_steps();
    res.oracle_calls = sol.history.empty() ? 0 : sol.history.back().oracle_calls.total();
    res.phi = sol.history.empty() ? 0.0 : sol.history.back().phi;
    const Matrix& x = sol.state.x;
    res.spar = sparsity(x);
    if (ci.split > 0) {
      res.sparu = sparsity(x.topRows(ci.split));
      res.sparv = sparsity(x.bottomRows(x.rows() - ci.split));
    }
    res.history = std::move(sol.history);
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Output tables

inline constexpr const char* kTotalRule =
    "total = sum over outer iterations of (inner RGD steps + 1); the +1 is the "
    "gradient evaluation of the stationarity check at each outer exit";

namespace detail {

inline std::vector<std::string> dim_columns(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::pca:
      return {"d", "n", "r", "mu"};
    case ProblemFamily::cca:
      return {"d", "p", "q", "r", "mu"};
    case ProblemFamily::nonlinear:
      return {"p", "r", "mu"};
  }
  return {};
}

inline CsvRow dim_fields(ProblemFamily f, const GridPoint& g) {
  auto i = [](Index v) { return CsvField(static_cast<std::int64_t>(v)); };
  switch (f) {
    case ProblemFamily::pca:
      return {i(g.d), i(g.n), i(g.r), g.mu};
    case ProblemFamily::cca:
      return {i(g.d), i(g.p), i(g.q), i(g.r), g.mu};
    case ProblemFamily::nonlinear:
      return {i(g.p), i(g.r), g.mu};
  }
  return {};
}

inline std::string cell_tag(ProblemFamily f, const GridPoint& g) {
  std::ostringstream os;
  os << to_string(f);
  if (f != ProblemFamily::nonlinear) os << "_d" << g.d;
  if (f == ProblemFamily::pca) os << "_n" << g.n;
  if (f != ProblemFamily::pca) os << "_p" << g.p;
  if (f == ProblemFamily::cca) os << "_q" << g.q;
  os << "_r" << g.r << "_mu" << format_decimal(g.mu);
  return os.str();
}

}  // namespace detail

inline std::filesystem::path trace_path(const ExperimentConfig& cfg,
                                        const CellResult& c) {
  return cfg.output_dir / "traces" /
         (detail::cell_tag(cfg.family, c.point) + "_seed" + std::to_string(c.seed) +
          "_" + c.arm + ".csv");
}

inline CsvTable trace_table(const CellResult& c) {
  CsvTable t;
  t.comments.push_back(kTotalRule);
  t.header = {"k",      "sigma",        "eps_k",         "phi",
              "r_grad", "r_feas",       "t_k",           "inner_status",
              "total",  "oracle_calls", "cpu"};
  for (const auto& r : c.history) {
    t.rows.push_back({std::int64_t{r.k}, r.sigma, r.eps_k, r.phi, r.r_grad, r.r_feas,
                      std::int64_t{r.inner_iterations},
                      std::string(to_string(r.inner_status)), r.total_steps,
                      static_cast<std::int64_t>(r.oracle_calls.total()),
                      r.wall_seconds});
  }
  return t;
}

/// Per (grid point, arm) means over seeds whose solve did not fail. Contains
/// no timing, so identical configs give identical bytes.
inline CsvTable aggregate_table(const ExperimentConfig& cfg,
                                const std::vector<CellResult>& cells) {
  CsvTable t;
  t.comments.push_back(kTotalRule);
  t.comments.push_back("means over non-failed runs; spar* are percentages of |x_ij| < 1e-5");
  t.header = {"family"};
  for (auto& c : detail::dim_columns(cfg.family)) t.header.push_back(c);
  const bool cca = cfg.family == ProblemFamily::cca;
  for (const char* c : {"arm", "runs", "failures", "converged", "neg_phi"}) {
    t.header.push_back(c);
  }
  if (cca) {
    t.header.push_back("sparu");
    t.header.push_back("sparv");
  } else {
    t.header.push_back("spar");
  }
  for (const char* c : {"outer", "total", "oracle_calls"}) t.header.push_back(c);

  const auto grid = cfg.grid();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::size_t ai = 0; ai < cfg.arms.size(); ++ai) {
      std::int64_t runs = 0, failures = 0, converged = 0;
      double neg_phi = 0, spar = 0, sparu = 0, sparv = 0, outer = 0, total = 0,
             calls = 0;
      for (const auto& c : cells) {
        if (c.key.grid_index != gi || c.key.arm_index != ai) continue;
        ++runs;
        if (c.failed) {
          ++failures;
          continue;
        }
        converged += c.converged ? 1 : 0;
        neg_phi += -c.phi;
        spar += c.spar;
        sparu += c.sparu;
        sparv += c.sparv;
        outer += c.outer;
        total += static_cast<double>(c.total);
        calls += static_cast<double>(c.oracle_calls);
      }
      const double ok = static_cast<double>(runs - failures);
      auto mean = [ok](double s) {
        return ok > 0 ? s / ok : std::numeric_limits<double>::quiet_NaN();
      };
      CsvRow row{std::string(to_string(cfg.family))};
      for (auto& f : detail::dim_fields(cfg.family, grid[gi])) row.push_back(f);
      row.push_back(cfg.arms[ai].name);
      row.push_back(runs);
      row.push_back(failures);
      row.push_back(converged);
      row.push_back(mean(neg_phi));
      if (cca) {
        row.push_back(mean(sparu));
        row.push_back(mean(sparv));
      } else {
        row.push_back(mean(spar));
      }
      row.push_back(mean(outer));
      row.push_back(mean(total));
      row.push_back(mean(calls));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

/// Mean and maximum wall-clock seconds of the solve loop per (grid point, arm).
inline CsvTable timing_table(const ExperimentConfig& cfg,
                             const std::vector<CellResult>& cells) {
  CsvTable t;
  t.comments.push_back("cpu = wall-clock seconds of the solve loop, data generation excluded");
  t.header = {"family"};
  for (auto& c : detail::dim_columns(cfg.family)) t.header.push_back(c);
  for (const char* c : {"arm", "runs", "cpu", "cpu_max"}) t.header.push_back(c);
  const auto grid = cfg.grid();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::size_t ai = 0; ai < cfg.arms.size(); ++ai) {
      std::int64_t runs = 0;
      double sum = 0, mx = 0;
      for (const auto& c : cells) {
        if (c.key.grid_index != gi || c.key.arm_index != ai || c.failed) continue;
        ++runs;
        sum += c.cpu_seconds;
        mx = std::max(mx, c.cpu_seconds);
      }
      CsvRow row{std::string(to_string(cfg.family))};
      for (auto& f : detail::dim_fields(cfg.family, grid[gi])) row.push_back(f);
      row.push_back(cfg.arms[ai].name);
      row.push_back(runs);
      row.push_back(runs ? sum / static_cast<double>(runs)
                         : std::numeric_limits<double>::quiet_NaN());
      row.push_back(mx);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

/// One line per failed cell.
inline CsvTable failure_table(const ExperimentConfig& cfg,
                              const std::vector<CellResult>& cells) {
  CsvTable t;
  t.header = {"family"};
  for (auto& c : detail::dim_columns(cfg.family)) t.header.push_back(c);
  for (const char* c : {"seed", "arm", "error"}) t.header.push_back(c);
  for (const auto& c : cells) {
    if (!c.failed) continue;
    CsvRow row{std::string(to_string(cfg.family))};
    for (auto& f : detail::dim_fields(cfg.family, c.point)) row.push_back(f);
    row.push_back(static_cast<std::int64_t>(c.seed));
    row.push_back(c.arm);
    row.push_back(c.error);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------

struct ExperimentSummary {
  std::vector<CellResult> cells;  ///< ordered by (grid point, seed, arm)
  CsvTable aggregate;
  std::filesystem::path aggregate_path;
  std::size_t failures = 0;

  /// 0 when every cell ran, 1 when some failed.
  int exit_code() const { return failures == 0 ? 0 : 1; }
};

using CellCallback = std::function<void(const CellResult&)>;

/// Runs every (grid point, seed, arm) cell on up to cfg.workers threads, then
/// writes aggregate.csv, timing.csv, failures.csv (when any) and per-cell
/// traces under cfg.output_dir. Output order depends only on the config.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg,
                                        const CellCallback& on_cell = {}) {
  cfg.validate();
  const std::size_t n_grid = cfg.grid().size();
  std::vector<CellKey> keys;
  for (std::size_t g = 0; g < n_grid; ++g)
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
      for (std::size_t a = 0; a < cfg.arms.size(); ++a) keys.push_back({g, s, a});

  std::vector<CellResult> cells(keys.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < keys.size();) {
      cells[i] = run_cell(cfg, keys[i]);
      if (on_cell) {
        std::lock_guard lock(report);
        on_cell(cells[i]);
      }
    }
  };
  const int n_threads =
      static_cast<int>(std::min<std::size_t>(cfg.workers, keys.size()));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }

  ExperimentSummary sum;
  for (const auto& c : cells) sum.failures += c.failed ? 1 : 0;
  sum.aggregate = aggregate_table(cfg, cells);
  sum.aggregate_path = cfg.output_dir / "aggregate.csv";
  emit_csv(sum.aggregate, sum.aggregate_path);
  emit_csv(timing_table(cfg, cells), cfg.output_dir / "timing.csv");
  const auto failures_path = cfg.output_dir / "failures.csv";
  if (sum.failures > 0) {
    emit_csv(failure_table(cfg, cells), failures_path);
  } else {
    std::error_code ec;
    std::filesystem::remove(failures_path, ec);
  }
  if (cfg.traces) {
    for (const auto& c : cells) {
      if (!c.failed) emit_csv(trace_table(c), trace_path(cfg, c));
    }
  }
  sum.cells = std::move(cells);
  return sum;
}

}  // namespace rial

#endif  // RIAL_EXPERIMENT_HPP
