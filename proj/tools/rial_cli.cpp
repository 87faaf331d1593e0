// rial: run sparse PCA / CCA experiments, self-checks and outer-count
// predictions from the command line.
//
//   rial run CONFIG [--seed N] [--out DIR] [--arm classical|damped|both] [--workers N]
//   rial check [--seed N]
//   rial predict (--lh L | --mu MU --rows M --cols N) [--sigma1 S] [--eps1 E] [--b B] [--eps E]

#include "rial/checks.hpp"
#include "rial/experiment.hpp"
#include "rial/rial.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::string& out, const std::string& arm,
                std::optional<int> workers, bool quiet) {
  rial::ExperimentConfig cfg;
  try {
    cfg = rial::load_experiment_config(config_path);
    if (seed) cfg.seeds = {*seed};
    if (!out.empty()) cfg.output_dir = out;
    if (workers) cfg.workers = *workers;
    if (arm != "both") {
      std::erase_if(cfg.arms, [&](const rial::ArmSpec& a) { return a.name != arm; });
      if (cfg.arms.empty()) {
        throw rial::ConfigError("config: no arm named '" + arm + "'");
      }
    }
    cfg.validate();
  } catch (const rial::Error& e) {
    std::cerr << "rial: " << e.what() << "\n";
    return kExitConfig;
  }

  auto progress = [quiet](const rial::CellResult& c) {
    if (quiet) return;
    if (c.failed) {
      std::cerr << "  seed " << c.seed << " " << c.arm << ": FAILED " << c.error << "\n";
      return;
    }
    std::cerr << "  seed " << c.seed << " " << c.arm << ": "
              << (c.converged ? "converged" : "not converged") << ", outer " << c.outer
              << ", total " << c.total << ", phi " << c.phi << "\n";
  };
  rial::ExperimentSummary sum;
  try {
    sum = rial::run_experiment(cfg, progress);
  } catch (const rial::ConfigError& e) {
    std::cerr << "rial: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "rial: " << e.what() << "\n";
    return 1;
  }
  std::cout << rial::render_csv(sum.aggregate);
  std::cerr << "wrote " << sum.aggregate_path.string() << " (" << sum.cells.size()
            << " runs, " << sum.failures << " failed)\n";
  return sum.exit_code();
}

int check_command(std::uint64_t seed) {
  int failed = 0;
  for (const auto& c : rial::run_builtin_checks(seed)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    failed += c.passed ? 0 : 1;
  }
  std::cout << (failed ? std::to_string(failed) + " check(s) failed" : "all checks passed")
            << "\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian augmented Lagrangian experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment config");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string arm = "both";
  std::optional<int> workers;
  bool quiet = false;
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--seed", seed, "run this single seed instead of the config's");
  run->add_option("--out", out, "output directory (default: config, then $RIAL_OUTPUT_DIR)");
  run->add_option("--arm", arm, "arm to run")
      ->check(CLI::IsMember({"classical", "damped", "both"}));
  run->add_option("--workers", workers, "parallel solves")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "no per-run progress");

  auto* check = app.add_subcommand("check", "run the property suite on built-in instances");
  std::uint64_t check_seed = 1;
  check->add_option("--seed", check_seed, "seed for the random trials");

  auto* predict = app.add_subcommand("predict", "outer iterations needed for eps-stationarity");
  std::optional<double> lh;
  std::optional<double> mu;
  std::optional<long> rows;
  std::optional<long> cols;
  double sigma1 = 1.5, eps1 = 1.5, b = 1.5, eps = 1e-5;
  predict->add_option("--lh", lh, "Lipschitz constant of h");
  predict->add_option("--mu", mu, "l1 weight; L_h = mu*sqrt(rows*cols)");
  predict->add_option("--rows", rows, "rows of h's argument");
  predict->add_option("--cols", cols, "columns of h's argument");
  predict->add_option("--sigma1", sigma1, "first penalty");
  predict->add_option("--eps1", eps1, "first inner tolerance");
  predict->add_option("--b", b, "growth factor");
  predict->add_option("--eps", eps, "target tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, seed, out, arm, workers, quiet);
    if (*check) return check_command(check_seed);
    if (*predict) {
      double l = 0.0;
      if (lh) {
        l = *lh;
      } else if (mu && rows && cols) {
        l = *mu * std::sqrt(static_cast<double>(*rows) * static_cast<double>(*cols));
      } else {
        std::cerr << "rial predict: give --lh or all of --mu, --rows, --cols\n";
        return kExitConfig;
      }
      std::cout << rial::predict_outer_iterations(l, sigma1, eps1, b, eps) << "\n";
      return 0;
    }
  } catch (const rial::ParameterError& e) {
    std::cerr << "rial: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "rial: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
