// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "rial/checks.hpp"
#include "rial/experiment.hpp"
#include "rial/inner_rgd.hpp"
#include "rial/nonsmooth.hpp"
#include "rial/problems.hpp"
#include "rial/rial.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace rial;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Verdict {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  std::cout << (v.passed ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " ("
            << v.detail << ")" << std::endl;
  failures += v.passed ? 0 : 1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rial-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1 -------------------------------------------------------------------------

Verdict gradient_fidelity() {
  const auto t0 = Clock::now();
  const PcaInstance pca{generate_pca_data(30, 20, 1), 0.3, 3};
  const auto [a, b] = generate_cca_data(60, 15, 15, 1, CcaDataOptions{2, 1.0});
  const CompositeProblem problems[] = {build_sparse_pca(pca),
                                       build_sparse_cca({a, b, 0.05, 0.05, 2}),
                                       build_nonlinear_test(12, 3, 1)};
  Verdict v{true, ""};
  for (const auto& p : problems) {
    const CheckResult c = check_al_gradient(p, 20, 7);
    v.passed = v.passed && c.passed;
    v.detail += p.name() + " " + c.detail + "; ";
  }
  const double secs = seconds_since(t0);
  v.passed = v.passed && secs < 10.0;
  v.detail += num(secs) + " s";
  return v;
}

// 2 -------------------------------------------------------------------------

Verdict moreau_oracle() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> wd(-2.5, 2.5), ld(0.05, 2.0), md(0.0, 1.5);
  double prox_err = 0, env_err = 0, formula_err = 0, fd_err = 0;
  for (int t = 0; t < 100; ++t) {
    const double w = wd(gen), lambda = ld(gen), mu = md(gen);
    const NonsmoothTerm h = NonsmoothTerm::l1(mu, 1, 1);
    const Matrix wm = Matrix::Constant(1, 1, w);
    double best_u = 0, best = INFINITY;
    for (int i = -30000; i <= 30000; ++i) {
      const double u = i * 1e-4;
      const double val = mu * std::abs(u) + (u - w) * (u - w) / (2 * lambda);
      if (val < best) {
        best = val;
        best_u = u;
      }
    }
    const double p = prox(h, lambda, wm)(0, 0);
    prox_err = std::max(prox_err, std::abs(p - best_u));
    env_err = std::max(env_err, std::abs(moreau_value(h, lambda, wm) - best));
    const double g = moreau_gradient(h, lambda, wm)(0, 0);
    formula_err = std::max(formula_err, std::abs(g - (w - p) / lambda));
    const double d = 1e-6;
    // central differences straddling a kink are not a derivative test
    if (std::abs(std::abs(w) - lambda * mu) > 10 * d) {
      const double fd = (moreau_value(h, lambda, Matrix::Constant(1, 1, w + d)) -
                         moreau_value(h, lambda, Matrix::Constant(1, 1, w - d))) /
                        (2 * d);
      fd_err = std::max(fd_err, std::abs(fd - g) / std::max(1.0, std::abs(g)));
    }
  }
  return {prox_err <= 1e-3 && env_err <= 1e-3 && formula_err == 0.0 && fd_err <= 1e-6,
          "prox " + num(prox_err) + ", envelope " + num(env_err) + ", formula " +
              num(formula_err) + ", fd " + num(fd_err)};
}

// 3, 4 ----------------------------------------------------------------------

struct DeskRuns {
  Verdict invariants;
  Verdict termination;
};

DeskRuns desk_pca() {
  constexpr Index d = 100, n = 50, r = 5;
  constexpr double mu = 0.5;
  int violations = 0, unconverged = 0, over_k = 0, slow = 0, max_outer = 0;
  double max_secs = 0;
  std::string first;
  OuterConfig cfg;
  const double lh = mu * std::sqrt(static_cast<double>(d * r));
  const int k_pred = predict_outer_iterations(lh, cfg.sigma1, cfg.eps1, cfg.b, cfg.eps);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const CompositeProblem p = build_sparse_pca({generate_pca_data(d, n, seed), mu, r});
    const Matrix x1 = p.manifold().random_point(derive_seed(seed, 1));
    const auto t0 = Clock::now();
    const SolveResult res = rial_solve(p, cfg, x1, [&](const IterationRecord& rec) {
      auto flag = [&](bool bad, const std::string& what) {
        if (bad && violations++ == 0) {
          first = what + " (seed " + std::to_string(seed) + ", k=" + std::to_string(rec.k) + ")";
        }
      };
      flag(rec.z_norm > lh + kMultiplierSlack, "|z| > mu sqrt(dr)");
      flag(rec.r_feas > 2 * lh / rec.sigma + kMultiplierSlack, "r_feas > 2L_h/sigma");
      flag(rec.inner_converged() && rec.r_grad > rec.eps_k, "r_grad > eps_k");
    });
    const double secs = seconds_since(t0);
    max_secs = std::max(max_secs, secs);
    slow += secs >= 60.0;
    const auto& last = res.history.back();
    if (res.status != SolveStatus::converged || last.r_grad > cfg.eps || last.r_feas > cfg.eps) {
      ++unconverged;
    }
    over_k += res.outer_iterations() > k_pred;
    max_outer = std::max(max_outer, res.outer_iterations());
  }
  DeskRuns out;
  out.invariants = {violations == 0,
                    std::to_string(violations) + " violations" + (first.empty() ? "" : ", first " + first)};
  out.termination = {unconverged == 0 && over_k == 0 && slow == 0,
                     std::to_string(10 - unconverged) + "/10 converged, max outer " +
                         std::to_string(max_outer) + " vs K=" + std::to_string(k_pred) +
                         ", max " + num(max_secs) + " s per instance"};
  return out;
}

// 5 -------------------------------------------------------------------------

Verdict classical_vs_damped() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::string pca = R"({
    "problem": "pca",
    "grid": {"d": [200], "n": [50], "r": [5], "mu": [0.5, 1.0]},
    "seeds": {"start": 1, "count": 20},
    "traces": false
  })";
  const std::string cca = R"({
    "problem": "cca",
    "grid": {"d": [200], "p": [50], "q": [50], "r": [2], "mu": [0.05]},
    "seeds": {"start": 1, "count": 20},
    "traces": false
  })";
  Verdict v{true, ""};
  for (const auto& [label, text] : {std::pair{"pca", pca}, std::pair{"cca", cca}}) {
    ExperimentConfig cfg = parse_experiment_config(text);
    cfg.output_dir = scratch(std::string("direction-") + label);
    cfg.workers = static_cast<int>(hw);
    const ExperimentSummary sum = run_experiment(cfg);
    // (grid index, arm) → sums over all 20 seeds
    std::map<std::pair<std::size_t, std::string>, std::array<double, 3>> acc;
    for (const auto& c : sum.cells) {
      auto& a = acc[{c.key.grid_index, c.arm}];
      a[0] += c.outer;
      a[1] += static_cast<double>(c.total);
      a[2] += c.failed ? 0.0 : (c.converged ? 1.0 : 0.0);
    }
    const auto grid = cfg.grid();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto& cl = acc[{g, "classical"}];
      const auto& dm = acc[{g, "damped"}];
      const double n = static_cast<double>(cfg.seeds.size());
      const bool ok = cl[0] < dm[0] && cl[1] < dm[1];
      v.passed = v.passed && ok && sum.failures == 0;
      v.detail += std::string(label) + " mu=" + num(grid[g].mu) + ": outer " +
                  num(cl[0] / n) + " vs " + num(dm[0] / n) + ", total " + num(cl[1] / n) +
                  " vs " + num(dm[1] / n) + ", converged " + num(cl[2]) + "/" + num(dm[2]) +
                  (ok ? "" : " [direction not met]") + "; ";
    }
  }
  v.detail += "classical vs damped means over 20 seeds";
  return v;
}

// 6 -------------------------------------------------------------------------

Verdict exact_baselines() {
  const Matrix a = generate_pca_data(50, 50, 6);
  const CompositeProblem pca = build_sparse_pca({a, 0.0, 3});
  OuterConfig cfg;
  const SolveResult rp = rial_solve(pca, cfg, pca.manifold().random_point(derive_seed(6, 1)));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a * a.transpose(), Eigen::EigenvaluesOnly);
  const double top3 = eig.eigenvalues().tail(3).sum();
  const double pca_err = std::abs(-rp.history.back().phi - top3) / top3;

  const auto [ca, cb] = generate_cca_data(200, 20, 20, 6, CcaDataOptions{1, 1.0});
  const CcaInstance inst{ca, cb, 0.0, 0.0, 1};
  const CompositeProblem cca = build_sparse_cca(inst);
  const SolveResult rc = rial_solve(cca, cfg, cca.manifold().random_point(derive_seed(6, 1)));
  const CcaCovariances cov = cca_covariances(inst);
  auto inv_sqrt = [](const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> e(s);
    return Matrix(e.eigenvectors() * e.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                  e.eigenvectors().transpose());
  };
  const double rho =
      Eigen::JacobiSVD<Matrix>(inv_sqrt(cov.saa) * cov.sab * inv_sqrt(cov.sbb)).singularValues()(0);
  const double cca_err = std::abs(-rc.history.back().phi - rho) / rho;
  return {pca_err <= 1e-4 && cca_err <= 1e-3,
          "pca top-3 eigenvalue sum rel err " + num(pca_err) + ", cca top correlation " +
              num(rho) + " rel err " + num(cca_err)};
}

// 7 -------------------------------------------------------------------------

Verdict manifold_suite() {
  Rng rng(77);
  const Matrix g1 = gaussian_matrix(40, 12, rng);
  const Matrix ga = g1.transpose() * g1 / 40.0 + 0.1 * Matrix::Identity(12, 12);
  const Matrix g2 = gaussian_matrix(30, 9, rng);
  const Matrix gb = g2.transpose() * g2 / 30.0 + 0.1 * Matrix::Identity(9, 9);
  const Manifold gsa = Manifold::generalized_stiefel(ga, 3);
  const std::pair<Manifold, std::string> manifolds[] = {
      {Manifold::stiefel(15, 4), "stiefel(15,4)"},
      {Manifold::stiefel(15, 4, RetractionKind::polar), "stiefel(15,4) polar"},
      {gsa, "generalized stiefel(12,3)"},
      {Manifold::generalized_stiefel(ga, 3, RetractionKind::polar), "generalized stiefel(12,3) polar"},
      {Manifold::product({gsa, Manifold::generalized_stiefel(gb, 3)}), "product"}};
  Verdict v{true, ""};
  int checks = 0;
  for (const auto& [m, label] : manifolds) {
    for (const auto& c : check_manifold(m, label, 200, 7)) {
      ++checks;
      if (!c.passed) {
        v.passed = false;
        v.detail += c.name + " " + c.detail + "; ";
      }
    }
  }
  v.detail += std::to_string(checks) + " checks over 200 trials per manifold";
  return v;
}

// 8 -------------------------------------------------------------------------

Verdict theoretical_mode() {
  // The unit circle (a one-dimensional manifold) with f(x) = ⟨c, x⟩, A = id
  // and h = μ‖·‖₁; the QR retraction there has α₁ = 1 and α₂ = 1/2.
  constexpr double mu = 0.3;
  Matrix c(2, 1);
  c << 0.8, -0.3;
  CompositeProblem p(Manifold::stiefel(2, 1),
                     {[c](const Matrix& x) { return inner(c, x); }, [c](const Matrix&) { return c; }},
                     Mapping::identity(2, 1), NonsmoothTerm::l1(mu, 2, 1), "circle");
  SmoothnessConstants k;
  k.lh = mu * std::sqrt(2.0);
  k.la0 = 1.0;
  k.rho_a = 1.0;
  k.alpha1 = 1.0;
  k.alpha2 = 0.5;
  p.set_constants(k);
  InnerConfig cfg;
  cfg.stepsize_mode = StepsizeMode::theoretical;
  cfg.max_inner_iters = 100000;
  int steps = 0, increases = 0, violations = 0, unconverged = 0;
  Matrix z(2, 1);
  z << 0.1, -0.2;
  Matrix x0(2, 1);
  x0 << 0.0, 1.0;
  for (double sigma : {1.0, 10.0, 100.0}) {
    AlOracle o(p);
    const InnerResult r = rgd_solve(o, sigma, z, x0, 1e-6, cfg);
    steps += r.iterations;
    violations += r.descent_violations;
    unconverged += !r.converged();
    for (std::size_t i = 1; i < r.values.size(); ++i) increases += r.values[i] > r.values[i - 1];
  }
  return {increases == 0 && violations == 0 && unconverged == 0,
          std::to_string(steps) + " steps over sigma in {1,10,100}, " + std::to_string(increases) +
              " increases, " + std::to_string(violations) + " descent-bound violations"};
}

// 9 -------------------------------------------------------------------------

Verdict cli_determinism() {
  const fs::path dir = scratch("determinism");
  {
    std::ofstream(dir / "config.json") << R"({
      "problem": "pca",
      "grid": {"d": [60], "n": [30], "r": [3], "mu": [0.5, 1.0]},
      "seeds": [1, 2]
    })";
  }
  std::string out[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path o = dir / ("run" + std::to_string(i));
    const std::string cmd = std::string("\"") + RIAL_CLI_PATH + "\" run \"" +
                            (dir / "config.json").string() + "\" -q --out \"" + o.string() +
                            "\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "cli run failed"};
    std::ifstream in(o / "aggregate.csv", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[i] = ss.str();
  }
  const bool same = !out[0].empty() && out[0] == out[1];
  return {same, std::to_string(out[0].size()) + " bytes, " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  try {
    report(1, "AL gradient matches finite differences", gradient_fidelity());
    report(2, "prox and Moreau envelope match brute force", moreau_oracle());
    const DeskRuns desk = desk_pca();
    report(3, "classical invariants on sparse PCA d=100", desk.invariants);
    report(4, "eps-stationarity within the cap and predicted K", desk.termination);
    report(5, "classical beats damped on outer and total", classical_vs_damped());
    report(6, "unpenalized PCA and CCA match dense oracles", exact_baselines());
    report(7, "manifold property suite", manifold_suite());
    report(8, "theoretical stepsize descends monotonically", theoretical_mode());
    report(9, "cli run is byte-for-byte deterministic", cli_determinism());
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : "all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
