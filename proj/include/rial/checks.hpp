#ifndef RIAL_CHECKS_HPP
#define RIAL_CHECKS_HPP

#include "rial/manifold.hpp"
#include "rial/problem.hpp"
#include "rial/problems.hpp"
#include "rial/random.hpp"
#include "rial/rial.hpp"
#include "rial/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace rial {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace detail

/// Projection idempotence and orthogonality, retraction feasibility and the
/// first-order retraction slope, over random points and tangents.
inline std::vector<CheckResult> check_manifold(const Manifold& m,
                                               const std::string& label,
                                               int trials, std::uint64_t seed) {
  double idem = 0, ortho = 0, feas = 0, slope = 0;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(t));
    const Matrix x = m.random_point(s);
    const Matrix v = gaussian_matrix(m.rows(), m.cols(), rng);
    const Matrix pv = m.tangent_project(x, v);
    idem = std::max(idem, (m.tangent_project(x, pv) - pv).norm() /
                              std::max(1.0, pv.norm()));
    const Matrix w = m.random_tangent(x, derive_seed(s, 7));
    ortho = std::max(ortho, std::abs(m.metric(v - pv, w)) /
                                std::max(1.0, v.norm() * w.norm()));
    const Matrix xi = m.random_tangent(x, derive_seed(s, 9));
    feas = std::max(feas, m.check_feasibility(m.retract(x, xi)));
    // ‖R_x(tξ) − x − tξ‖ = O(t²): halving t should quarter the gap
    const double t1 = 1e-3, t2 = 5e-4;
    const double g1 = (m.retract(x, t1 * xi) - x - t1 * xi).norm();
    const double g2 = (m.retract(x, t2 * xi) - x - t2 * xi).norm();
    if (g1 > 1e-14) slope = std::max(slope, g2 / g1);
  }
  return {
      {label + ": projection idempotent", idem <= 1e-10, "max " + detail::fmt(idem)},
      {label + ": projection orthogonal", ortho <= 1e-8, "max " + detail::fmt(ortho)},
      {label + ": retraction feasible", feas <= kFreshFeasibilityTol,
       "max " + detail::fmt(feas)},
      {label + ": retraction first order", slope <= 0.3,
       "max ratio " + detail::fmt(slope)},
  };
}

/// Central differences of L_k along random ambient directions against
/// ⟨∇L_k, v⟩.
inline CheckResult check_al_gradient(const CompositeProblem& problem, int trials,
                                     std::uint64_t seed) {
  AlOracle oracle(problem);
  const Manifold& m = problem.manifold();
  const NonsmoothTerm& h = problem.nonsmooth();
  Rng rng(seed);
  double worst = 0.0;
  const double sigmas[] = {1.0, 10.0, 100.0};
  for (int t = 0; t < trials; ++t) {
    const double sigma = sigmas[t % 3];
    const Matrix x = m.random_point(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const Matrix z = 0.5 * gaussian_matrix(h.rows(), h.cols(), rng);
    Matrix v = gaussian_matrix(m.rows(), m.cols(), rng);
    v /= v.norm();
    const double step = 1e-6;
    const double fd = (oracle.al_value(sigma, z, x + step * v) -
                       oracle.al_value(sigma, z, x - step * v)) /
                      (2.0 * step);
    const double an = inner(oracle.al_euclidean_gradient(sigma, z, x), v);
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  return {problem.name() + ": AL gradient vs finite differences", worst <= 1e-5,
          "max rel err " + detail::fmt(worst)};
}

/// Classical solve with invariant checks on; verifies ‖z_{k+1}‖ ≤ L_h,
/// r_feas ≤ 2L_h/σ_k and, for converged inner solves, r_grad ≤ ε_k.
inline CheckResult check_solver_invariants(const CompositeProblem& problem,
                                           OuterConfig cfg) {
  cfg.dual_mode = DualMode::classical;
  cfg.check_invariants = true;
  const double lh = problem.nonsmooth().lipschitz_bound();
  int violations = 0;
  std::string first;
  SolveResult res;
  try {
    res = rial_solve(problem, cfg, std::nullopt, [&](const IterationRecord& r) {
      auto flag = [&](bool bad, const char* what) {
        if (!bad) return;
        if (violations++ == 0) first = std::string(what) + " at k=" + std::to_string(r.k);
      };
      flag(r.z_norm > lh + kMultiplierSlack, "|z| > L_h");
      flag(r.r_feas > 2.0 * lh / r.sigma + kMultiplierSlack, "r_feas > 2L_h/sigma");
      flag(r.inner_converged() && r.r_grad > r.eps_k, "r_grad > eps_k");
    });
  } catch (const InvariantViolation& e) {
    return {problem.name() + ": solver invariants", false, e.what()};
  }
  std::string detail = std::to_string(res.outer_iterations()) + " outer, " +
                       to_string(res.status);
  if (violations) detail += ", " + std::to_string(violations) + " violations, first " + first;
  return {problem.name() + ": solver invariants", violations == 0, detail};
}

/// The property suite on small built-in instances.
inline std::vector<CheckResult> run_builtin_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto append = [&out](std::vector<CheckResult> more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  append(check_manifold(Manifold::stiefel(12, 3), "stiefel(12,3)", 100, seed));
  {
    Rng rng(derive_seed(seed, 100));
    const Matrix a = gaussian_matrix(30, 10, rng);
    const Matrix g = a.transpose() * a / 30.0 + 0.1 * Matrix::Identity(10, 10);
    const Manifold gs = Manifold::generalized_stiefel(g, 3);
    append(check_manifold(gs, "generalized stiefel(10,3)", 100, seed));
    append(check_manifold(Manifold::product({gs, Manifold::stiefel(8, 3)}),
                          "product", 100, seed));
  }

  const PcaInstance pca{generate_pca_data(30, 20, seed), 0.2, 3};
  const CompositeProblem pca_problem = build_sparse_pca(pca);
  const auto [ca, cb] = generate_cca_data(60, 15, 15, seed, CcaDataOptions{2, 1.0});
  const CcaInstance cca{ca, cb, 0.02, 0.02, 2};
  const CompositeProblem cca_problem = build_sparse_cca(cca);
  const CompositeProblem nl_problem = build_nonlinear_test(12, 3, seed);
  for (const CompositeProblem* p : {&pca_problem, &cca_problem, &nl_problem}) {
    out.push_back(check_al_gradient(*p, 20, seed));
  }

  OuterConfig cfg;
  cfg.seed = derive_seed(seed, 1);
  out.push_back(check_solver_invariants(pca_problem, cfg));
  out.push_back(check_solver_invariants(nl_problem, cfg));
  return out;
}

}  // namespace rial

#endif  // RIAL_CHECKS_HPP
