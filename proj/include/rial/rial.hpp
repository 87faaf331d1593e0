#ifndef RIAL_RIAL_HPP
#define RIAL_RIAL_HPP

#include "rial/inner_rgd.hpp"
#include "rial/problem.hpp"
#include "rial/types.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace rial {

enum class DualMode { classical, damped };

inline const char* to_string(DualMode m) {
  return m == DualMode::classical ? "classical" : "damped";
}

struct OuterConfig {
  double eps = 1e-5;     ///< target stationarity
  double eps1 = 1.5;     ///< first inner tolerance
  double sigma1 = 1.5;   ///< first penalty
  double b = 1.5;        ///< schedule growth factor
  int max_outer = 100;
  DualMode dual_mode = DualMode::classical;
  double beta0 = 1.0;    ///< damped dual scale
  InnerConfig inner;
  std::uint64_t seed = 0;  ///< initial point when none is given
  bool check_invariants = false;

  void validate() const {
    if (!(b > 1.0)) throw ParameterError("b must be > 1");
    if (!(sigma1 > 0.0) || !(eps1 > 0.0) || !(eps > 0.0)) {
      throw ParameterError("sigma1, eps1 and eps must be > 0");
    }
    if (!(beta0 > 0.0)) throw ParameterError("beta0 must be > 0");
    if (max_outer < 1) throw ParameterError("max_outer must be >= 1");
    inner.validate();
  }
};

struct ALState {
  int k = 1;  ///< index of the next outer iteration
  Matrix x;
  Matrix y;
  Matrix z;
  double sigma = 0.0;
  double eps = 0.0;
};

struct IterationRecord {
  int k = 0;
  double sigma = 0.0;  ///< σ_k used by this iteration
  double eps_k = 0.0;  ///< inner tolerance ε_k
  double phi = 0.0;    ///< Φ(x_{k+1})
  double r_grad = 0.0;
  double r_feas = 0.0;
  double z_norm = 0.0;  ///< ‖z_{k+1}‖
  int inner_iterations = 0;
  InnerStatus inner_status = InnerStatus::converged;
  double inner_grad_norm = 0.0;
  std::int64_t total_steps = 0;  ///< cumulative Σ(t_k + 1)
  OracleCounts oracle_calls;     ///< cumulative
  double wall_seconds = 0.0;     ///< cumulative

  bool inner_converged() const { return inner_status == InnerStatus::converged; }
};

enum class SolveStatus { converged, max_outer_reached };

inline const char* to_string(SolveStatus s) {
  return s == SolveStatus::converged ? "converged" : "max_outer_reached";
}

struct SolveResult {
  ALState state;
  std::vector<IterationRecord> history;
  SolveStatus status = SolveStatus::max_outer_reached;

  int outer_iterations() const { return static_cast<int>(history.size()); }
  std::int64_t total_steps() const {
    return history.empty() ? 0 : history.back().total_steps;
  }
};

using RecordSink = std::function<void(const IterationRecord&)>;

/// Multiplier step. Classical: z + σ·r. Damped:
/// z + β₀·min(‖r₁‖ log²2 / (‖r‖ (k+1)² log(k+2)), 1)·r, where the factor is
/// 1 when ‖r‖ = 0 (the step vanishes either way).
inline Matrix dual_update(DualMode mode, const Matrix& z, double sigma,
                          const Matrix& residual, int k, double beta0,
                          double initial_residual_norm) {
  if (!(sigma > 0.0)) throw ParameterError("dual_update: sigma must be > 0");
  if (z.rows() != residual.rows() || z.cols() != residual.cols()) {
    throw DimensionError("dual_update: z and residual differ in shape");
  }
  if (mode == DualMode::classical) return z + sigma * residual;
  const double rn = residual.norm();
  double factor = 1.0;
  if (rn > 0.0) {
    const double ln2 = std::numbers::ln2;
    const double kp1 = static_cast<double>(k) + 1.0;
    factor = std::min(initial_residual_norm * ln2 * ln2 /
                          (rn * kp1 * kp1 * std::log(static_cast<double>(k) + 2.0)),
                      1.0);
  }
  return z + beta0 * factor * residual;
}

/// (σ, ε) ↦ (bσ, ε/b).
inline std::pair<double, double> schedule_update(double sigma, double eps,
                                                 double b) {
  if (!(b > 1.0)) throw ParameterError("schedule_update: b must be > 1");
  return {b * sigma, eps / b};
}

/// K = 1 + ⌈log_b(max{2L_h/σ₁, ε₁}/ε)⌉: the outer iteration after which the
/// classical method's iterate is ε-stationary when every inner solve succeeds.
inline int predict_outer_iterations(double lh, double sigma1, double eps1,
                                    double b, double eps) {
  if (!(lh >= 0.0) || !(sigma1 > 0.0) || !(eps1 > 0.0) || !(eps > 0.0)) {
    throw ParameterError("predict_outer_iterations: inputs must be positive");
  }
  if (!(b > 1.0)) throw ParameterError("predict_outer_iterations: b must be > 1");
  const double top = std::max(2.0 * lh / sigma1, eps1);
  if (eps >= top) return 1;
  const double exponent = std::log(top / eps) / std::log(b);
  // absorb roundoff when top/eps is an exact power of b
  return 1 + static_cast<int>(std::ceil(exponent - 1e-12));
}

/// Riemannian inexact augmented Lagrangian method with an RGD inner solver.
///
/// Per outer iteration k: RGD on L_k from the warm start x_k to tolerance ε_k;
/// y ← prox_{h/σ_k}(A(x) + z/σ_k); dual step; σ ← bσ, ε_k ← ε_k/b. Stops when
/// both stationarity residuals of (x_{k+1}, y_{k+1}, z_{k+1}) are ≤ ε.
inline SolveResult rial_solve(const CompositeProblem& problem,
                              const OuterConfig& cfg,
                              const std::optional<Matrix>& x1 = std::nullopt,
                              const RecordSink& sink = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Manifold& m = problem.manifold();
  const NonsmoothTerm& h = problem.nonsmooth();

  OracleOptions opts;
  opts.check_invariants = cfg.check_invariants;
  AlOracle oracle(problem, opts);

  SolveResult out;
  ALState& st = out.state;
  st.x = x1 ? *x1 : m.random_point(cfg.seed);
  m.require_feasible("rial_solve: initial point", st.x);
  st.y = Matrix::Zero(h.rows(), h.cols());
  st.z = Matrix::Zero(h.rows(), h.cols());
  st.sigma = cfg.sigma1;
  st.eps = cfg.eps1;

  double initial_residual = 0.0;
  if (cfg.dual_mode == DualMode::damped) {
    initial_residual = (oracle.mapping_value(st.x) - st.y).norm();
  }

  std::int64_t total_steps = 0;
  for (int k = 1; k <= cfg.max_outer; ++k) {
    st.k = k;
    InnerResult inner = rgd_solve(oracle, st.sigma, st.z, st.x, st.eps, cfg.inner);
    st.x = std::move(inner.x);
    st.y = oracle.auxiliary_point(st.sigma, st.z, st.x);
    const Matrix residual = oracle.mapping_value(st.x) - st.y;
    Matrix z_next = dual_update(cfg.dual_mode, st.z, st.sigma, residual, k,
                                cfg.beta0, initial_residual);
    // The certificate must lie in ∂h(y_{k+1}). The classical z_{k+1} does;
    // a damped z_{k+1} generally does not, so damped runs are certified with
    // the full-step multiplier z_k + σ_k(A(x_{k+1}) − y_{k+1}) instead.
    const StationarityResiduals r =
        cfg.dual_mode == DualMode::classical
            ? oracle.stationarity_residuals(st.x, st.y, z_next)
            : oracle.stationarity_residuals(
                  st.x, st.y, dual_update(DualMode::classical, st.z, st.sigma,
                                          residual, k, cfg.beta0, 0.0));
    total_steps += inner.iterations + 1;

    IterationRecord rec;
    rec.k = k;
    rec.sigma = st.sigma;
    rec.eps_k = st.eps;
    rec.phi = oracle.phi_value(st.x);
    rec.r_grad = r.r_grad;
    rec.r_feas = r.r_feas;
    rec.z_norm = z_next.norm();
    rec.inner_iterations = inner.iterations;
    rec.inner_status = inner.status;
    rec.inner_grad_norm = inner.grad_norm;
    rec.total_steps = total_steps;
    rec.oracle_calls = oracle.counts();
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.history.push_back(rec);
    if (sink) sink(rec);

    st.z = std::move(z_next);
    std::tie(st.sigma, st.eps) = schedule_update(st.sigma, st.eps, cfg.b);
    st.k = k + 1;

    if (r.r_grad <= cfg.eps && r.r_feas <= cfg.eps) {
      out.status = SolveStatus::converged;
      break;
    }
  }
  return out;
}

}  // namespace rial

#endif  // RIAL_RIAL_HPP
