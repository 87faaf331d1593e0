#ifndef RIAL_INNER_RGD_HPP
#define RIAL_INNER_RGD_HPP

#include "rial/problem.hpp"
#include "rial/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

namespace rial {

enum class StepsizeMode { bb_backtracking, theoretical };

enum class InnerStatus { converged, iteration_cap, line_search_stall };

inline const char* to_string(InnerStatus s) {
  switch (s) {
    case InnerStatus::converged:
      return "converged";
    case InnerStatus::iteration_cap:
      return "iteration_cap";
    case InnerStatus::line_search_stall:
      return "line_search_stall";
  }
  return "unknown";
}

struct InnerConfig {
  StepsizeMode stepsize_mode = StepsizeMode::bb_backtracking;
  int max_inner_iters = 5000;
  double armijo = 1e-4;
  double shrink = 0.5;
  double step_min = 1e-10;
  double step_max = 1e10;
  /// Length of the nonmonotone reference window; 1 is plain Armijo.
  int nonmonotone_window = 1;
  int max_backtracks = 60;
  /// Relative floating-point allowance on the sufficient-decrease test,
  /// scaled by max(1, |reference value|).
  double roundoff = 1e-13;
  /// Required for the theoretical stepsize; overrides the problem's constants.
  std::optional<SmoothnessConstants> constants;

  void validate() const {
    if (!(shrink > 0.0 && shrink < 1.0)) throw ParameterError("shrink must lie in (0,1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ParameterError("armijo constant must lie in (0,1)");
    if (!(step_min > 0.0 && step_min < step_max)) throw ParameterError("need 0 < step_min < step_max");
    if (max_inner_iters < 1) throw ParameterError("max_inner_iters must be >= 1");
    if (nonmonotone_window < 1) throw ParameterError("nonmonotone_window must be >= 1");
    if (max_backtracks < 1) throw ParameterError("max_backtracks must be >= 1");
    if (!(roundoff >= 0.0)) throw ParameterError("roundoff must be >= 0");
    if (constants) constants->validate();
  }
};

struct InnerResult {
  Matrix x;
  double grad_norm = 0.0;
  int iterations = 0;  ///< accepted RGD steps t_k
  std::vector<double> values;  ///< L_k at x_{k,1}, …, x_{k,t_k+1}
  InnerStatus status = InnerStatus::iteration_cap;
  int backtracks = 0;
  /// Theoretical mode: steps where L_k(x_t) − L_k(x_{t+1}) < ‖g‖²/(2L_k(x_t)).
  int descent_violations = 0;

  bool converged() const { return status == InnerStatus::converged; }
};

/// Alternating Barzilai–Borwein stepsize: ⟨s,s⟩/⟨s,y⟩ on even t,
/// ⟨s,y⟩/⟨y,y⟩ on odd t, clamped to [step_min, step_max]. Falls back to 1
/// when the curvature ⟨s,y⟩ is not positive.
inline double bb_stepsize(const Matrix& s, const Matrix& g_diff, int parity,
                          double step_min = 1e-10, double step_max = 1e10) {
  if (s.rows() != g_diff.rows() || s.cols() != g_diff.cols()) {
    throw DimensionError("bb_stepsize: s and g_diff differ in shape");
  }
  const double sy = inner(s, g_diff);
  if (!(sy > 0.0)) return 1.0;
  const double step = (parity % 2 == 0) ? s.squaredNorm() / sy
                                        : sy / g_diff.squaredNorm();
  return std::clamp(step, step_min, step_max);
}

/// L_k(x) = ℓ_k α₁² + 2(‖∇f(x)‖ + ρ_A L_h) α₂ with
/// ℓ_k = L_f + L_h L_A¹ + σ_k ρ_A L_A⁰.
inline double riemannian_smoothness(const SmoothnessConstants& c, double sigma,
                                    double grad_f_norm) {
  const double ell = c.lf + c.lh * c.la1 + sigma * c.rho_a * c.la0;
  return ell * c.alpha1 * c.alpha1 + 2.0 * (grad_f_norm + c.rho_a * c.lh) * c.alpha2;
}

/// 1 / L_k(x).
inline double theoretical_stepsize(const SmoothnessConstants& c, double sigma,
                                   double grad_f_norm) {
  if (!(sigma > 0.0)) throw ParameterError("theoretical_stepsize: sigma must be > 0");
  c.validate();
  const double lk = riemannian_smoothness(c, sigma, grad_f_norm);
  if (!(lk > 0.0)) {
    throw UnsupportedError("theoretical_stepsize: constants give L_k(x) = 0");
  }
  return 1.0 / lk;
}

/// Riemannian gradient descent on x ↦ L_k(x) = f(x) + M_{h/σ}(A(x) + z/σ)
/// from x0 until ‖grad L_k‖ ≤ tol or the iteration cap.
///
/// The gradient test precedes each step, so a stationary start returns with
/// zero iterations. A line search that exhausts max_backtracks ends the solve
/// with status line_search_stall and the last accepted iterate.
inline InnerResult rgd_solve(AlOracle& oracle, double sigma, const Matrix& z,
                             const Matrix& x0, double tol,
                             const InnerConfig& cfg) {
  cfg.validate();
  if (!(tol > 0.0)) throw ParameterError("rgd_solve: tolerance must be > 0");
  if (!(sigma > 0.0)) throw ParameterError("rgd_solve: sigma must be > 0");
  const Manifold& m = oracle.problem().manifold();
  m.require_feasible("rgd_solve", x0);

  const SmoothnessConstants* constants = nullptr;
  if (cfg.stepsize_mode == StepsizeMode::theoretical) {
    if (cfg.constants) {
      constants = &*cfg.constants;
    } else if (oracle.problem().constants()) {
      constants = &*oracle.problem().constants();
    } else {
      throw UnsupportedError("theoretical stepsize needs smoothness constants");
    }
  }

  InnerResult res;
  Matrix x = x0;
  double value = oracle.al_value(sigma, z, x);
  Matrix grad = oracle.al_riemannian_gradient(sigma, z, x);
  double grad_norm = m.norm(grad);
  res.values.push_back(value);

  std::deque<double> window{value};
  Matrix s;
  Matrix g_diff;

  for (int t = 0;; ++t) {
    if (grad_norm <= tol) {
      res.status = InnerStatus::converged;
      break;
    }
    if (t >= cfg.max_inner_iters) {
      res.status = InnerStatus::iteration_cap;
      break;
    }

    const double gg = grad_norm * grad_norm;
    Matrix x_next;
    double next_value = 0.0;

    if (constants) {
      const double grad_f_norm = oracle.smooth_gradient(x).norm();
      const double step = theoretical_stepsize(*constants, sigma, grad_f_norm);
      const double lk = 1.0 / step;
      x_next = m.retract(x, -step * grad);
      next_value = oracle.al_value(sigma, z, x_next);
      const double slack = cfg.roundoff * std::max(1.0, std::abs(value));
      if (value - next_value < gg / (2.0 * lk) - slack) ++res.descent_violations;
    } else {
      double step = (t == 0) ? std::clamp(1.0 / grad_norm, cfg.step_min, cfg.step_max)
                             : bb_stepsize(s, g_diff, t, cfg.step_min, cfg.step_max);
      const double reference = *std::max_element(window.begin(), window.end());
      const double slack = cfg.roundoff * std::max(1.0, std::abs(reference));
      bool accepted = false;
      for (int trial = 0; trial <= cfg.max_backtracks; ++trial) {
        x_next = m.retract(x, -step * grad);
        next_value = oracle.al_value(sigma, z, x_next);
        if (next_value <= reference - cfg.armijo * step * gg + slack) {
          accepted = true;
          break;
        }
        if (trial == cfg.max_backtracks) break;
        step *= cfg.shrink;
        ++res.backtracks;
      }
      if (!accepted) {
        res.status = InnerStatus::line_search_stall;
        break;
      }
    }

    Matrix grad_next = oracle.al_riemannian_gradient(sigma, z, x_next);
    s = x_next - x;
    g_diff = grad_next - m.tangent_project(x_next, grad);
    x = std::move(x_next);
    grad = std::move(grad_next);
    grad_norm = m.norm(grad);
    value = next_value;
    ++res.iterations;
    res.values.push_back(value);
    window.push_back(value);
    while (static_cast<int>(window.size()) > cfg.nonmonotone_window) window.pop_front();
  }

  res.x = std::move(x);
  res.grad_norm = grad_norm;
  return res;
}

}  // namespace rial

#endif  // RIAL_INNER_RGD_HPP
