#ifndef RIAL_PROBLEM_HPP
#define RIAL_PROBLEM_HPP

#include "rial/manifold.hpp"
#include "rial/nonsmooth.hpp"
#include "rial/types.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace rial {

/// Smooth term f : E₁ → ℝ with its Euclidean gradient.
struct SmoothTerm {
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> gradient;

  static SmoothTerm zero() {
    return {[](const Matrix&) { return 0.0; },
            [](const Matrix& x) { return Matrix(Matrix::Zero(x.rows(), x.cols())); }};
  }
};

/// Smooth mapping A : E₁ → E₂ exposed through its value and the adjoint
/// action of its Jacobian, z ↦ ∇A(x)ᵀz.
struct Mapping {
  Index out_rows = 0;
  Index out_cols = 0;
  std::function<Matrix(const Matrix&)> value;
  std::function<Matrix(const Matrix& x, const Matrix& z)> adjoint;
  bool linear = false;

  static Mapping identity(Index rows, Index cols) {
    return {rows, cols, [](const Matrix& x) { return x; },
            [](const Matrix&, const Matrix& z) { return z; }, true};
  }

  static Mapping zero(Index in_rows, Index in_cols, Index out_rows,
                      Index out_cols) {
    return {out_rows, out_cols,
            [=](const Matrix&) { return Matrix(Matrix::Zero(out_rows, out_cols)); },
            [=](const Matrix&, const Matrix&) {
              return Matrix(Matrix::Zero(in_rows, in_cols));
            },
            true};
  }
};

/// Constants of the smoothness assumptions, used only by the theoretical
/// stepsize 1/L_k(x).
struct SmoothnessConstants {
  double lf = 0.0;      ///< descent constant of f over M
  double lh = 0.0;      ///< Lipschitz constant of h
  double la0 = 0.0;     ///< Lipschitz constant of A over conv M
  double la1 = 0.0;     ///< Lipschitz constant of ∇A over conv M
  double rho_a = 0.0;   ///< bound on ‖∇A‖ over conv M
  double alpha1 = 0.0;  ///< ‖R_x(v) − x‖ ≤ α₁‖v‖
  double alpha2 = 0.0;  ///< ‖R_x(v) − x − v‖ ≤ α₂‖v‖²

  void validate() const {
    for (double c : {lf, lh, la0, la1, rho_a, alpha1, alpha2}) {
      if (!std::isfinite(c) || c < 0.0) {
        throw ParameterError("smoothness constants must be finite and >= 0");
      }
    }
  }
};

/// min_{x ∈ M} Φ(x) = f(x) + h(A(x)).
class CompositeProblem {
 public:
  CompositeProblem(Manifold manifold, SmoothTerm f, Mapping a, NonsmoothTerm h,
                   std::string name = "composite")
      : manifold_(std::move(manifold)),
        f_(std::move(f)),
        a_(std::move(a)),
        h_(std::move(h)),
        name_(std::move(name)) {
    validate();
  }

  const Manifold& manifold() const { return manifold_; }
  const SmoothTerm& smooth() const { return f_; }
  const Mapping& mapping() const { return a_; }
  const NonsmoothTerm& nonsmooth() const { return h_; }
  const std::string& name() const { return name_; }

  const std::optional<SmoothnessConstants>& constants() const {
    return constants_;
  }
  void set_constants(const SmoothnessConstants& c) {
    c.validate();
    constants_ = c;
  }

 private:
  void validate() const {
    if (!f_.value || !f_.gradient) {
      throw ParameterError(name_ + ": smooth term needs value and gradient");
    }
    if (!a_.value || !a_.adjoint) {
      throw ParameterError(name_ + ": mapping needs value and adjoint");
    }
    if (a_.out_rows != h_.rows() || a_.out_cols != h_.cols()) {
      throw DimensionError(name_ + ": mapping output " +
                           shape_string(a_.out_rows, a_.out_cols) +
                           " does not match h's argument " +
                           shape_string(h_.rows(), h_.cols()));
    }
    const Matrix x = manifold_.random_point(0x5eed);
    const Matrix ax = a_.value(x);
    require_shape("A(x)", ax, a_.out_rows, a_.out_cols);
    require_shape("grad f(x)", f_.gradient(x), manifold_.rows(),
                  manifold_.cols());
    require_shape("adjoint(x, z)",
                  a_.adjoint(x, Matrix::Ones(a_.out_rows, a_.out_cols)),
                  manifold_.rows(), manifold_.cols());
    if (a_.linear) {
      const Matrix x2 = manifold_.random_point(0x5eed + 1);
      const Matrix lhs = a_.value(x + x2);
      const Matrix rhs = ax + a_.value(x2);
      if ((lhs - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
        throw ParameterError(name_ + ": mapping flagged linear is not additive");
      }
    }
  }

  Manifold manifold_;
  SmoothTerm f_;
  Mapping a_;
  NonsmoothTerm h_;
  std::string name_;
  std::optional<SmoothnessConstants> constants_;
};

/// Oracle-call tallies (f, ∇f, A, ∇Aᵀ, prox).
struct OracleCounts {
  std::uint64_t f = 0;
  std::uint64_t grad_f = 0;
  std::uint64_t a = 0;
  std::uint64_t grad_a = 0;
  std::uint64_t prox = 0;

  std::uint64_t total() const { return f + grad_f + a + grad_a + prox; }
  bool operator==(const OracleCounts&) const = default;
};

/// Monotone, atomically incremented oracle counters.
class OracleCounter {
 public:
  void add_f() { f_.fetch_add(1, std::memory_order_relaxed); }
  void add_grad_f() { grad_f_.fetch_add(1, std::memory_order_relaxed); }
  void add_a() { a_.fetch_add(1, std::memory_order_relaxed); }
  void add_grad_a() { grad_a_.fetch_add(1, std::memory_order_relaxed); }
  void add_prox() { prox_.fetch_add(1, std::memory_order_relaxed); }

  OracleCounts snapshot() const {
    return {f_.load(), grad_f_.load(), a_.load(), grad_a_.load(),
            prox_.load()};
  }

 private:
  std::atomic<std::uint64_t> f_{0};
  std::atomic<std::uint64_t> grad_f_{0};
  std::atomic<std::uint64_t> a_{0};
  std::atomic<std::uint64_t> grad_a_{0};
  std::atomic<std::uint64_t> prox_{0};
};

struct OracleOptions {
  /// Reuse f, ∇f, A(x) per x and the prox per (x, σ, z).
  bool cache = true;
  /// Assert ‖B(x)‖ ≤ L_h and the envelope sandwich on every evaluation.
  bool check_invariants = false;
};

struct StationarityResiduals {
  double r_grad = 0.0;  ///< ‖proj_{T_xM}(∇f(x) + ∇A(x)ᵀz)‖
  double r_feas = 0.0;  ///< ‖A(x) − y‖
};

/// Absolute slack for ‖z‖ ≤ L_h style checks; the multiplier is formed as
/// z + σ(A − prox) and loses a few ulps of σ·|w| to cancellation.
inline constexpr double kMultiplierSlack = 1e-8;

/// Evaluates Φ, the augmented Lagrangian envelope
///   L_k(x) = f(x) + M_{h/σ}(A(x) + z/σ)
/// and its gradients for one CompositeProblem, counting oracle calls.
///
/// One instance per solve: the cache and counters are not shared.
class AlOracle {
 public:
  explicit AlOracle(const CompositeProblem& problem, OracleOptions options = {})
      : problem_(&problem), options_(options) {}

  AlOracle(const AlOracle&) = delete;
  AlOracle& operator=(const AlOracle&) = delete;

  const CompositeProblem& problem() const { return *problem_; }
  const OracleOptions& options() const { return options_; }
  OracleCounts counts() const { return counter_.snapshot(); }

  double smooth_value(const Matrix& x) {
    PointEntry& e = point(x);
    if (!e.f) {
      counter_.add_f();
      e.f = problem_->smooth().value(x);
    }
    return *e.f;
  }

  const Matrix& smooth_gradient(const Matrix& x) {
    PointEntry& e = point(x);
    if (!e.grad_f) {
      counter_.add_grad_f();
      e.grad_f = problem_->smooth().gradient(x);
    }
    return *e.grad_f;
  }

  const Matrix& mapping_value(const Matrix& x) {
    PointEntry& e = point(x);
    if (!e.ax) {
      counter_.add_a();
      e.ax = problem_->mapping().value(x);
    }
    return *e.ax;
  }

  /// Φ(x) = f(x) + h(A(x)); x must be on the manifold.
  double phi_value(const Matrix& x) {
    problem_->manifold().require_feasible("phi_value", x);
    const double fx = smooth_value(x);
    return fx + problem_->nonsmooth().value(mapping_value(x));
  }

  /// prox_{h/σ}(A(x) + z/σ): the minimizing auxiliary variable y for x.
  const Matrix& auxiliary_point(double sigma, const Matrix& z, const Matrix& x) {
    return prox_entry(sigma, z, x).prox;
  }

  double al_value(double sigma, const Matrix& z, const Matrix& x) {
    const ProxEntry& pe = prox_entry(sigma, z, x);
    const double value = smooth_value(x) +
                         problem_->nonsmooth().value(pe.prox) +
                         0.5 * sigma * (pe.prox - pe.shifted).squaredNorm();
    if (options_.check_invariants) check_sandwich(sigma, z, x, value);
    return value;
  }

  /// ∇f(x) + ∇A(x)ᵀ B(x) with B(x) = z + σ(A(x) − prox_{h/σ}(A(x) + z/σ)).
  Matrix al_euclidean_gradient(double sigma, const Matrix& z, const Matrix& x) {
    const Matrix b = multiplier_estimate(sigma, z, x);
    counter_.add_grad_a();
    return smooth_gradient(x) + problem_->mapping().adjoint(x, b);
  }

  Matrix al_riemannian_gradient(double sigma, const Matrix& z, const Matrix& x) {
    return problem_->manifold().riemannian_gradient(
        x, al_euclidean_gradient(sigma, z, x));
  }

  /// B(x) = σ(A(x) + z/σ − prox_{h/σ}(A(x) + z/σ)), an element of ∂h at the prox.
  Matrix multiplier_estimate(double sigma, const Matrix& z, const Matrix& x) {
    const ProxEntry& pe = prox_entry(sigma, z, x);
    Matrix b = z + sigma * (mapping_value(x) - pe.prox);
    if (options_.check_invariants && problem_->nonsmooth().has_lipschitz_bound()) {
      const double lh = problem_->nonsmooth().lipschitz_bound();
      if (b.norm() > lh + kMultiplierSlack) {
        throw InvariantViolation("multiplier estimate exceeds L_h: " +
                                 std::to_string(b.norm()) + " > " +
                                 std::to_string(lh));
      }
    }
    return b;
  }

  /// Residuals of ε-stationarity for the triple (x, y, z); z ∈ ∂h(y) is the
  /// caller's obligation.
  StationarityResiduals stationarity_residuals(const Matrix& x, const Matrix& y,
                                               const Matrix& z) {
    const Manifold& m = problem_->manifold();
    counter_.add_grad_a();
    const Matrix kkt = smooth_gradient(x) + problem_->mapping().adjoint(x, z);
    StationarityResiduals r;
    r.r_grad = m.norm(m.riemannian_gradient(x, kkt));
    r.r_feas = (mapping_value(x) - y).norm();
    return r;
  }

 private:
  struct PointEntry {
    Matrix x;
    std::optional<double> f;
    std::optional<Matrix> grad_f;
    std::optional<Matrix> ax;
  };

  struct ProxEntry {
    Matrix x;
    double sigma = 0.0;
    Matrix z;
    Matrix shifted;  // A(x) + z/σ
    Matrix prox;
    bool valid = false;
  };

  PointEntry& point(const Matrix& x) {
    if (!options_.cache || !same_matrix(point_.x, x)) point_ = PointEntry{x, {}, {}, {}};
    return point_;
  }

  const ProxEntry& prox_entry(double sigma, const Matrix& z, const Matrix& x) {
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    const NonsmoothTerm& h = problem_->nonsmooth();
    require_shape("multiplier z", z, h.rows(), h.cols());
    if (options_.cache && prox_.valid && prox_.sigma == sigma &&
        same_matrix(prox_.x, x) && same_matrix(prox_.z, z)) {
      return prox_;
    }
    Matrix shifted = mapping_value(x) + z / sigma;
    counter_.add_prox();
    Matrix p = h.prox(1.0 / sigma, shifted);
    prox_ = ProxEntry{x, sigma, z, std::move(shifted), std::move(p), true};
    return prox_;
  }

  // Φ − 3L_h²/(2σ) ≤ L_k ≤ Φ + L_h²/σ whenever ‖z‖ ≤ L_h.
  void check_sandwich(double sigma, const Matrix& z, const Matrix& x,
                      double value) {
    const NonsmoothTerm& h = problem_->nonsmooth();
    if (!h.has_lipschitz_bound()) return;
    const double lh = h.lipschitz_bound();
    if (z.norm() > lh + kMultiplierSlack) return;
    const double phi = smooth_value(x) + h.value(mapping_value(x));
    const double slack = 1e-10 * (1.0 + std::abs(phi));
    const double lower = phi - 1.5 * lh * lh / sigma;
    const double upper = phi + lh * lh / sigma;
    if (value < lower - slack || value > upper + slack) {
      throw InvariantViolation("envelope sandwich violated: L=" +
                               std::to_string(value) + " outside [" +
                               std::to_string(lower) + ", " +
                               std::to_string(upper) + "]");
    }
  }

  const CompositeProblem* problem_;
  OracleOptions options_;
  OracleCounter counter_;
  PointEntry point_;
  ProxEntry prox_;
};

}  // namespace rial

#endif  // RIAL_PROBLEM_HPP
