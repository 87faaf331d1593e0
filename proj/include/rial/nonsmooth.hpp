#ifndef RIAL_NONSMOOTH_HPP
#define RIAL_NONSMOOTH_HPP

#include "rial/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace rial {

/// Convex, Lipschitz continuous h : E₂ → ℝ with a tractable proximal map.
///
/// Built-ins are the zero function and the elementwise weighted ℓ1 norm
/// h(w) = Σ ω_ij |w_ij|. User instances supply value and prox, and optionally
/// a Lipschitz constant; convexity and the constant are the caller's promise.
class NonsmoothTerm {
 public:
  enum class Kind { zero, l1, user };

  struct UserFunctions {
    std::function<double(const Matrix&)> value;
    /// prox(lambda, w) = argmin_u h(u) + ‖u − w‖² / (2 lambda)
    std::function<Matrix(double, const Matrix&)> prox;
    std::optional<double> lipschitz;
  };

  static NonsmoothTerm zero(Index rows, Index cols) {
    NonsmoothTerm h;
    h.kind_ = Kind::zero;
    h.rows_ = rows;
    h.cols_ = cols;
    return h;
  }

  static NonsmoothTerm l1(double mu, Index rows, Index cols) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
      throw ParameterError("l1: weight must be finite and >= 0");
    }
    return weighted_l1(Matrix::Constant(rows, cols, mu));
  }

  static NonsmoothTerm weighted_l1(Matrix weights) {
    if (!weights.allFinite() || (weights.array() < 0.0).any()) {
      throw ParameterError("weighted_l1: weights must be finite and >= 0");
    }
    NonsmoothTerm h;
    h.kind_ = Kind::l1;
    h.rows_ = weights.rows();
    h.cols_ = weights.cols();
    h.weights_ = std::move(weights);
    return h;
  }

  static NonsmoothTerm user(Index rows, Index cols, UserFunctions fns) {
    if (!fns.value || !fns.prox) {
      throw ParameterError("user nonsmooth term needs value and prox");
    }
    if (fns.lipschitz && !(*fns.lipschitz >= 0.0)) {
      throw ParameterError("user nonsmooth term: Lipschitz bound must be >= 0");
    }
    NonsmoothTerm h;
    h.kind_ = Kind::user;
    h.rows_ = rows;
    h.cols_ = cols;
    h.user_ = std::move(fns);
    return h;
  }

  Kind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Matrix& weights() const { return weights_; }

  double value(const Matrix& w) const {
    require_shape("h(w)", w, rows_, cols_);
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::l1:
        return (weights_.array() * w.array().abs()).sum();
      case Kind::user:
        return user_.value(w);
    }
    return 0.0;
  }

  Matrix prox(double lambda, const Matrix& w) const {
    if (!(lambda > 0.0)) throw ParameterError("prox: lambda must be > 0");
    require_shape("prox(w)", w, rows_, cols_);
    switch (kind_) {
      case Kind::zero:
        return w;
      case Kind::l1: {
        // soft threshold: sign(w)·max(|w| − λω, 0)
        const Eigen::ArrayXXd shrunk =
            (w.array().abs() - lambda * weights_.array()).max(0.0);
        return (w.array().sign() * shrunk).matrix();
      }
      case Kind::user:
        return user_.prox(lambda, w);
    }
    return w;
  }

  bool has_lipschitz_bound() const {
    return kind_ != Kind::user || user_.lipschitz.has_value();
  }

  /// Lipschitz constant in the Frobenius norm: ‖ω‖_F for weighted ℓ1
  /// (μ√(mn) for a uniform weight), 0 for the zero term.
  double lipschitz_bound() const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::l1:
        return weights_.norm();
      case Kind::user:
        if (user_.lipschitz) return *user_.lipschitz;
        throw UnsupportedError(
            "user-supplied nonsmooth term has no Lipschitz bound");
    }
    return 0.0;
  }

 private:
  NonsmoothTerm() = default;

  Kind kind_ = Kind::zero;
  Index rows_ = 0;
  Index cols_ = 0;
  Matrix weights_;
  UserFunctions user_;
};

inline Matrix prox(const NonsmoothTerm& h, double lambda, const Matrix& w) {
  return h.prox(lambda, w);
}

/// M_{λh}(w) = h(p) + ‖p − w‖²/(2λ) with p = prox_{λh}(w).
inline double moreau_value(const NonsmoothTerm& h, double lambda,
                           const Matrix& w) {
  const Matrix p = h.prox(lambda, w);
  return h.value(p) + (p - w).squaredNorm() / (2.0 * lambda);
}

/// ∇M_{λh}(w) = (w − prox_{λh}(w)) / λ.
inline Matrix moreau_gradient(const NonsmoothTerm& h, double lambda,
                              const Matrix& w) {
  const Matrix p = h.prox(lambda, w);
  return (w - p) / lambda;
}

inline double lipschitz_bound(const NonsmoothTerm& h) {
  return h.lipschitz_bound();
}

}  // namespace rial

#endif  // RIAL_NONSMOOTH_HPP
