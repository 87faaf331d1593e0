#ifndef RIAL_MANIFOLD_HPP
#define RIAL_MANIFOLD_HPP

#include "rial/random.hpp"
#include "rial/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace rial {

enum class ManifoldKind { stiefel, generalized_stiefel, product };

enum class RetractionKind { qr, polar };

/// Residual bound for points produced by retract() / random_point().
inline constexpr double kFreshFeasibilityTol = 1e-10;
/// Residual bound for points accepted from callers.
inline constexpr double kAcceptedFeasibilityTol = 1e-8;

/// Embedded matrix manifold: Stiefel S(d,r) = {X : XᵀX = I},
/// generalized Stiefel S_G(p,r) = {X : XᵀGX = I}, or a product of those.
///
/// Product points are the factor blocks stacked vertically, so every factor
/// of a product must have the same number of columns. Stiefel factors use the
/// Euclidean metric; generalized Stiefel factors use ⟨U,V⟩_G = tr(UᵀGV),
/// under which projection and gradient conversion are closed form.
///
/// Instances are immutable; copies share the cached Cholesky factors of G.
class Manifold {
 public:
  static Manifold stiefel(Index d, Index r,
                          RetractionKind retraction = RetractionKind::qr) {
    if (d < 1 || r < 1 || r > d) {
      throw DimensionError("Stiefel(" + std::to_string(d) + "," +
                           std::to_string(r) + "): need d >= r >= 1");
    }
    Manifold m;
    m.kind_ = ManifoldKind::stiefel;
    m.factors_.push_back(Factor{ManifoldKind::stiefel, 0, d, r, nullptr});
    m.rows_ = d;
    m.cols_ = r;
    m.retraction_ = retraction;
    return m;
  }

  static Manifold generalized_stiefel(
      const Matrix& metric, Index r,
      RetractionKind retraction = RetractionKind::qr) {
    const Index p = metric.rows();
    if (metric.cols() != p) {
      throw DimensionError("generalized Stiefel: metric must be square, got " +
                           shape_string(metric.rows(), metric.cols()));
    }
    if (r < 1 || r > p) {
      throw DimensionError("generalized Stiefel: need p >= r >= 1");
    }
    if ((metric - metric.transpose()).norm() > 1e-12 * (1.0 + metric.norm())) {
      throw ConditioningError("generalized Stiefel: metric is not symmetric");
    }
    auto geometry = std::make_shared<MetricGeometry>();
    geometry->metric = metric;
    geometry->chol.compute(metric);
    if (geometry->chol.info() != Eigen::Success) {
      throw ConditioningError(
          "generalized Stiefel: metric is not positive definite");
    }
    const Vector diag = geometry->chol.matrixLLT().diagonal();
    if (diag.minCoeff() <= 1e-8 * diag.maxCoeff()) {
      throw ConditioningError(
          "generalized Stiefel: metric is singular to working precision");
    }
    geometry->inverse = geometry->chol.solve(Matrix::Identity(p, p));
    Manifold m;
    m.kind_ = ManifoldKind::generalized_stiefel;
    m.factors_.push_back(Factor{ManifoldKind::generalized_stiefel, 0, p, r,
                                std::move(geometry)});
    m.rows_ = p;
    m.cols_ = r;
    m.retraction_ = retraction;
    return m;
  }

  /// Nested products are flattened.
  static Manifold product(const std::vector<Manifold>& parts) {
    if (parts.empty()) throw DimensionError("product: no factors");
    Manifold m;
    m.kind_ = ManifoldKind::product;
    m.cols_ = parts.front().cols_;
    m.retraction_ = parts.front().retraction_;
    Index offset = 0;
    for (const Manifold& part : parts) {
      if (part.cols_ != m.cols_) {
        throw DimensionError(
            "product: factors must share their column count (stacked layout)");
      }
      for (Factor f : part.factors_) {
        f.offset = offset + f.offset;
        m.factors_.push_back(std::move(f));
      }
      offset += part.rows_;
    }
    m.rows_ = offset;
    return m;
  }

  ManifoldKind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  RetractionKind retraction() const { return retraction_; }
  std::size_t num_factors() const { return factors_.size(); }
  Index factor_offset(std::size_t i) const { return factors_.at(i).offset; }
  Index factor_rows(std::size_t i) const { return factors_.at(i).rows; }
  ManifoldKind factor_kind(std::size_t i) const { return factors_.at(i).kind; }

  /// Metric matrix of factor i (identity for Stiefel factors).
  Matrix factor_metric(std::size_t i) const {
    const Factor& f = factors_.at(i);
    if (f.geometry) return f.geometry->metric;
    return Matrix::Identity(f.rows, f.rows);
  }

  /// ‖XᵀX − I‖_F, ‖XᵀGX − I‖_F, or the max over product factors.
  double check_feasibility(const Matrix& x) const {
    require_shape("check_feasibility", x, rows_, cols_);
    double worst = 0.0;
    for (const Factor& f : factors_) {
      const auto block = x.middleRows(f.offset, f.rows);
      const Matrix gram = f.geometry
                              ? Matrix(block.transpose() * f.geometry->metric * block)
                              : Matrix(block.transpose() * block);
      worst = std::max(
          worst, (gram - Matrix::Identity(f.cols, f.cols)).norm());
    }
    return worst;
  }

  void require_feasible(const char* where, const Matrix& x,
                        double tol = kAcceptedFeasibilityTol) const {
    const double residual = check_feasibility(x);
    if (!(residual <= tol)) {
      throw FeasibilityError(std::string(where) +
                             ": point is off the manifold (residual " +
                             std::to_string(residual) + ")");
    }
  }

  /// Orthogonal projection onto T_xM with respect to the manifold metric:
  /// v − X·sym(Xᵀv) for Stiefel, v − X·sym(XᵀGv) for generalized Stiefel.
  Matrix tangent_project(const Matrix& x, const Matrix& v) const {
    require_shape("tangent_project(x)", x, rows_, cols_);
    require_shape("tangent_project(v)", v, rows_, cols_);
    Matrix out(rows_, cols_);
    for (const Factor& f : factors_) {
      const auto xb = x.middleRows(f.offset, f.rows);
      const auto vb = v.middleRows(f.offset, f.rows);
      const Matrix s = f.geometry
                           ? Matrix(xb.transpose() * times(f.geometry->metric, vb))
                           : Matrix(xb.transpose() * vb);
      out.middleRows(f.offset, f.rows).noalias() =
          vb - xb * (0.5 * (s + s.transpose()));
    }
    return out;
  }

  /// Riemannian gradient from a Euclidean gradient; generalized Stiefel
  /// factors first apply G⁻¹ so the result represents the gradient in the
  /// G-metric.
  Matrix riemannian_gradient(const Matrix& x, const Matrix& egrad) const {
    require_shape("riemannian_gradient", egrad, rows_, cols_);
    if (kind_ == ManifoldKind::stiefel) return tangent_project(x, egrad);
    Matrix scaled = egrad;
    for (const Factor& f : factors_) {
      if (!f.geometry) continue;
      scaled.middleRows(f.offset, f.rows) =
          times(f.geometry->inverse, egrad.middleRows(f.offset, f.rows));
    }
    return tangent_project(x, scaled);
  }

  /// Riemannian metric ⟨u, v⟩_x (independent of x for these manifolds).
  double metric(const Matrix& u, const Matrix& v) const {
    require_shape("metric(u)", u, rows_, cols_);
    require_shape("metric(v)", v, rows_, cols_);
    double acc = 0.0;
    for (const Factor& f : factors_) {
      const auto ub = u.middleRows(f.offset, f.rows);
      const auto vb = v.middleRows(f.offset, f.rows);
      if (f.geometry) {
        acc += (ub.array() * times(f.geometry->metric, vb).array()).sum();
      } else {
        acc += (ub.array() * vb.array()).sum();
      }
    }
    return acc;
  }

  double norm(const Matrix& v) const { return std::sqrt(std::max(0.0, metric(v, v))); }

  /// Retraction R_x(v). QR mode: Stiefel takes the Q factor of X+v with a
  /// positive diagonal in R; generalized Stiefel takes (X+v)L⁻ᵀ with
  /// LLᵀ = (X+v)ᵀG(X+v). Polar mode: (X+v)·((X+v)ᵀG(X+v))^{-1/2}.
  Matrix retract(const Matrix& x, const Matrix& v) const {
    require_shape("retract(x)", x, rows_, cols_);
    require_shape("retract(v)", v, rows_, cols_);
    Matrix out(rows_, cols_);
    for (const Factor& f : factors_) {
      out.middleRows(f.offset, f.rows) =
          normalize(f, x.middleRows(f.offset, f.rows) +
                           v.middleRows(f.offset, f.rows));
    }
    return out;
  }

  /// Normalized standard-Gaussian matrix; deterministic in the seed.
  Matrix random_point(std::uint64_t seed) const {
    Rng rng(seed);
    Matrix out(rows_, cols_);
    for (const Factor& f : factors_) {
      Matrix g = gaussian_matrix(f.rows, f.cols, rng);
      out.middleRows(f.offset, f.rows) =
          normalize_with(f, g, RetractionKind::qr);
    }
    return out;
  }

  /// Random tangent vector at x (Gaussian, projected); test and check helper.
  Matrix random_tangent(const Matrix& x, std::uint64_t seed) const {
    Rng rng(seed);
    return tangent_project(x, gaussian_matrix(rows_, cols_, rng));
  }

 private:
  struct MetricGeometry {
    Matrix metric;
    Eigen::LLT<Matrix> chol;
    Matrix inverse;  ///< G⁻¹ from chol
  };

  struct Factor {
    ManifoldKind kind;
    Index offset;
    Index rows;
    Index cols;
    std::shared_ptr<const MetricGeometry> geometry;
  };

  Matrix normalize(const Factor& f, const Matrix& y) const {
    return normalize_with(f, y, retraction_);
  }

  static Matrix normalize_with(const Factor& f, const Matrix& y,
                               RetractionKind mode) {
    if (mode == RetractionKind::polar) return polar_normalize(f, y);
    if (!f.geometry) return qr_normalize(y);
    const Matrix gram = y.transpose() * times(f.geometry->metric, y);
    Eigen::LLT<Matrix> chol(gram);
    const Vector diag = chol.matrixLLT().diagonal();
    if (chol.info() != Eigen::Success ||
        !(diag.minCoeff() > 1e-12 * std::max(1.0, diag.maxCoeff()))) {
      throw RankDeficiencyError(
          "retract: (X+v)ᵀG(X+v) is not positive definite");
    }
    // (X+v)·L⁻ᵀ = (L⁻¹(X+v)ᵀ)ᵀ
    return chol.matrixL().solve(y.transpose()).transpose();
  }

  static Matrix qr_normalize(const Matrix& y) {
    const Index n = y.rows();
    const Index r = y.cols();
    Eigen::HouseholderQR<Matrix> qr(y);
    Matrix q = qr.householderQ() * Matrix::Identity(n, r);
    const Vector diag = qr.matrixQR().diagonal();
    const double scale = std::max(1.0, y.norm());
    for (Index j = 0; j < r; ++j) {
      if (!(std::abs(diag(j)) > 1e-13 * scale)) {
        throw RankDeficiencyError("retract: X+v is rank deficient");
      }
      if (diag(j) < 0.0) q.col(j) *= -1.0;
    }
    return q;
  }

  static Matrix polar_normalize(const Factor& f, const Matrix& y) {
    const Matrix gram = f.geometry
                            ? Matrix(y.transpose() * times(f.geometry->metric, y))
                            : Matrix(y.transpose() * y);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const Vector lambda = eig.eigenvalues();
    if (eig.info() != Eigen::Success ||
        !(lambda.minCoeff() > 1e-24 * std::max(1.0, lambda.maxCoeff()))) {
      throw RankDeficiencyError("retract: polar factor is singular");
    }
    const Matrix inv_sqrt = eig.eigenvectors() *
                            lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                            eig.eigenvectors().transpose();
    return y * inv_sqrt;
  }

  Manifold() = default;

  ManifoldKind kind_ = ManifoldKind::stiefel;
  std::vector<Factor> factors_;
  Index rows_ = 0;
  Index cols_ = 0;
  RetractionKind retraction_ = RetractionKind::qr;
};

}  // namespace rial

#endif  // RIAL_MANIFOLD_HPP
