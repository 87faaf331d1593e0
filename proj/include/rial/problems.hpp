#ifndef RIAL_PROBLEMS_HPP
#define RIAL_PROBLEMS_HPP

#include "rial/manifold.hpp"
#include "rial/nonsmooth.hpp"
#include "rial/problem.hpp"
#include "rial/random.hpp"
#include "rial/types.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <utility>

namespace rial {

// ---------------------------------------------------------------------------
// Sparse PCA: min_{X ∈ S(d,r)} −⟨AAᵀ, XXᵀ⟩ + μ‖X‖₁

struct PcaInstance {
  Matrix data;  ///< d×N, one sample per column
  double mu = 0.0;
  Index r = 1;

  void validate() const {
    if (data.rows() < 1 || data.cols() < 1) {
      throw DimensionError("pca: data matrix is empty");
    }
    if (r < 1 || r > data.rows()) {
      throw DimensionError("pca: need d >= r >= 1, got d=" +
                           std::to_string(data.rows()) + " r=" + std::to_string(r));
    }
    if (!(mu >= 0.0)) throw ParameterError("pca: mu must be >= 0");
  }
};

inline CompositeProblem build_sparse_pca(const PcaInstance& inst) {
  inst.validate();
  auto a = std::make_shared<const Matrix>(inst.data);
  auto at = std::make_shared<const Matrix>(inst.data.transpose());
  const Index d = a->rows();
  SmoothTerm f{
      [at](const Matrix& x) { return -times(*at, x).squaredNorm(); },
      [a, at](const Matrix& x) { return Matrix(-2.0 * times(*a, times(*at, x))); }};
  return CompositeProblem(Manifold::stiefel(d, inst.r), std::move(f),
                          Mapping::identity(d, inst.r),
                          NonsmoothTerm::l1(inst.mu, d, inst.r), "sparse-pca");
}

/// i.i.d. Gaussian d×N matrix with each column centered and scaled to unit norm.
inline Matrix generate_pca_data(Index d, Index n, std::uint64_t seed) {
  if (d < 1 || n < 1) throw DimensionError("generate_pca_data: need d, N >= 1");
  Rng rng(seed);
  Matrix a = gaussian_matrix(d, n, rng);
  for (Index j = 0; j < n; ++j) {
    if (d > 1) a.col(j).array() -= a.col(j).mean();
    const double nrm = a.col(j).norm();
    if (nrm > 0.0) a.col(j) /= nrm;
  }
  return a;
}

// ---------------------------------------------------------------------------
// Sparse CCA: min −tr(UᵀΣ_ab V) + μ₁‖U‖₁ + μ₂‖V‖₁
//             over U ∈ S_{Σ_aa}(p,r), V ∈ S_{Σ_bb}(q,r)

struct CcaInstance {
  Matrix a;  ///< d×p
  Matrix b;  ///< d×q
  double mu1 = 0.0;
  double mu2 = 0.0;
  Index r = 1;
  /// Relative ridge: Σ += ridge·(tr Σ / dim)·I. Negative means the default.
  double ridge = -1.0;

  static constexpr double kDefaultRidge = 1e-6;

  double effective_ridge() const { return ridge < 0.0 ? kDefaultRidge : ridge; }

  void validate() const {
    if (a.rows() < 1 || a.cols() < 1 || b.cols() < 1) {
      throw DimensionError("cca: data matrices are empty");
    }
    if (a.rows() != b.rows()) {
      throw DimensionError("cca: A and B need the same number of samples");
    }
    if (r < 1 || r > a.cols() || r > b.cols()) {
      throw DimensionError("cca: need min(p, q) >= r >= 1");
    }
    if (!(mu1 >= 0.0) || !(mu2 >= 0.0)) throw ParameterError("cca: weights must be >= 0");
  }
};

struct CcaCovariances {
  Matrix saa;  ///< AᵀA/d + δ_a I
  Matrix sbb;  ///< BᵀB/d + δ_b I
  Matrix sab;  ///< AᵀB/d
};

inline CcaCovariances cca_covariances(const CcaInstance& inst) {
  inst.validate();
  const double d = static_cast<double>(inst.a.rows());
  CcaCovariances c;
  c.saa = inst.a.transpose() * inst.a / d;
  c.sbb = inst.b.transpose() * inst.b / d;
  c.sab = inst.a.transpose() * inst.b / d;
  const double rel = inst.effective_ridge();
  auto ridge = [rel](Matrix& s, const char* which) {
    const Index n = s.rows();
    s.diagonal().array() += rel * s.trace() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 1e-8)) {
      throw ConditioningError(std::string("cca: covariance ") + which +
                              " is not positive definite after ridging");
    }
  };
  ridge(c.saa, "Sigma_aa");
  ridge(c.sbb, "Sigma_bb");
  return c;
}

/// Variables are stacked as [U; V] ((p+q)×r); A is the identity on the stack.
inline CompositeProblem build_sparse_cca(const CcaInstance& inst) {
  const CcaCovariances cov = cca_covariances(inst);
  const Index p = inst.a.cols();
  const Index q = inst.b.cols();
  const Index r = inst.r;
  auto sab = std::make_shared<const Matrix>(cov.sab);
  auto sba = std::make_shared<const Matrix>(cov.sab.transpose());
  SmoothTerm f{
      [sab, p, q](const Matrix& x) {
        return -(x.topRows(p).array() * times(*sab, x.bottomRows(q)).array()).sum();
      },
      [sab, sba, p, q](const Matrix& x) {
        Matrix g(p + q, x.cols());
        g.topRows(p) = -times(*sab, x.bottomRows(q));
        g.bottomRows(q) = -times(*sba, x.topRows(p));
        return g;
      }};
  Matrix weights(p + q, r);
  weights.topRows(p).setConstant(inst.mu1);
  weights.bottomRows(q).setConstant(inst.mu2);
  Manifold m = Manifold::product({Manifold::generalized_stiefel(cov.saa, r),
                                  Manifold::generalized_stiefel(cov.sbb, r)});
  return CompositeProblem(std::move(m), std::move(f), Mapping::identity(p + q, r),
                          NonsmoothTerm::weighted_l1(std::move(weights)),
                          "sparse-cca");
}

struct CcaDataOptions {
  Index latent_rank = 5;
  /// Per-entry variance of the shared signal relative to unit noise;
  /// 0 gives independent A and B.
  double snr = 1.0;
};

/// A = Z·W_a + E_a, B = Z·W_b + E_b with a shared Gaussian latent factor
/// Z (d×k) and i.i.d. N(0,1) noise.
inline std::pair<Matrix, Matrix> generate_cca_data(Index d, Index p, Index q,
                                                   std::uint64_t seed,
                                                   const CcaDataOptions& opts = {}) {
  if (d < 1 || p < 1 || q < 1) throw DimensionError("generate_cca_data: dims must be >= 1");
  if (opts.latent_rank < 1) throw ParameterError("generate_cca_data: latent rank must be >= 1");
  if (!(opts.snr >= 0.0)) throw ParameterError("generate_cca_data: snr must be >= 0");
  Rng rng(seed);
  const Index k = opts.latent_rank;
  const double scale = std::sqrt(opts.snr / static_cast<double>(k));
  const Matrix z = gaussian_matrix(d, k, rng);
  const Matrix wa = scale * gaussian_matrix(k, p, rng);
  const Matrix wb = scale * gaussian_matrix(k, q, rng);
  Matrix a = z * wa + gaussian_matrix(d, p, rng);
  Matrix b = z * wb + gaussian_matrix(d, q, rng);
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Synthetic nonlinear-mapping instance:
//   min_{X ∈ S(p,r)} ⟨C, X⟩ + μ‖XᵀDX‖₁

struct NonlinearOptions {
  double mu = 0.1;
  /// Multiplies D; 0 removes the nonlinear coupling.
  double coupling = 1.0;
};

inline CompositeProblem build_nonlinear_test(Index p, Index r, std::uint64_t seed,
                                             const NonlinearOptions& opts = {}) {
  if (r < 1 || p < r) throw DimensionError("nonlinear test: need p >= r >= 1");
  Rng rng(seed);
  auto c = std::make_shared<const Matrix>(gaussian_matrix(p, r, rng));
  const Matrix g = gaussian_matrix(p, p, rng);
  auto dm = std::make_shared<const Matrix>(opts.coupling * (g.transpose() * g) /
                                           static_cast<double>(p));
  SmoothTerm f{[c](const Matrix& x) { return inner(*c, x); },
               [c](const Matrix&) { return *c; }};
  Mapping a{r, r,
            [dm](const Matrix& x) { return Matrix(x.transpose() * (*dm) * x); },
            [dm](const Matrix& x, const Matrix& z) {
              return Matrix((*dm) * x * (z + z.transpose()));
            },
            false};
  return CompositeProblem(Manifold::stiefel(p, r), std::move(f), std::move(a),
                          NonsmoothTerm::l1(opts.mu, r, r), "nonlinear-test");
}

// ---------------------------------------------------------------------------

/// Percentage of entries with |X_ij| < tol.
inline double sparsity(const Matrix& x, double tol = 1e-5) {
  if (x.size() == 0) return 100.0;
  const auto small = (x.array().abs() < tol).count();
  return 100.0 * static_cast<double>(small) / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// Text archive: a header line, scalar key/value lines, then each matrix as
// "matrix <name> <rows> <cols>" followed by rows of decimal values.

namespace detail {

inline void write_matrix(std::ostream& os, const char* name, const Matrix& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

inline void expect_token(std::istream& is, const std::string& want) {
  std::string tok;
  if (!(is >> tok) || tok != want) {
    throw ParameterError("instance archive: expected '" + want + "', got '" + tok + "'");
  }
}

inline Matrix read_matrix(std::istream& is, const std::string& name) {
  expect_token(is, "matrix");
  expect_token(is, name);
  Index rows = 0;
  Index cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
    throw ParameterError("instance archive: bad dimensions for " + name);
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(is >> m(i, j))) throw ParameterError("instance archive: truncated " + name);
    }
  }
  return m;
}

template <typename T>
T read_scalar(std::istream& is, const std::string& key) {
  expect_token(is, key);
  T v{};
  if (!(is >> v)) throw ParameterError("instance archive: bad value for " + key);
  return v;
}

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream& os) : os_(os), old_(os.precision(17)) {}
  ~PrecisionGuard() { os_.precision(old_); }
  std::ostream& os_;
  std::streamsize old_;
};

}  // namespace detail

inline void write_instance(std::ostream& os, const PcaInstance& inst) {
  detail::PrecisionGuard guard(os);
  os << "rial-instance pca\n";
  os << "mu " << inst.mu << '\n' << "r " << inst.r << '\n';
  detail::write_matrix(os, "A", inst.data);
}

inline void write_instance(std::ostream& os, const CcaInstance& inst) {
  detail::PrecisionGuard guard(os);
  os << "rial-instance cca\n";
  os << "mu1 " << inst.mu1 << '\n'
     << "mu2 " << inst.mu2 << '\n'
     << "r " << inst.r << '\n'
     << "ridge " << inst.ridge << '\n';
  detail::write_matrix(os, "A", inst.a);
  detail::write_matrix(os, "B", inst.b);
}

inline PcaInstance read_pca_instance(std::istream& is) {
  detail::expect_token(is, "rial-instance");
  detail::expect_token(is, "pca");
  PcaInstance inst;
  inst.mu = detail::read_scalar<double>(is, "mu");
  inst.r = detail::read_scalar<Index>(is, "r");
  inst.data = detail::read_matrix(is, "A");
  inst.validate();
  return inst;
}

inline CcaInstance read_cca_instance(std::istream& is) {
  detail::expect_token(is, "rial-instance");
  detail::expect_token(is, "cca");
  CcaInstance inst;
  inst.mu1 = detail::read_scalar<double>(is, "mu1");
  inst.mu2 = detail::read_scalar<double>(is, "mu2");
  inst.r = detail::read_scalar<Index>(is, "r");
  inst.ridge = detail::read_scalar<double>(is, "ridge");
  inst.a = detail::read_matrix(is, "A");
  inst.b = detail::read_matrix(is, "B");
  inst.validate();
  return inst;
}

}  // namespace rial

#endif  // RIAL_PROBLEMS_HPP
