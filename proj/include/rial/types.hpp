#ifndef RIAL_TYPES_HPP
#define RIAL_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rial {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range (e.g. a nonpositive
/// proximal parameter or a growth factor b <= 1).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A metric or covariance matrix is not positive definite to working precision.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Retraction input lost full column rank.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// A point handed in as "on the manifold" is not.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// An operation needs data the caller did not supply (constants, bounds).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A runtime-checked inequality from the convergence analysis failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Frobenius inner product.
inline double inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

inline std::string shape_string(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

inline void require_shape(const char* where, const Matrix& m, Index rows,
                          Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(where) + ": expected " +
                         shape_string(rows, cols) + ", got " +
                         shape_string(m.rows(), m.cols()));
  }
}

inline bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

/// a·b one column at a time. For the tall, few-column right-hand sides used
/// here this beats the blocked product by a wide margin.
template <class Rhs>
Matrix times(const Matrix& a, const Eigen::MatrixBase<Rhs>& b) {
  Matrix out(a.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) out.col(j).noalias() = a * b.col(j);
  return out;
}

}  // namespace rial

#endif  // RIAL_TYPES_HPP
