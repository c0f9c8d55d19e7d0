#ifndef POLYDG_TYPES_HPP
#define POLYDG_TYPES_HPP

/// Common scalar, linear-algebra and callable types used across the library.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <stdexcept>
#include <string>

namespace polydg
{
  /// Floating-point type used throughout the library.
  using Real = double;

  using Vec2    = Eigen::Matrix<Real, 2, 1>;
  using Mat2    = Eigen::Matrix<Real, 2, 2>;
  using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

  /// Row-wise list of 2D points, one point per row.
  using Points = Eigen::Matrix<Real, Eigen::Dynamic, 2>;

  using SparseMat = Eigen::SparseMatrix<Real>;
  using Triplet   = Eigen::Triplet<Real>;

  /// Scalar field of space and time. Stationary coefficients ignore t.
  using FieldFn = std::function<Real(const Vec2 &, Real)>;

  /// Vector field of space and time, e.g. an axonal direction field.
  using VecFieldFn = std::function<Vec2(const Vec2 &, Real)>;

  /// Error raised while reading a mesh or configuration file.
  /// Carries the 1-based line number at which parsing failed.
  class parse_error : public std::runtime_error
  {
  public:
    parse_error(const std::string &what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")")
      , line_number(line)
    {}

    int line_number;
  };

  /// Error raised when mesh connectivity is inconsistent, e.g. a face
  /// shared by more than two elements.
  class topology_error : public std::runtime_error
  {
    using std::runtime_error::runtime_error;
  };

  /// Error raised when a linear or nonlinear solve fails to reach the
  /// requested tolerance.
  class solver_error : public std::runtime_error
  {
    using std::runtime_error::runtime_error;
  };
} // namespace polydg

#endif // POLYDG_TYPES_HPP
