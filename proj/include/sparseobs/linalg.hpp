#pragma once

// Dense real linear algebra used throughout sparseobs. Matrices are plain
// Eigen dynamic matrices; the helpers here add the symmetry and finiteness
// checks the rest of the library relies on.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sparseobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SymmetryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnstableMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace linalg {

/// Relative asymmetry below which a matrix is silently symmetrized.
inline constexpr double kSymmetryTol = 1e-10;

void require_finite(const Matrix& m, std::string_view what);
void require_square(const Matrix& m, std::string_view what);

/// Returns (m + mᵀ)/2. Throws SymmetryError if ‖m − mᵀ‖ exceeds
/// tol·max(1, ‖m‖) (Frobenius norms).
Matrix symmetrized(const Matrix& m, double tol = kSymmetryTol);

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthogonal, columns are eigenvectors
};

SymEig sym_eig(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

/// Lower-triangular factor L with L·Lᵀ = m, or nullopt when m is not
/// positive definite.
std::optional<Matrix> cholesky(const Matrix& m);

/// Largest real part over the eigenvalues of a.
double spectral_abscissa(const Matrix& a);
bool is_hurwitz(const Matrix& a);

/// Solves a·P + P·aᵀ + w = 0 for symmetric P. `a` must be Hurwitz.
Matrix solve_lyapunov(const Matrix& a, const Matrix& w);

/// Matrix exponential by scaling and squaring with a degree-6 Padé
/// approximant.
Matrix expm(const Matrix& a);

/// Vertical / horizontal concatenation that tolerates empty operands.
Matrix vstack(const Matrix& top, const Matrix& bottom);
Matrix hstack(const Matrix& left, const Matrix& right);

}  // namespace linalg
}  // namespace sparseobs
