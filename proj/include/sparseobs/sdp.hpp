#pragma once

// Small dense conic solver for problems of the form
//
//   minimize    cᵀx
//   subject to  s = h − G·x ∈ K,   A·x = b,
//
// where K is a product of one nonnegative orthant and any number of PSD
// cones. Cone-space vectors list the orthant entries first, followed by each
// PSD block in svec form (lower triangle, column-major, off-diagonal entries
// scaled by √2 so that svec(U)ᵀsvec(V) = tr(UV)).

#include <iosfwd>
#include <string>
#include <vector>

#include "sparseobs/linalg.hpp"

namespace sparseobs::sdp {

struct ConeSpec {
  std::vector<int> psd_block_dims;
  int nonneg_dim = 0;

  /// Length of a cone-space vector.
  int dimension() const;
  /// Barrier degree: nonneg_dim plus the sum of block sides.
  int degree() const;
  /// Offset of PSD block k inside a cone-space vector.
  int block_offset(std::size_t k) const;
  void validate() const;
};

inline int svec_length(int n) { return n * (n + 1) / 2; }
/// Position of entry (i, j) of an n×n symmetric matrix within its svec.
int svec_index(int n, int i, int j);
Vector svec(const Matrix& m);
Matrix smat(const Eigen::Ref<const Vector>& v, int n);

struct SdpProblem {
  Vector c;
  Matrix G;
  Vector h;
  Matrix A;  // p×n, p may be 0
  Vector b;
  ConeSpec cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(A.rows()); }
  /// Throws DimensionError / SymmetryError on malformed data.
  void validate() const;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };

std::string to_string(Status s);

struct SolverOptions {
  int max_iters = 200;
  double feastol = 1e-7;   // relative primal / dual residual
  double reltol = 1e-7;    // relative duality gap
  double abstol = 1e-10;   // absolute duality gap
  double step_fraction = 0.99;
  int refinement_steps = 1;
  /// When the iteration stalls, the best iterate is still reported as
  /// Optimal (with reduced_accuracy set) if it meets the tolerances above
  /// multiplied by this factor.
  double fallback_factor = 100.0;
  bool verbose = false;
};

struct SdpSolution {
  Status status = Status::NumericalFailure;
  Vector x, s, z, y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// ‖(Ax − b, Gx + s − h)‖ / (1 + max(‖b‖, ‖h‖)).
  double primal_residual = 0.0;
  /// ‖Aᵀy + Gᵀz + c‖ / (1 + ‖c‖).
  double dual_residual = 0.0;
  /// sᵀz.
  double duality_gap = 0.0;
  /// sᵀz / max(1, |cᵀx|).
  double relative_gap = 0.0;
  /// For Infeasible: ‖Aᵀy + Gᵀz‖ with the ray normalised to hᵀz + bᵀy = −1.
  /// For Unbounded: ‖(Ax, Gx + s)‖ with cᵀx = −1.
  double certificate_residual = 0.0;
  int iterations = 0;
  /// Optimal only within SolverOptions::fallback_factor of the tolerances.
  bool reduced_accuracy = false;
};

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});

struct MarginReport {
  std::vector<double> psd_min_eigenvalues;  // one per PSD block
  double orthant_min = 0.0;                 // +inf when there is no orthant
  double min() const;
};

/// Evaluates s = h − G·x and reports how far inside the cone it lies.
MarginReport check_feasible_point(const SdpProblem& p, const Vector& x);

/// Plain-text dump of a problem. Lines starting with '#' are comments.
///
///   vars <n>
///   cones <nonneg_dim> <d_1> <d_2> ...
///   obj <var> <value>                        one per nonzero c_j
///   con <block> <row> <col> <var> <value>    one per nonzero
///   eq <row> <var> <value>                   one per nonzero of A, b
///
/// Indices are 1-based. Block 1 is the orthant (row == col == entry),
/// blocks 2.. are the PSD blocks in order, upper triangle only. The slack
/// is s = F_0 + Σ_j x_j F_j with var 0 denoting F_0 = h and var j the
/// coefficient −G_j. For `eq`, var 0 holds b.
void write_triplets(std::ostream& os, const SdpProblem& p);

}  // namespace sparseobs::sdp
