#include "sparseobs/linalg.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sparseobs::linalg {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(what) + ": matrix contains NaN or Inf");
  }
}

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

Matrix symmetrized(const Matrix& m, double tol) {
  require_square(m, "symmetrized");
  const double asym = (m - m.transpose()).norm();
  const double scale = std::max(1.0, m.norm());
  if (asym > tol * scale) {
    std::ostringstream os;
    os << "matrix is not symmetric (relative asymmetry " << asym / scale << ")";
    throw SymmetryError(os.str());
  }
  return 0.5 * (m + m.transpose());
}

SymEig sym_eig(const Matrix& m) {
  require_finite(m, "sym_eig");
  const Matrix sym = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigensolver did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::optional<Matrix> cholesky(const Matrix& m) {
  require_finite(m, "cholesky");
  const Matrix sym = symmetrized(m);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) return std::nullopt;
  return l;
}

double spectral_abscissa(const Matrix& a) {
  require_square(a, "spectral_abscissa");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& a) { return spectral_abscissa(a) < 0.0; }

Matrix solve_lyapunov(const Matrix& a, const Matrix& w) {
  require_square(a, "solve_lyapunov");
  require_finite(a, "solve_lyapunov");
  if (w.rows() != a.rows() || w.cols() != a.cols()) {
    throw DimensionError("solve_lyapunov: w must match the size of a");
  }
  const Matrix ws = symmetrized(w, 1e-8);
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);

  // Bartels-Stewart on the complex Schur form a = U T Uᴴ.
  Eigen::ComplexSchur<Matrix> schur(a);
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t(i, i).real() >= 0.0) {
      throw UnstableMatrixError("solve_lyapunov: matrix is not Hurwitz");
    }
  }

  // T Z + Z Tᴴ = C with C = -Uᴴ W U, solved one column at a time from the last.
  const Eigen::MatrixXcd c = -(u.adjoint() * ws.cast<std::complex<double>>() * u);
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = c.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * z.col(k);
    Eigen::MatrixXcd shifted = t;
    shifted.diagonal().array() += std::conj(t(j, j));
    z.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  const Matrix p = (u * z * u.adjoint()).real();
  return 0.5 * (p + p.transpose());
}

Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);

  constexpr int q = 6;
  const double norm_inf = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  if (norm_inf > 0.5) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm_inf))) + 1);
  const Matrix as = a / std::ldexp(1.0, s);

  const Matrix id = Matrix::Identity(n, n);
  double c = 0.5;
  Matrix x = as;
  Matrix num = id + c * as;
  Matrix den = id - c * as;
  for (int k = 2; k <= q; ++k) {
    c = c * (q - k + 1) / (k * (2 * q - k + 1));
    x = as * x;
    num += c * x;
    den += (k % 2 == 0 ? c : -c) * x;
  }
  Matrix f = den.partialPivLu().solve(num);
  for (int k = 0; k < s; ++k) f = f * f;
  return f;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.size() == 0 && top.rows() == 0) return bottom;
  if (bottom.size() == 0 && bottom.rows() == 0) return top;
  if (top.cols() != bottom.cols()) throw DimensionError("vstack: column count mismatch");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Matrix hstack(const Matrix& left, const Matrix& right) {
  if (left.cols() == 0) return right;
  if (right.cols() == 0) return left;
  if (left.rows() != right.rows()) throw DimensionError("hstack: row count mismatch");
  Matrix out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

}  // namespace sparseobs::linalg
