#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sparseobs/sdp.hpp"

namespace sparseobs::sdp {

int ConeSpec::dimension() const {
  int total = nonneg_dim;
  for (int d : psd_block_dims) total += svec_length(d);
  return total;
}

int ConeSpec::degree() const {
  return nonneg_dim + std::accumulate(psd_block_dims.begin(), psd_block_dims.end(), 0);
}

int ConeSpec::block_offset(std::size_t k) const {
  int off = nonneg_dim;
  for (std::size_t i = 0; i < k; ++i) off += svec_length(psd_block_dims[i]);
  return off;
}

void ConeSpec::validate() const {
  if (nonneg_dim < 0) throw DimensionError("ConeSpec: negative orthant dimension");
  for (int d : psd_block_dims) {
    if (d < 1) throw DimensionError("ConeSpec: PSD block side must be >= 1");
  }
}

int svec_index(int n, int i, int j) {
  if (i < j) std::swap(i, j);
  // Column-major lower triangle: column j starts after columns 0..j-1.
  return j * n - j * (j - 1) / 2 + (i - j);
}

Vector svec(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Vector v(svec_length(n));
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double val = 0.5 * (m(i, j) + m(j, i));
      v(svec_index(n, i, j)) = (i == j) ? val : val * M_SQRT2;
    }
  }
  return v;
}

Matrix smat(const Eigen::Ref<const Vector>& v, int n) {
  if (v.size() != svec_length(n)) throw DimensionError("smat: length mismatch");
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double val = v(svec_index(n, i, j));
      if (i == j) {
        m(i, i) = val;
      } else {
        m(i, j) = m(j, i) = val / M_SQRT2;
      }
    }
  }
  return m;
}

void SdpProblem::validate() const {
  cones.validate();
  const Eigen::Index n = c.size();
  const Eigen::Index m = cones.dimension();
  std::ostringstream os;
  if (G.rows() != m || G.cols() != n) {
    os << "SdpProblem: G is " << G.rows() << "x" << G.cols() << ", expected " << m << "x" << n;
    throw DimensionError(os.str());
  }
  if (h.size() != m) throw DimensionError("SdpProblem: h length does not match cone dimension");
  if (A.cols() != n && !(A.rows() == 0)) {
    throw DimensionError("SdpProblem: A column count does not match c");
  }
  if (b.size() != A.rows()) throw DimensionError("SdpProblem: b length does not match A");
  linalg::require_finite(c, "SdpProblem.c");
  linalg::require_finite(G, "SdpProblem.G");
  linalg::require_finite(h, "SdpProblem.h");
  linalg::require_finite(A, "SdpProblem.A");
  linalg::require_finite(b, "SdpProblem.b");
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIter: return "max_iter";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

double MarginReport::min() const {
  double m = orthant_min;
  for (double e : psd_min_eigenvalues) m = std::min(m, e);
  return m;
}

MarginReport check_feasible_point(const SdpProblem& p, const Vector& x) {
  if (x.size() != p.num_vars()) throw DimensionError("check_feasible_point: x has wrong length");
  const Vector s = p.h - p.G * x;
  MarginReport r;
  r.orthant_min = p.cones.nonneg_dim > 0 ? s.head(p.cones.nonneg_dim).minCoeff()
                                         : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.cones.psd_block_dims.size(); ++k) {
    const int d = p.cones.psd_block_dims[k];
    const Matrix blk = smat(s.segment(p.cones.block_offset(k), svec_length(d)), d);
    r.psd_min_eigenvalues.push_back(linalg::min_eigenvalue(blk));
  }
  return r;
}

void write_triplets(std::ostream& os, const SdpProblem& p) {
  p.validate();
  const auto old_prec = os.precision(17);
  const int n = p.num_vars();
  os << "# sparseobs conic problem: minimize c'x s.t. F_0 + sum_j x_j F_j in K, A x = b\n";
  os << "vars " << n << "\n";
  os << "cones " << p.cones.nonneg_dim;
  for (int d : p.cones.psd_block_dims) os << ' ' << d;
  os << "\n";
  for (int j = 0; j < n; ++j) {
    if (p.c(j) != 0.0) os << "obj " << j + 1 << ' ' << p.c(j) << "\n";
  }
  auto emit_col = [&](int var, const Vector& col) {
    for (int i = 0; i < p.cones.nonneg_dim; ++i) {
      if (col(i) != 0.0) os << "con 1 " << i + 1 << ' ' << i + 1 << ' ' << var << ' ' << col(i) << "\n";
    }
    for (std::size_t k = 0; k < p.cones.psd_block_dims.size(); ++k) {
      const int d = p.cones.psd_block_dims[k];
      const Matrix blk = smat(col.segment(p.cones.block_offset(k), svec_length(d)), d);
      for (int r = 0; r < d; ++r) {
        for (int c = r; c < d; ++c) {
          if (blk(r, c) != 0.0) {
            os << "con " << k + 2 << ' ' << r + 1 << ' ' << c + 1 << ' ' << var << ' ' << blk(r, c)
               << "\n";
          }
        }
      }
    }
  };
  emit_col(0, p.h);
  for (int j = 0; j < n; ++j) emit_col(j + 1, -p.G.col(j));
  for (int r = 0; r < p.num_eq(); ++r) {
    if (p.b(r) != 0.0) os << "eq " << r + 1 << " 0 " << p.b(r) << "\n";
    for (int j = 0; j < n; ++j) {
      if (p.A(r, j) != 0.0) os << "eq " << r + 1 << ' ' << j + 1 << ' ' << p.A(r, j) << "\n";
    }
  }
  os.precision(old_prec);
}

}  // namespace sparseobs::sdp
