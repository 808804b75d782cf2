#include "sparseobs/model.hpp"

#include <algorithm>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace sparseobs {

std::string to_string(NormType n) { return n == NormType::H2 ? "h2" : "hinf"; }

NormType parse_norm(const std::string& s) {
  if (s == "h2" || s == "H2") return NormType::H2;
  if (s == "hinf" || s == "Hinf" || s == "HINF" || s == "h_inf") return NormType::Hinf;
  throw std::invalid_argument("unknown norm type '" + s + "' (expected h2 or hinf)");
}

namespace {

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "LtiPlant: " << name << " is " << m.rows() << "x" << m.cols() << ", expected " << rows
       << "x" << cols;
    throw DimensionError(os.str());
  }
}

}  // namespace

void LtiPlant::validate() const {
  linalg::require_square(A, "LtiPlant.A");
  const auto n = A.rows();
  expect_shape(B_u, n, B_u.cols(), "B_u");
  expect_shape(B_d, n, B_d.cols(), "B_d");
  expect_shape(C_y, C_y.rows(), n, "C_y");
  expect_shape(C_z, C_z.rows(), n, "C_z");
  expect_shape(D_u, C_y.rows(), B_u.cols(), "D_u");
  expect_shape(D_d, C_y.rows(), B_d.cols(), "D_d");
  expect_shape(S_d, B_d.cols(), B_d.cols(), "S_d");
  for (const auto* m : {&A, &B_u, &B_d, &C_y, &C_z, &D_u, &D_d, &S_d}) {
    linalg::require_finite(*m, "LtiPlant");
  }
  for (Eigen::Index i = 0; i < S_d.rows(); ++i) {
    for (Eigen::Index j = 0; j < S_d.cols(); ++j) {
      if (i != j && S_d(i, j) != 0.0) throw StructuralError("LtiPlant: S_d must be diagonal");
    }
    if (S_d(i, i) < 0.0) throw StructuralError("LtiPlant: S_d entries must be nonnegative");
  }
  if (!sensor_names.empty() && static_cast<int>(sensor_names.size()) != ny()) {
    throw DimensionError("LtiPlant: sensor_names must have N_y entries");
  }
}

std::string LtiPlant::sensor_name(int i) const {
  if (i >= 0 && i < static_cast<int>(sensor_names.size())) return sensor_names[i];
  return "y" + std::to_string(i + 1);
}

bool is_detectable(const Matrix& a, const Matrix& c) {
  const Eigen::Index n = a.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> es(a, false);
  const double tol = 1e-8 * std::max(1.0, a.norm());
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (lam.real() < 0.0) continue;
    Eigen::MatrixXcd pbh(n + c.rows(), n);
    pbh.topRows(n) = a.cast<std::complex<double>>();
    pbh.topRows(n).diagonal().array() -= lam;
    pbh.bottomRows(c.rows()) = c.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    if (svd.singularValues()(n - 1) <= tol) return false;
  }
  return true;
}

void check_plant(const LtiPlant& p) {
  p.validate();
  if (!is_detectable(p.A, p.C_y)) {
    throw NotDetectableError("LtiPlant: (A, C_y) is not detectable");
  }
}

LtiPlant apply_weights(const LtiPlant& p, const NormWeights& w) {
  p.validate();
  const int nd = p.nd();
  const int ny = p.ny();
  auto check_weight = [](const Matrix& m, Eigen::Index n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
      throw DimensionError(std::string("NormWeights: ") + name + " has the wrong size");
    }
    linalg::require_finite(m, name);
    if (n > 0 && m.fullPivLu().rank() < n) {
      throw std::invalid_argument(std::string("NormWeights: ") + name + " is singular");
    }
  };
  check_weight(w.W_u, p.nu(), "W_u");
  check_weight(w.W_w, nd + ny, "W_w");
  check_weight(w.W_z, p.nz(), "W_z");

  const double tol = 1e-12 * std::max(1.0, w.W_w.norm());
  if (w.W_w.topRightCorner(nd, ny).norm() > tol || w.W_w.bottomLeftCorner(ny, nd).norm() > tol ||
      (w.W_w.bottomRightCorner(ny, ny) - Matrix::Identity(ny, ny)).norm() > tol) {
    throw StructuralError(
        "NormWeights: W_w must be diag(W_d, I) so that sensor-noise channels stay B_n = 0, D_n = I");
  }

  LtiPlant out = p;
  out.B_u = p.B_u * w.W_u;
  out.D_u = p.D_u * w.W_u;
  // [B_d 0] W_w and [D_d I] W_w, re-split into process and sensor parts.
  const Matrix bw = linalg::hstack(p.B_d, Matrix::Zero(p.nx(), ny)) * w.W_w;
  const Matrix dw = linalg::hstack(p.D_d, Matrix::Identity(ny, ny)) * w.W_w;
  out.B_d = bw.leftCols(nd);
  out.D_d = dw.leftCols(nd);
  out.C_z = w.W_z * p.C_z;
  return out;
}

LtiPlant restrict_sensors(const LtiPlant& p, const std::vector<int>& support) {
  LtiPlant out = p;
  const auto k = static_cast<Eigen::Index>(support.size());
  out.C_y.resize(k, p.nx());
  out.D_u.resize(k, p.nu());
  out.D_d.resize(k, p.nd());
  out.sensor_names.clear();
  for (Eigen::Index r = 0; r < k; ++r) {
    const int i = support[r];
    if (i < 0 || i >= p.ny()) throw DimensionError("restrict_sensors: sensor index out of range");
    if (r > 0 && support[r - 1] >= i) {
      throw std::invalid_argument("restrict_sensors: support must be strictly ascending");
    }
    out.C_y.row(r) = p.C_y.row(i);
    out.D_u.row(r) = p.D_u.row(i);
    out.D_d.row(r) = p.D_d.row(i);
    if (!p.sensor_names.empty()) out.sensor_names.push_back(p.sensor_names[i]);
  }
  return out;
}

PrecisionVector PrecisionVector::from_values(const Vector& kappa_sq, double rel_tol) {
  PrecisionVector pv;
  pv.kappa_sq = kappa_sq;
  if ((kappa_sq.array() < 0.0).any()) {
    throw std::invalid_argument("PrecisionVector: precisions must be nonnegative");
  }
  const double mx = kappa_sq.size() ? kappa_sq.maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < kappa_sq.size(); ++i) {
    if (kappa_sq(i) > rel_tol * mx && kappa_sq(i) > 0.0) pv.support.push_back(static_cast<int>(i));
  }
  return pv;
}

ErrorSystem build_error_system(const LtiPlant& p, const Matrix& L, const PrecisionVector& kappa_sq) {
  p.validate();
  if (L.rows() != p.nx() || L.cols() != p.ny()) {
    throw DimensionError("build_error_system: L must be N_x x N_y");
  }
  if (kappa_sq.size() != p.ny()) throw DimensionError("build_error_system: kappa_sq must have N_y entries");

  std::vector<bool> in_support(p.ny(), false);
  for (int i : kappa_sq.support) {
    if (i < 0 || i >= p.ny()) throw DimensionError("build_error_system: support index out of range");
    if (!(kappa_sq.kappa_sq(i) > 0.0)) {
      throw StructuralError("build_error_system: sensor " + p.sensor_name(i) +
                            " is in the support but has zero precision");
    }
    in_support[i] = true;
  }
  const double gain_tol = kZeroGainTol * std::max(1.0, L.norm());
  for (int i = 0; i < p.ny(); ++i) {
    if (!in_support[i] && L.col(i).cwiseAbs().maxCoeff() > gain_tol) {
      throw StructuralError("build_error_system: nonzero gain column for removed sensor " +
                            p.sensor_name(i));
    }
  }

  ErrorSystem sys;
  sys.A_cl = p.A + L * p.C_y;
  const Eigen::Index ns = static_cast<Eigen::Index>(kappa_sq.support.size());
  sys.B_cl.resize(p.nx(), p.nd() + ns);
  sys.B_cl.leftCols(p.nd()) = (p.B_d + L * p.D_d) * p.S_d;
  for (int j = 0; j < p.nd(); ++j) sys.input_channels.push_back(j);
  for (Eigen::Index k = 0; k < ns; ++k) {
    const int i = kappa_sq.support[k];
    sys.B_cl.col(p.nd() + k) = L.col(i) / std::sqrt(kappa_sq.kappa_sq(i));
    sys.input_channels.push_back(p.nd() + i);
  }
  sys.C_z = p.C_z;
  return sys;
}

}  // namespace sparseobs
