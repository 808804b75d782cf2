// Primal-dual path-following method on the homogeneous self-dual embedding
//
//   0 = Aᵀy + Gᵀz + cτ,   0 = Ax − bτ,   s = hτ − Gx,   κ = −cᵀx − bᵀy − hᵀz,
//
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector. The linear
// residuals and the complementarity measure shrink at the same rate, so the
// iterate either converges to an optimal pair (τ > 0) or to an infeasibility
// ray (κ > 0).

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "sparseobs/sdp.hpp"

namespace sparseobs::sdp {
namespace {

// NT scaling W with W·z = W⁻ᵀ·s = λ. On the orthant W = diag(w); on a PSD
// block W(U) = rᵀ U r and λ is diagonal.
struct Scaling {
  Vector w;  // orthant
  Vector lambda_orthant;
  std::vector<Matrix> r;
  std::vector<Matrix> rinv;
  std::vector<Vector> lambda_psd;
};

class ConeOps {
 public:
  explicit ConeOps(const ConeSpec& cones) : cones_(cones) {
    for (std::size_t k = 0; k < cones.psd_block_dims.size(); ++k) {
      offsets_.push_back(cones.block_offset(k));
    }
  }

  int l() const { return cones_.nonneg_dim; }
  std::size_t nblocks() const { return offsets_.size(); }
  int dim(std::size_t k) const { return cones_.psd_block_dims[k]; }
  int off(std::size_t k) const { return offsets_[k]; }

  Matrix block(const Vector& v, std::size_t k) const {
    return smat(v.segment(off(k), svec_length(dim(k))), dim(k));
  }
  void set_block(Vector& v, std::size_t k, const Matrix& m) const {
    v.segment(off(k), svec_length(dim(k))) = svec(m);
  }

  // Identity element e.
  Vector unit() const {
    Vector e = Vector::Zero(cones_.dimension());
    e.head(l()).setOnes();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      set_block(e, k, Matrix::Identity(dim(k), dim(k)));
    }
    return e;
  }

  // Largest t such that v + t·e is on the boundary, i.e. −min eigenvalue.
  double max_violation(const Vector& v) const {
    double t = -std::numeric_limits<double>::infinity();
    if (l() > 0) t = std::max(t, -v.head(l()).minCoeff());
    for (std::size_t k = 0; k < nblocks(); ++k) {
      t = std::max(t, -linalg::min_eigenvalue(block(v, k)));
    }
    return t;
  }

  std::optional<Scaling> nt_scaling(const Vector& s, const Vector& z) const {
    Scaling sc;
    const Vector sl = s.head(l());
    const Vector zl = z.head(l());
    if ((sl.array() <= 0.0).any() || (zl.array() <= 0.0).any()) return std::nullopt;
    sc.w = (sl.array() / zl.array()).sqrt();
    sc.lambda_orthant = (sl.array() * zl.array()).sqrt();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      Eigen::LLT<Matrix> ls(block(s, k));
      Eigen::LLT<Matrix> lz(block(z, k));
      if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return std::nullopt;
      const Matrix lsm = ls.matrixL();
      const Matrix lzm = lz.matrixL();
      Eigen::JacobiSVD<Matrix> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector lam = svd.singularValues();
      if ((lam.array() <= 0.0).any() || !lam.allFinite()) return std::nullopt;
      const Matrix& v = svd.matrixV();
      const Vector isq = lam.array().rsqrt();
      const Vector sq = lam.array().sqrt();
      sc.r.push_back(lsm * v * isq.asDiagonal());
      // r⁻¹ = Λ^{1/2} Vᵀ Ls⁻¹
      Matrix vt_lsinv =
          lsm.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(v.transpose());
      sc.rinv.push_back(sq.asDiagonal() * vt_lsinv);
      sc.lambda_psd.push_back(lam);
    }
    return sc;
  }

  // u ↦ W⁻ᵀu
  Vector apply_winvt(const Scaling& sc, const Vector& u) const {
    Vector out(u.size());
    out.head(l()) = u.head(l()).array() / sc.w.array();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      set_block(out, k, sc.rinv[k] * block(u, k) * sc.rinv[k].transpose());
    }
    return out;
  }
  // u ↦ Wᵀu
  Vector apply_wt(const Scaling& sc, const Vector& u) const {
    Vector out(u.size());
    out.head(l()) = u.head(l()).array() * sc.w.array();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      set_block(out, k, sc.r[k] * block(u, k) * sc.r[k].transpose());
    }
    return out;
  }
  // u ↦ Wu
  Vector apply_w(const Scaling& sc, const Vector& u) const {
    Vector out(u.size());
    out.head(l()) = u.head(l()).array() * sc.w.array();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      set_block(out, k, sc.r[k].transpose() * block(u, k) * sc.r[k]);
    }
    return out;
  }
  // u ↦ W⁻¹u
  Vector apply_winv(const Scaling& sc, const Vector& u) const {
    Vector out(u.size());
    out.head(l()) = u.head(l()).array() / sc.w.array();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      set_block(out, k, sc.rinv[k].transpose() * block(u, k) * sc.rinv[k]);
    }
    return out;
  }

  Vector lambda(const Scaling& sc) const {
    Vector out = Vector::Zero(cones_.dimension());
    out.head(l()) = sc.lambda_orthant;
    for (std::size_t k = 0; k < nblocks(); ++k) {
      set_block(out, k, sc.lambda_psd[k].asDiagonal().toDenseMatrix());
    }
    return out;
  }

  // Jordan product u∘v.
  Vector jordan(const Vector& u, const Vector& v) const {
    Vector out(u.size());
    out.head(l()) = u.head(l()).array() * v.head(l()).array();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      const Matrix ub = block(u, k);
      const Matrix vb = block(v, k);
      set_block(out, k, 0.5 * (ub * vb + vb * ub));
    }
    return out;
  }

  // Solves λ∘d = rhs for d.
  Vector jordan_divide(const Scaling& sc, const Vector& rhs) const {
    Vector out(rhs.size());
    out.head(l()) = rhs.head(l()).array() / sc.lambda_orthant.array();
    for (std::size_t k = 0; k < nblocks(); ++k) {
      const Vector& lam = sc.lambda_psd[k];
      Matrix rb = block(rhs, k);
      for (int j = 0; j < dim(k); ++j) {
        for (int i = 0; i < dim(k); ++i) rb(i, j) *= 2.0 / (lam(i) + lam(j));
      }
      set_block(out, k, rb);
    }
    return out;
  }

  // Largest α with λ + α·d in the cone (may be +inf).
  double max_step(const Scaling& sc, const Vector& d) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < l(); ++i) {
      if (d(i) < 0.0) alpha = std::min(alpha, -sc.lambda_orthant(i) / d(i));
    }
    for (std::size_t k = 0; k < nblocks(); ++k) {
      const Vector isq = sc.lambda_psd[k].array().rsqrt();
      const Matrix scaled = isq.asDiagonal() * block(d, k) * isq.asDiagonal();
      const double emin = linalg::min_eigenvalue(scaled);
      if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
    }
    return alpha;
  }

 private:
  const ConeSpec& cones_;
  std::vector<int> offsets_;
};

// Solves
//   [ 0   Aᵀ  Gᵀ   ] [dx]   [bx]
//   [ A   0   0    ] [dy] = [by]
//   [ G   0  −WᵀW  ] [dz]   [bz]
// by eliminating dz with Ĝ = W⁻ᵀG.
class KktSolver {
 public:
  KktSolver(const SdpProblem& p, const ConeOps& ops, const Scaling& sc, int refinement)
      : p_(p), ops_(ops), sc_(sc), refinement_(refinement) {
    const int n = p.num_vars();
    const int m = static_cast<int>(p.h.size());
    ghat_.resize(m, n);
    for (int j = 0; j < n; ++j) ghat_.col(j) = ops.apply_winvt(sc, p.G.col(j));
    if (p.num_eq() == 0 && m >= n) {
      qr_.compute(ghat_);
      const auto rdiag = qr_.matrixQR().diagonal().cwiseAbs();
      use_qr_ = n == 0 || rdiag.minCoeff() > 1e-14 * std::max(1.0, rdiag.maxCoeff());
    }
    if (!use_qr_) {
      const int q = p.num_eq();
      Matrix k = Matrix::Zero(n + q, n + q);
      k.topLeftCorner(n, n) = ghat_.transpose() * ghat_;
      if (q > 0) {
        k.topRightCorner(n, q) = p.A.transpose();
        k.bottomLeftCorner(q, n) = p.A;
      }
      lu_.compute(k);
    }
  }

  bool ok() const { return use_qr_ || lu_.rank() == lu_.rows(); }

  void solve(const Vector& bx, const Vector& by, const Vector& bz, Vector& dx, Vector& dy,
             Vector& dz) const {
    solve_once(bx, by, bz, dx, dy, dz);
    for (int it = 0; it < refinement_; ++it) {
      const Vector rx = bx - p_.A.transpose() * dy - p_.G.transpose() * dz;
      const Vector ry = by - p_.A * dx;
      const Vector rz = bz - p_.G * dx + ops_.apply_wt(sc_, ops_.apply_w(sc_, dz));
      Vector cx, cy, cz;
      solve_once(rx, ry, rz, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

 private:
  void solve_once(const Vector& bx, const Vector& by, const Vector& bz, Vector& dx, Vector& dy,
                  Vector& dz) const {
    const int n = p_.num_vars();
    const Vector bzh = ops_.apply_winvt(sc_, bz);
    const Vector rhs = bx + ghat_.transpose() * bzh;
    if (use_qr_) {
      const auto r = qr_.matrixQR().topRows(n).triangularView<Eigen::Upper>();
      dx = r.solve(r.transpose().solve(rhs));
      dy = Vector(0);
    } else {
      Vector full(n + p_.num_eq());
      full << rhs, by;
      const Vector sol = lu_.solve(full);
      dx = sol.head(n);
      dy = sol.tail(p_.num_eq());
    }
    dz = ops_.apply_winv(sc_, ghat_ * dx - bzh);
  }

  const SdpProblem& p_;
  const ConeOps& ops_;
  const Scaling& sc_;
  int refinement_;
  Matrix ghat_;
  Eigen::HouseholderQR<Matrix> qr_;
  Eigen::FullPivLU<Matrix> lu_;
  bool use_qr_ = false;
};

Scaling identity_scaling(const ConeOps& ops) {
  Scaling sc;
  sc.w = Vector::Ones(ops.l());
  sc.lambda_orthant = Vector::Ones(ops.l());
  for (std::size_t k = 0; k < ops.nblocks(); ++k) {
    sc.r.push_back(Matrix::Identity(ops.dim(k), ops.dim(k)));
    sc.rinv.push_back(Matrix::Identity(ops.dim(k), ops.dim(k)));
    sc.lambda_psd.push_back(Vector::Ones(ops.dim(k)));
  }
  return sc;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts) {
  p.validate();
  const int n = p.num_vars();
  const int q = p.num_eq();
  const ConeOps ops(p.cones);
  const double degree = p.cones.degree();
  const Vector e = ops.unit();

  const double norm_c = p.c.norm();
  const double norm_bh = std::max(p.b.size() ? p.b.norm() : 0.0, p.h.norm());

  SdpSolution sol;
  sol.status = Status::NumericalFailure;

  // Starting point from two least-squares solves with W = I.
  Vector x, y, z, s;
  {
    const Scaling id = identity_scaling(ops);
    const KktSolver kkt(p, ops, id, opts.refinement_steps);
    if (!kkt.ok()) {
      sol.x = Vector::Zero(n);
      return sol;
    }
    Vector zp, yd, xd;
    kkt.solve(Vector::Zero(n), p.b, p.h, x, y, zp);
    s = -zp;
    kkt.solve(-p.c, Vector::Zero(q), Vector::Zero(p.h.size()), xd, yd, z);
    y = yd;
    const double ap = ops.max_violation(s);
    if (ap >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + std::max(ap, 0.0)) * e;
    const double ad = ops.max_violation(z);
    if (ad >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + std::max(ad, 0.0)) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;

  auto finish = [&](Status st, double scale_primal, double scale_dual) {
    sol.status = st;
    sol.x = x / scale_primal;
    sol.s = s / scale_primal;
    sol.z = z / scale_dual;
    sol.y = y / scale_dual;
  };

  // Best iterate by the worst of its three ratios to the tolerances.
  SdpSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  auto fail = [&](Status st) {
    if (best_score <= opts.fallback_factor) {
      const int iters = sol.iterations;
      sol = best;
      sol.status = Status::Optimal;
      sol.reduced_accuracy = true;
      sol.iterations = iters;
    } else {
      finish(st, tau, tau);
    }
    return sol;
  };

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    sol.iterations = iter;
    const Vector atyz = (q > 0 ? Vector(p.A.transpose() * y) : Vector::Zero(n)) + p.G.transpose() * z;
    const Vector ax = q > 0 ? Vector(p.A * x) : Vector(0);
    const Vector gxs = p.G * x + s;
    const Vector rx = atyz + p.c * tau;
    const Vector ry = ax - p.b * tau;
    const Vector rz = gxs - p.h * tau;
    const double cx = p.c.dot(x);
    const double hz_by = p.h.dot(z) + (q > 0 ? p.b.dot(y) : 0.0);
    const double rt = kappa + cx + hz_by;
    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (degree + 1.0);

    const double pcost = cx / tau;
    const double dcost = -hz_by / tau;
    const double pres = std::sqrt(ry.squaredNorm() + rz.squaredNorm()) / tau / (1.0 + norm_bh);
    const double dres = rx.norm() / tau / (1.0 + norm_c);
    const double abs_gap = gap / (tau * tau);
    const double rel_gap = abs_gap / std::max(1.0, std::abs(pcost));

    sol.primal_objective = pcost;
    sol.dual_objective = dcost;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    sol.duality_gap = abs_gap;
    sol.relative_gap = rel_gap;

    if (opts.verbose) {
      std::cerr << "it " << iter << " pcost " << pcost << " dcost " << dcost << " gap " << abs_gap
                << " pres " << pres << " dres " << dres << " tau " << tau << " kappa " << kappa
                << "\n";
    }

    if (!std::isfinite(pcost) || !std::isfinite(dcost) || !x.allFinite() || !z.allFinite()) {
      return fail(Status::NumericalFailure);
    }
    if (pres <= opts.feastol && dres <= opts.feastol &&
        (abs_gap <= opts.abstol || rel_gap <= opts.reltol)) {
      finish(Status::Optimal, tau, tau);
      return sol;
    }
    {
      const double score = std::max({pres / opts.feastol, dres / opts.feastol,
                                     std::min(abs_gap / opts.abstol, rel_gap / opts.reltol)});
      if (score < best_score && tau > 0.0 && kappa < tau) {
        best_score = score;
        finish(Status::Optimal, tau, tau);
        best = sol;
      }
    }
    if (hz_by < 0.0) {
      const double cert = atyz.norm() / (-hz_by);
      if (cert <= opts.feastol) {
        sol.certificate_residual = cert;
        finish(Status::Infeasible, 1.0, -hz_by);
        sol.x.setConstant(std::numeric_limits<double>::quiet_NaN());
        return sol;
      }
    }
    if (cx < 0.0) {
      const double cert = std::sqrt(ax.squaredNorm() + gxs.squaredNorm()) / (-cx);
      if (cert <= opts.feastol) {
        sol.certificate_residual = cert;
        finish(Status::Unbounded, -cx, 1.0);
        return sol;
      }
    }
    if (iter == opts.max_iters) break;

    const auto sc = ops.nt_scaling(s, z);
    if (!sc) return fail(Status::NumericalFailure);
    const Vector lambda = ops.lambda(*sc);
    const Vector lambda_sq = ops.jordan(lambda, lambda);
    const KktSolver kkt(p, ops, *sc, opts.refinement_steps);
    if (!kkt.ok()) return fail(Status::NumericalFailure);

    // Direction for the τ coefficient.
    Vector x1, y1, z1;
    kkt.solve(-p.c, p.b, p.h, x1, y1, z1);
    const double denom =
        p.c.dot(x1) + (q > 0 ? p.b.dot(y1) : 0.0) + p.h.dot(z1) - kappa / tau;

    Vector dx, dy, dz, ds_scaled, dz_scaled;
    double dtau = 0.0, dkappa = 0.0;
    double sigma = 0.0;
    Vector corr = Vector::Zero(p.h.size());
    double corr_tk = 0.0;
    double step = 0.0;

    for (int phase = 0; phase < 2; ++phase) {
      const double eta = 1.0 - sigma;
      const Vector rhs_s = -lambda_sq + sigma * mu * e - corr;
      const double rhs_tk = -tau * kappa + sigma * mu - corr_tk;
      const Vector d = ops.jordan_divide(*sc, rhs_s);

      Vector x0, y0, z0;
      kkt.solve(-eta * rx, -eta * ry, -eta * rz - ops.apply_wt(*sc, d), x0, y0, z0);
      dtau = (-eta * rt - p.c.dot(x0) - (q > 0 ? p.b.dot(y0) : 0.0) - p.h.dot(z0) - rhs_tk / tau) /
             denom;
      dx = x0 + dtau * x1;
      dy = y0 + dtau * y1;
      dz = z0 + dtau * z1;
      dz_scaled = ops.apply_w(*sc, dz);
      ds_scaled = d - dz_scaled;
      dkappa = (rhs_tk - kappa * dtau) / tau;

      double amax = std::min(ops.max_step(*sc, ds_scaled), ops.max_step(*sc, dz_scaled));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);

      if (phase == 0) {
        const double a = std::min(1.0, amax);
        sigma = std::pow(1.0 - a, 3);
        corr = ops.jordan(ds_scaled, dz_scaled);
        corr_tk = dtau * dkappa;
      } else {
        step = std::min(1.0, opts.step_fraction * amax);
      }
    }

    if (!(step > 1e-12)) return fail(Status::NumericalFailure);
    x += step * dx;
    y += step * dy;
    z += step * dz;
    // ds from the linearised primal equation G dx + ds − h dτ = −η rz keeps
    // the primal residual from drifting when W is badly conditioned.
    s += step * Vector(-(1.0 - sigma) * rz - p.G * dx + p.h * dtau);
    tau += step * dtau;
    kappa += step * dkappa;
  }

  return fail(Status::MaxIter);
}

}  // namespace sparseobs::sdp
