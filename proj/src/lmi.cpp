#include "sparseobs/lmi.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sparseobs {

DesignSpec DesignSpec::fixed(NormType norm, double gamma) {
  DesignSpec s;
  s.norm = norm;
  s.gamma_mode = FixedGamma{gamma};
  return s;
}

DesignSpec DesignSpec::penalized(NormType norm, double c) {
  DesignSpec s;
  s.norm = norm;
  s.gamma_mode = PenalizedGamma{c};
  return s;
}

double DesignSpec::gamma() const {
  if (!is_fixed()) throw std::logic_error("DesignSpec: gamma() requested in penalised mode");
  return std::get<FixedGamma>(gamma_mode).gamma;
}

double DesignSpec::penalty() const {
  if (is_fixed()) throw std::logic_error("DesignSpec: penalty() requested in fixed-gamma mode");
  return std::get<PenalizedGamma>(gamma_mode).c;
}

Vector DesignSpec::rho_or_ones(int ny) const {
  return rho.size() == 0 ? Vector::Ones(ny) : rho;
}

void DesignSpec::validate(int ny) const {
  if (is_fixed()) {
    if (!(gamma() > 0.0) || !std::isfinite(gamma())) {
      throw std::invalid_argument("DesignSpec: gamma must be positive and finite");
    }
  } else if (!(penalty() >= 0.0) || !std::isfinite(penalty())) {
    throw std::invalid_argument("DesignSpec: penalty c must be nonnegative and finite");
  }
  if (rho.size() != 0) {
    if (rho.size() != ny) throw DimensionError("DesignSpec: rho must have N_y entries");
    if (!rho.allFinite() || (rho.array() < 0.0).any()) {
      throw std::invalid_argument("DesignSpec: rho must be finite and nonnegative");
    }
  }
  if (kappa_sq_max) {
    if (kappa_sq_max->size() != ny) throw DimensionError("DesignSpec: kappa_sq_max must have N_y entries");
    if ((kappa_sq_max->array() < 0.0).any() || kappa_sq_max->array().isNaN().any()) {
      throw std::invalid_argument("DesignSpec: kappa_sq_max entries must be nonnegative");
    }
  }
  if (!(lmi_margin >= 0.0)) throw std::invalid_argument("DesignSpec: lmi_margin must be >= 0");
}

int VariableLayout::x_index(int i, int j) const {
  return X.offset + sdp::svec_index(nx, i, j);
}
int VariableLayout::y_index(int i, int j) const { return Y.offset + i * ny + j; }
int VariableLayout::q_index(int i, int j) const {
  return Q.offset + sdp::svec_index(nz, i, j);
}

Matrix VariableLayout::X_of(const Vector& x) const {
  Matrix m(nx, nx);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nx; ++j) m(i, j) = x(x_index(i, j));
  return m;
}

Matrix VariableLayout::Y_of(const Vector& x) const {
  Matrix m(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) m(i, j) = x(y_index(i, j));
  return m;
}

Matrix VariableLayout::Q_of(const Vector& x) const {
  if (Q.size == 0) return Matrix(0, 0);
  Matrix m(nz, nz);
  for (int i = 0; i < nz; ++i)
    for (int j = 0; j < nz; ++j) m(i, j) = x(q_index(i, j));
  return m;
}

Vector VariableLayout::beta_of(const Vector& x) const { return x.segment(beta.offset, beta.size); }

std::optional<double> VariableLayout::gamma_var_of(const Vector& x) const {
  if (gamma_var.size == 0) return std::nullopt;
  return x(gamma_var.offset);
}

namespace {

// Affine symmetric matrix function F(x) = F0 + Σ_k x_k F_k of fixed side.
class AffineSym {
 public:
  AffineSym(int dim, int nvars) : f0_(Matrix::Zero(dim, dim)), coeffs_(nvars) {}

  int dim() const { return static_cast<int>(f0_.rows()); }
  Matrix& constant() { return f0_; }

  // Adds M at block (r0, c0) and Mᵀ at (c0, r0) of coefficient `var`
  // (or of the constant when var < 0). On diagonal blocks M must already
  // be symmetric and is added once.
  void add(int var, int r0, int c0, const Matrix& m) {
    Matrix& f = target(var);
    if (r0 == c0) {
      f.block(r0, c0, m.rows(), m.cols()) += m;
    } else {
      f.block(r0, c0, m.rows(), m.cols()) += m;
      f.block(c0, r0, m.cols(), m.rows()) += m.transpose();
    }
  }
  void add_entry(int var, int i, int j, double v) {
    Matrix& f = target(var);
    f(i, j) += v;
    if (i != j) f(j, i) += v;
  }

  // Writes the block as s = h − G x ⪰ 0, i.e. h = svec(F0), G = −svec(F_k).
  void emit(sdp::SdpProblem& p, int offset) const {
    const int len = sdp::svec_length(dim());
    p.h.segment(offset, len) = sdp::svec(f0_);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      if (coeffs_[k]) p.G.block(offset, static_cast<int>(k), len, 1) = -sdp::svec(*coeffs_[k]);
    }
  }

 private:
  Matrix& target(int var) {
    if (var < 0) return f0_;
    auto& c = coeffs_[var];
    if (!c) c = Matrix::Zero(dim(), dim());
    return *c;
  }

  Matrix f0_;
  std::vector<std::optional<Matrix>> coeffs_;
};

// Basis matrix of the symmetric variable (i, j).
Matrix sym_basis(int n, int i, int j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

Matrix unit_basis(int rows, int cols, int i, int j) {
  Matrix e = Matrix::Zero(rows, cols);
  e(i, j) = 1.0;
  return e;
}

struct OrthantRow {
  double h = 0.0;
  std::vector<std::pair<int, double>> g;  // (var, coefficient of G)
};

sdp::SdpProblem assemble(int nvars, const Vector& c, const std::vector<OrthantRow>& rows,
                         const std::vector<AffineSym>& blocks) {
  sdp::SdpProblem p;
  p.c = c;
  p.cones.nonneg_dim = static_cast<int>(rows.size());
  for (const auto& b : blocks) p.cones.psd_block_dims.push_back(b.dim());
  const int m = p.cones.dimension();
  p.G = Matrix::Zero(m, nvars);
  p.h = Vector::Zero(m);
  p.A = Matrix(0, nvars);
  p.b = Vector(0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    p.h(r) = rows[r].h;
    for (const auto& [var, val] : rows[r].g) p.G(r, var) += val;
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k].emit(p, p.cones.block_offset(k));
  return p;
}

VariableLayout make_layout(const LtiPlant& p, const DesignSpec& spec) {
  VariableLayout lay;
  lay.norm = spec.norm;
  lay.nx = p.nx();
  lay.ny = p.ny();
  lay.nz = p.nz();
  int next = 0;
  lay.X = {next, sdp::svec_length(lay.nx)};
  next += lay.X.size;
  lay.Y = {next, lay.nx * lay.ny};
  next += lay.Y.size;
  if (spec.norm == NormType::H2) {
    lay.Q = {next, sdp::svec_length(lay.nz)};
    next += lay.Q.size;
  }
  lay.beta = {next, lay.ny};
  next += lay.ny;
  if (!spec.is_fixed()) {
    lay.gamma_var = {next, 1};
    next += 1;
  }
  lay.num_vars = next;
  lay.cz_scale = spec.is_fixed() ? 1.0 / spec.gamma() : 1.0;
  return lay;
}

Vector objective(const VariableLayout& lay, const DesignSpec& spec) {
  Vector c = Vector::Zero(lay.num_vars);
  c.segment(lay.beta.offset, lay.ny) = spec.rho_or_ones(lay.ny);
  if (!spec.is_fixed()) c(lay.gamma_var.offset) = spec.penalty();
  return c;
}

// −(XA + YC_y) − (XA + YC_y)ᵀ and −(XB_d + YD_d)S_d contributions of the
// X and Y variables, placed at rows/cols [0, nx) and [nx, nx + nd).
void add_m11_m12(AffineSym& f, const LtiPlant& p, const VariableLayout& lay) {
  const int nx = lay.nx;
  const int nd = p.nd();
  const Matrix bds = p.B_d * p.S_d;
  const Matrix dds = p.D_d * p.S_d;
  for (int j = 0; j < nx; ++j) {
    for (int i = j; i < nx; ++i) {
      const Matrix e = sym_basis(nx, i, j);
      const Matrix ea = e * p.A;
      f.add(lay.x_index(i, j), 0, 0, -(ea + ea.transpose()));
      if (nd > 0) f.add(lay.x_index(i, j), 0, nx, -e * bds);
    }
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < lay.ny; ++j) {
      const Matrix e = unit_basis(nx, lay.ny, i, j);
      const Matrix ec = e * p.C_y;
      f.add(lay.y_index(i, j), 0, 0, -(ec + ec.transpose()));
      if (nd > 0) f.add(lay.y_index(i, j), 0, nx, -e * dds);
    }
  }
}

void check_inputs(const LtiPlant& p, const DesignSpec& spec) {
  p.validate();
  spec.validate(p.ny());
}

}  // namespace

LmiProblem build_h2(const LtiPlant& p, const DesignSpec& spec) {
  check_inputs(p, spec);
  if (spec.norm != NormType::H2) throw std::invalid_argument("build_h2: spec.norm must be H2");
  const VariableLayout lay = make_layout(p, spec);
  const int nx = lay.nx, ny = lay.ny, nz = lay.nz, nd = p.nd();
  const double eps = spec.lmi_margin;

  std::vector<OrthantRow> rows;
  for (int i = 0; i < ny; ++i) rows.push_back({0.0, {{lay.beta.offset + i, -1.0}}});
  {
    // γ² − ε − tr(Q) ≥ 0, or t − ε − tr(Q) ≥ 0 when penalised.
    OrthantRow tr;
    tr.h = spec.is_fixed() ? 1.0 - eps : -eps;
    for (int i = 0; i < nz; ++i) tr.g.push_back({lay.q_index(i, i), 1.0});
    if (!spec.is_fixed()) tr.g.push_back({lay.gamma_var.offset, -1.0});
    rows.push_back(tr);
  }

  std::vector<AffineSym> blocks;

  // Main LMI, negated: side nx + nd + ny.
  AffineSym main(nx + nd + ny, lay.num_vars);
  add_m11_m12(main, p, lay);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) main.add_entry(lay.y_index(i, j), i, nx + nd + j, -1.0);
  }
  for (int j = 0; j < ny; ++j) main.add_entry(lay.beta.offset + j, nx + nd + j, nx + nd + j, 1.0);
  main.constant().block(nx, nx, nd, nd) += Matrix::Identity(nd, nd);
  main.constant().diagonal().array() -= eps;
  blocks.push_back(std::move(main));

  // [Q  −C_z; −C_zᵀ  X] − εI ⪰ 0.
  AffineSym coupling(nz + nx, lay.num_vars);
  for (int j = 0; j < nz; ++j)
    for (int i = j; i < nz; ++i) coupling.add_entry(lay.q_index(i, j), i, j, 1.0);
  for (int j = 0; j < nx; ++j)
    for (int i = j; i < nx; ++i) coupling.add_entry(lay.x_index(i, j), nz + i, nz + j, 1.0);
  if (nz > 0) coupling.add(-1, 0, nz, -lay.cz_scale * p.C_z);
  coupling.constant().diagonal().array() -= eps;
  blocks.push_back(std::move(coupling));

  AffineSym xpos(nx, lay.num_vars);
  for (int j = 0; j < nx; ++j)
    for (int i = j; i < nx; ++i) xpos.add_entry(lay.x_index(i, j), i, j, 1.0);
  xpos.constant().diagonal().array() -= eps;
  blocks.push_back(std::move(xpos));

  if (nz > 0) {
    AffineSym qpos(nz, lay.num_vars);
    for (int j = 0; j < nz; ++j)
      for (int i = j; i < nz; ++i) qpos.add_entry(lay.q_index(i, j), i, j, 1.0);
    blocks.push_back(std::move(qpos));
  }

  return {assemble(lay.num_vars, objective(lay, spec), rows, blocks), lay};
}

LmiProblem build_hinf(const LtiPlant& p, const DesignSpec& spec) {
  check_inputs(p, spec);
  if (spec.norm != NormType::Hinf) throw std::invalid_argument("build_hinf: spec.norm must be Hinf");
  const VariableLayout lay = make_layout(p, spec);
  const int nx = lay.nx, ny = lay.ny, nz = lay.nz, nd = p.nd();
  const double eps = spec.lmi_margin;

  std::vector<OrthantRow> rows;
  for (int i = 0; i < ny; ++i) rows.push_back({0.0, {{lay.beta.offset + i, -1.0}}});

  std::vector<AffineSym> blocks;
  AffineSym main(nx + nd + nz + ny, lay.num_vars);
  add_m11_m12(main, p, lay);
  const int zoff = nx + nd;
  const int yoff = nx + nd + nz;
  if (nz > 0) main.add(-1, 0, zoff, -lay.cz_scale * p.C_z.transpose());
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) main.add_entry(lay.y_index(i, j), i, yoff + j, -1.0);
  }
  for (int j = 0; j < ny; ++j) main.add_entry(lay.beta.offset + j, yoff + j, yoff + j, 1.0);
  if (spec.is_fixed()) {
    main.constant().block(nx, nx, nd + nz, nd + nz) += Matrix::Identity(nd + nz, nd + nz);
  } else {
    for (int k = 0; k < nd + nz; ++k) main.add_entry(lay.gamma_var.offset, nx + k, nx + k, 1.0);
  }
  main.constant().diagonal().array() -= eps;
  blocks.push_back(std::move(main));

  AffineSym xpos(nx, lay.num_vars);
  for (int j = 0; j < nx; ++j)
    for (int i = j; i < nx; ++i) xpos.add_entry(lay.x_index(i, j), i, j, 1.0);
  xpos.constant().diagonal().array() -= eps;
  blocks.push_back(std::move(xpos));

  if (!spec.is_fixed() && nd + nz == 0) {
    rows.push_back({0.0, {{lay.gamma_var.offset, -1.0}}});
  }

  return {assemble(lay.num_vars, objective(lay, spec), rows, blocks), lay};
}

void add_precision_bounds(LmiProblem& lp, const DesignSpec& spec) {
  if (!spec.kappa_sq_max) return;
  const VariableLayout& lay = lp.layout;
  const Vector& kmax = *spec.kappa_sq_max;
  if (kmax.size() != lay.ny) throw DimensionError("add_precision_bounds: bounds must have N_y entries");

  std::vector<OrthantRow> extra;
  for (int i = 0; i < lay.ny; ++i) {
    if (!std::isfinite(kmax(i))) continue;
    OrthantRow r;
    r.g.push_back({lay.beta.offset + i, 1.0});
    if (spec.norm == NormType::H2 || spec.is_fixed()) {
      r.h = kmax(i);
    } else {
      r.g.push_back({lay.gamma_var.offset, -kmax(i)});
    }
    extra.push_back(std::move(r));
  }
  if (extra.empty()) return;

  sdp::SdpProblem& p = lp.problem;
  const int l_old = p.cones.nonneg_dim;
  const int add = static_cast<int>(extra.size());
  const int m_old = static_cast<int>(p.h.size());
  Matrix g(m_old + add, p.G.cols());
  Vector h(m_old + add);
  g.topRows(l_old) = p.G.topRows(l_old);
  h.head(l_old) = p.h.head(l_old);
  g.middleRows(l_old, add).setZero();
  for (int r = 0; r < add; ++r) {
    h(l_old + r) = extra[r].h;
    for (const auto& [var, val] : extra[r].g) g(l_old + r, var) += val;
  }
  g.bottomRows(m_old - l_old) = p.G.bottomRows(m_old - l_old);
  h.tail(m_old - l_old) = p.h.tail(m_old - l_old);
  p.G = std::move(g);
  p.h = std::move(h);
  p.cones.nonneg_dim += add;
}

LmiProblem build(const LtiPlant& p, const DesignSpec& spec) {
  LmiProblem lp = spec.norm == NormType::H2 ? build_h2(p, spec) : build_hinf(p, spec);
  add_precision_bounds(lp, spec);
  return lp;
}

std::string to_string(DesignStatus s) {
  switch (s) {
    case DesignStatus::Optimal: return "optimal";
    case DesignStatus::Infeasible: return "infeasible";
    case DesignStatus::MaxIter: return "max_iter";
    case DesignStatus::NumericalFailure: return "numerical_failure";
    case DesignStatus::PolishInfeasible: return "polish_infeasible";
  }
  return "unknown";
}

DesignResult recover_design(const sdp::SdpSolution& sol, const VariableLayout& layout,
                            const DesignSpec& spec, const LtiPlant& p) {
  if (sol.status != sdp::Status::Optimal) {
    throw std::invalid_argument("recover_design: solver status is " + sdp::to_string(sol.status));
  }
  if (layout.nx != p.nx() || layout.ny != p.ny()) {
    throw DimensionError("recover_design: layout does not match plant");
  }
  DesignResult r;
  r.status = DesignStatus::Optimal;
  r.norm = spec.norm;
  r.solver = sol;
  r.point.X = layout.X_of(sol.x);
  r.point.Y = layout.Y_of(sol.x);
  r.point.Q = layout.Q_of(sol.x) / (layout.cz_scale * layout.cz_scale);
  r.point.beta = layout.beta_of(sol.x);
  r.point.gamma_var = layout.gamma_var_of(sol.x);

  const Matrix& X = r.point.X;
  if (layout.nx > 0) {
    const double xmin = linalg::min_eigenvalue(X);
    if (!(xmin > std::numeric_limits<double>::epsilon() * X.norm())) {
      std::ostringstream os;
      os << "recover_design: X is numerically singular (min eigenvalue " << xmin << ")";
      throw ConditioningError(os.str());
    }
  }
  r.L = X.ldlt().solve(r.point.Y);

  if (spec.is_fixed()) {
    r.gamma = spec.gamma();
  } else if (spec.norm == NormType::H2) {
    r.gamma = std::sqrt(std::max(0.0, *r.point.gamma_var));
  } else {
    r.gamma = *r.point.gamma_var;
  }

  Vector ksq = r.point.beta.cwiseMax(0.0);
  if (spec.norm == NormType::Hinf && !spec.is_fixed()) ksq /= r.gamma;
  r.kappa_sq = PrecisionVector::from_values(ksq);
  r.support = r.kappa_sq.support;
  r.objective = spec.rho_or_ones(layout.ny).dot(ksq);
  return r;
}

}  // namespace sparseobs
