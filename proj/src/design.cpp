#include "sparseobs/design.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace sparseobs {

void ReweightOptions::validate() const {
  if (!(epsilon > 0.0) || !(lambda > 0.0) || max_iters < 1 || !(support_tol > 0.0) ||
      !(convergence_tol > 0.0)) {
    throw std::invalid_argument("ReweightOptions: all options must be positive");
  }
}

std::vector<int> relative_support(const Vector& v, double rel_tol) {
  std::vector<int> out;
  if (v.size() == 0) return out;
  const double mx = v.maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > 0.0 && v(i) > rel_tol * mx) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

DesignStatus map_status(sdp::Status s) {
  switch (s) {
    case sdp::Status::Optimal: return DesignStatus::Optimal;
    case sdp::Status::Infeasible: return DesignStatus::Infeasible;
    case sdp::Status::MaxIter: return DesignStatus::MaxIter;
    default: return DesignStatus::NumericalFailure;
  }
}

// Scatters a result computed on the sensors in `support` back onto all
// ny sensors of the original plant.
DesignResult expand(DesignResult r, const std::vector<int>& support, int ny) {
  if (r.status != DesignStatus::Optimal) return r;
  const int nx = static_cast<int>(r.L.rows());
  Matrix l = Matrix::Zero(nx, ny);
  Matrix y = Matrix::Zero(nx, ny);
  Vector k = Vector::Zero(ny);
  Vector b = Vector::Zero(ny);
  for (std::size_t j = 0; j < support.size(); ++j) {
    l.col(support[j]) = r.L.col(j);
    y.col(support[j]) = r.point.Y.col(j);
    k(support[j]) = r.kappa_sq.kappa_sq(j);
    b(support[j]) = r.point.beta(j);
  }
  r.L = std::move(l);
  r.point.Y = std::move(y);
  r.point.beta = std::move(b);
  r.kappa_sq = PrecisionVector::from_values(k);
  r.support = r.kappa_sq.support;
  return r;
}

DesignSpec restrict_spec(const DesignSpec& spec, const std::vector<int>& support) {
  DesignSpec s = spec;
  s.rho = Vector();
  if (spec.kappa_sq_max) {
    Vector k(static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) k(j) = (*spec.kappa_sq_max)(support[j]);
    s.kappa_sq_max = k;
  }
  return s;
}

void check_support(const std::vector<int>& support, int ny) {
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= ny) throw DimensionError("support index out of range");
    if (j > 0 && support[j - 1] >= support[j]) {
      throw std::invalid_argument("support must be strictly ascending");
    }
  }
}

DesignResult solve_on_subset(const LtiPlant& p, const DesignSpec& spec, const std::vector<int>& support,
                             const sdp::SolverOptions& solver) {
  const LtiPlant q = restrict_sensors(p, support);
  return expand(solve_design(q, restrict_spec(spec, support), solver), support, p.ny());
}

}  // namespace

DesignResult solve_design(const LtiPlant& p, const DesignSpec& spec, const sdp::SolverOptions& solver) {
  const LmiProblem lp = build(p, spec);
  const sdp::SdpSolution sol = sdp::solve(lp.problem, solver);
  DesignResult r;
  r.norm = spec.norm;
  r.solver = sol;
  r.status = map_status(sol.status);
  if (r.status != DesignStatus::Optimal) return r;
  try {
    r = recover_design(sol, lp.layout, spec, p);
  } catch (const ConditioningError&) {
    r.status = DesignStatus::NumericalFailure;
  }
  return r;
}

DesignResult reweighted_solve(const LtiPlant& p, const DesignSpec& spec, const ReweightOptions& opts,
                              const sdp::SolverOptions& solver) {
  opts.validate();
  spec.validate(p.ny());
  Vector rho = spec.rho_or_ones(p.ny());
  std::vector<IterationRecord> trace;
  DesignResult last;
  bool have = false;

  for (int k = 0; k < opts.max_iters; ++k) {
    // The minimiser does not depend on the scale of ρ; unit max keeps the
    // objective well scaled for the solver's relative tolerances.
    DesignSpec s = spec;
    const double rmax = rho.size() ? rho.maxCoeff() : 1.0;
    s.rho = rmax > 0.0 ? Vector(rho / rmax) : rho;
    DesignResult r = solve_design(p, s, solver);
    if (r.status != DesignStatus::Optimal) {
      if (!have) {
        r.iterations = std::move(trace);
        return r;
      }
      last.status = r.status;
      break;
    }

    const std::vector<int> support = relative_support(r.kappa_sq.kappa_sq, opts.support_tol);
    r.support = support;
    r.kappa_sq.support = support;

    IterationRecord rec;
    rec.rho = rho;
    rec.beta = r.point.beta;
    rec.kappa_sq = r.kappa_sq.kappa_sq;
    rec.weighted_objective = rho.dot(r.point.beta);
    rec.unit_objective = r.point.beta.sum();
    rec.support = support;
    rec.solver_status = r.solver.status;

    const bool converged =
        have && support == trace.back().support &&
        std::abs(rec.unit_objective - trace.back().unit_objective) <=
            opts.convergence_tol * std::max(std::abs(trace.back().unit_objective),
                                            std::numeric_limits<double>::min());
    trace.push_back(rec);
    last = std::move(r);
    have = true;
    if (converged) break;

    rho = (opts.epsilon + opts.lambda * rec.beta.array().abs()).inverse().matrix();
  }
  last.iterations = std::move(trace);
  return last;
}

DesignResult polish(const LtiPlant& p, const DesignSpec& spec, const std::vector<int>& support,
                    const sdp::SolverOptions& solver) {
  spec.validate(p.ny());
  check_support(support, p.ny());
  DesignResult r = solve_on_subset(p, spec, support, solver);
  if (r.status == DesignStatus::Infeasible) r.status = DesignStatus::PolishInfeasible;
  return r;
}

DesignResult sparse_design(const LtiPlant& p, const DesignSpec& spec, const ReweightOptions& opts,
                           const sdp::SolverOptions& solver) {
  DesignResult rw = reweighted_solve(p, spec, opts, solver);
  if (rw.iterations.empty()) return rw;
  DesignResult out = polish(p, spec, rw.support, solver);
  out.iterations = std::move(rw.iterations);
  return out;
}

std::vector<std::uint32_t> subset_order(int n) {
  if (n < 0 || n > 31) throw std::invalid_argument("subset_order: n must be in [0, 31]");
  std::vector<std::uint32_t> out;
  out.reserve(std::size_t{1} << n);
  for (int r = 0; r <= n; ++r) {
    // Lexicographic r-combinations of {0..n−1}.
    std::vector<int> idx(r);
    for (int i = 0; i < r; ++i) idx[i] = i;
    while (true) {
      std::uint32_t m = 0;
      for (int i : idx) m |= std::uint32_t{1} << i;
      out.push_back(m);
      int i = r - 1;
      while (i >= 0 && idx[i] == n - r + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

ExhaustiveResult exhaustive_search(const LtiPlant& p, const DesignSpec& spec, const ExhaustiveOptions& opts,
                                   const sdp::SolverOptions& solver) {
  spec.validate(p.ny());
  const int ny = p.ny();
  if (ny > opts.max_sensors) {
    throw std::invalid_argument("exhaustive_search: N_y exceeds the enumeration limit");
  }
  const std::vector<std::uint32_t> order = subset_order(ny);
  std::vector<DesignResult> results(order.size());

  auto support_of = [ny](std::uint32_t m) {
    std::vector<int> s;
    for (int i = 0; i < ny; ++i) {
      if (m & (std::uint32_t{1} << i)) s.push_back(i);
    }
    return s;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      results[k] = solve_on_subset(p, spec, support_of(order[k]), solver);
    }
  };
  int nthreads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp(nthreads, 1, static_cast<int>(order.size()));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExhaustiveResult out;
  int best = -1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    SubsetRecord rec;
    rec.mask = order[k];
    rec.r = static_cast<int>(support_of(order[k]).size());
    rec.status = results[k].status;
    rec.l1_of_kappa_sq = rec.status == DesignStatus::Optimal ? results[k].kappa_sq.l1()
                                                             : std::numeric_limits<double>::quiet_NaN();
    out.table.push_back(rec);
    if (rec.status != DesignStatus::Optimal) continue;
    if (best < 0 || (rec.r == out.table[best].r && rec.l1_of_kappa_sq < out.table[best].l1_of_kappa_sq)) {
      best = static_cast<int>(k);
    }
  }
  if (best < 0) {
    out.best.status = DesignStatus::Infeasible;
    out.best.norm = spec.norm;
    return out;
  }
  out.best = std::move(results[best]);
  out.best_mask = order[best];
  return out;
}

}  // namespace sparseobs
