#pragma once

// Sparse precision design: iterative reweighted ℓ1, polishing on the
// detected support, and the exhaustive-search baseline.

#include <cstdint>
#include <vector>

#include "sparseobs/lmi.hpp"

namespace sparseobs {

struct ReweightOptions {
  double epsilon = 1e-4;
  double lambda = 1.0;
  int max_iters = 10;
  /// Support = {i : β_i > support_tol · max β}.
  double support_tol = 1e-6;
  /// Relative change of the unit-weight objective for early stopping.
  double convergence_tol = 1e-4;

  void validate() const;
};

/// Indices with v_i > rel_tol · max v (and v_i > 0).
std::vector<int> relative_support(const Vector& v, double rel_tol);

/// Builds, solves and recovers one program. Solver statuses other than
/// Optimal are mapped onto DesignStatus; L and κ² are then empty.
DesignResult solve_design(const LtiPlant& p, const DesignSpec& spec,
                          const sdp::SolverOptions& solver = {});

/// Reweighted ℓ1 loop starting from spec.rho (unit weights when empty).
/// Stops after max_iters solves, or earlier once two consecutive supports
/// agree and the unit-weight objective changed by less than
/// convergence_tol. If a later solve fails, the last successful iterate is
/// returned with the failing status. The result is not polished.
DesignResult reweighted_solve(const LtiPlant& p, const DesignSpec& spec,
                              const ReweightOptions& opts = {},
                              const sdp::SolverOptions& solver = {});

/// Re-solves on the given sensors with unit weights. Precisions and gain
/// columns of the other sensors are exactly zero. An infeasible reduced
/// problem gives PolishInfeasible.
DesignResult polish(const LtiPlant& p, const DesignSpec& spec, const std::vector<int>& support,
                    const sdp::SolverOptions& solver = {});

/// reweighted_solve followed by polish on its support. The iteration trace
/// of the reweighted phase is kept in the returned result.
DesignResult sparse_design(const LtiPlant& p, const DesignSpec& spec,
                           const ReweightOptions& opts = {},
                           const sdp::SolverOptions& solver = {});

struct SubsetRecord {
  std::uint32_t mask = 0;  // bit i set when sensor i is kept
  int r = 0;
  DesignStatus status = DesignStatus::NumericalFailure;
  double l1_of_kappa_sq = 0.0;  // NaN unless Optimal
};

struct ExhaustiveResult {
  /// Winner expanded to the full sensor set; status Infeasible when no
  /// subset is feasible.
  DesignResult best;
  std::uint32_t best_mask = 0;
  /// Every subset, ordered by r then lexicographically by sensor indices.
  std::vector<SubsetRecord> table;
};

struct ExhaustiveOptions {
  int max_sensors = 20;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
};

/// Subsets of {0..n−1} by increasing size, lexicographic within a size.
std::vector<std::uint32_t> subset_order(int n);

/// Solves the unit-weight program for every sensor subset and returns the
/// feasible subset of least cardinality, ties broken by ‖κ²‖₁ and then by
/// enumeration order.
ExhaustiveResult exhaustive_search(const LtiPlant& p, const DesignSpec& spec,
                                   const ExhaustiveOptions& opts = {},
                                   const sdp::SolverOptions& solver = {});

}  // namespace sparseobs
