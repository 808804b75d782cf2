#pragma once

// Independent checks on an assembled error system: H2 and H∞ norms,
// norm certificates, and time-domain simulation of the error dynamics.

#include <complex>
#include <cstdint>

#include "sparseobs/model.hpp"
#include "sparseobs/sdp.hpp"

namespace sparseobs {

class UnstableSystemError : public UnstableMatrixError {
 public:
  using UnstableMatrixError::UnstableMatrixError;
};

struct H2Report {
  double value = 0.0;
  /// ‖A P + P Aᵀ + B Bᵀ‖ for the computed Gramian P.
  double lyapunov_residual = 0.0;
};

/// sqrt(trace(C_z P C_zᵀ)) with A_cl P + P A_clᵀ + B_cl B_clᵀ = 0.
H2Report h2_report(const ErrorSystem& sys);
double h2_norm(const ErrorSystem& sys);

struct HinfReport {
  double value = 0.0;  // upper end of the bracket
  double lower = 0.0;  // attained by σ_max(G(jω)) at `peak_frequency`
  double peak_frequency = 0.0;
  int iterations = 0;
};

/// Largest singular value of C_z (jωI − A_cl)⁻¹ B_cl.
double sigma_max(const ErrorSystem& sys, double omega);

/// Level-set bisection on the Hamiltonian
///   H(γ) = [ A  BBᵀ/γ² ; −CᵀC  −Aᵀ ],
/// which has an imaginary eigenvalue iff γ is a singular value of G(jω) for
/// some ω. The lower end moves to the largest σ_max at the midpoints of the
/// crossing frequencies; the loop stops once H((1 + 2 tol)·lower) has no
/// imaginary eigenvalues.
HinfReport hinf_report(const ErrorSystem& sys, double rel_tol = 1e-6);
double hinf_norm(const ErrorSystem& sys, double rel_tol = 1e-6);

/// Bounded-real LMI: minimise g subject to P ≻ 0 and
///   [ AᵀP + PA  PB   Cᵀ  ]
///   [ BᵀP      −gI   0   ] ≺ 0.
///   [ C         0   −gI  ]
/// The optimal g equals the H∞ norm.
double hinf_norm_lmi(const ErrorSystem& sys, const sdp::SolverOptions& opts = {});

struct NormCertificate {
  NormType norm = NormType::H2;
  double value = 0.0;
  double gamma_target = 0.0;
  bool satisfied = false;  // value < gamma_target·(1 + rel_tol)
  double rel_tol = 0.0;
  /// Lyapunov residual (H2) or bracket width (H∞).
  double accuracy = 0.0;
};

/// Relative H∞ bracket used by certify().
inline constexpr double kCertificateTol = 1e-10;

/// Default slack for certify(): interior-point solutions meet the LMIs only
/// to the solver's feasibility tolerance.
inline constexpr double kCertificateSlack = 1e-6;

NormCertificate certify(const ErrorSystem& sys, NormType norm, double gamma_target,
                        double rel_tol = kCertificateSlack);

struct NoiseModel {
  enum class Kind { None, White, BandLimited };
  Kind kind = Kind::BandLimited;
  /// Low-pass pole in rad/s (BandLimited only).
  double bandwidth = 100.0;
};

struct SimulationOptions {
  double step = 1e-3;
  double horizon = 10.0;
  /// Empty means (1, 0.01, ..., 0.01).
  Vector e0;
  NoiseModel noise;
  std::uint64_t seed = 42;
};

/// Trajectories on the grid t_k = k·h, k = 0..round(T/h).
struct SimulationRun {
  Vector time;
  Matrix error;   // one row per time step, N_x columns
  Matrix output;  // one row per time step, N_z columns
  double step = 0.0;
  std::uint64_t seed = 0;
  NoiseModel noise;
};

/// Exact zero-order-hold discretisation of the error dynamics driven by
/// piecewise-constant noise. Every input channel has its own generator
/// seeded from (seed, channel id), so channels shared by two error systems
/// of the same plant receive identical samples.
///   White:       samples N(0, 1/h) (unit intensity).
///   BandLimited: w_{k+1} = a w_k + sqrt(1 − a²) ξ_k, a = exp(−ω_b h),
///                started in its stationary unit-variance distribution.
SimulationRun simulate(const ErrorSystem& sys, const SimulationOptions& opts = {});

/// RMS of ‖ε‖ over samples with t ≥ t_start.
double stationary_rms(const SimulationRun& run, double t_start);

struct DecayCheck {
  double alpha = 0.0;      // |max Re λ(A_cl)| / 2
  double constant = 0.0;   // κ(V), V the eigenvector matrix
  double max_ratio = 0.0;  // max_t ‖e(t)‖ / (C e^{−αt} ‖e0‖)
  bool ok = false;         // max_ratio ≤ 1
};

/// Checks ‖e(t)‖ ≤ κ(V) e^{−αt} ‖e0‖ on a noise-free run.
DecayCheck check_decay(const ErrorSystem& sys, const SimulationRun& run);

}  // namespace sparseobs
