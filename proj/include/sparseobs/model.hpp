#pragma once

// Plant, observer-error and sensor-precision data model.
//
// The plant is
//   ẋ = A x + B_u u + B_d d + B_n n,   y = C_y x + D_u u + D_d d + D_n n,   z = C_z x
// with the sensor-noise channels fixed to B_n = 0 and D_n = I, so they are
// implied rather than stored. A Luenberger observer with gain L produces the
// error system ė = (A + L C_y) e + (B_w̄ + L D_w̄) w̄, ε = C_z e, where the
// disturbance has been scaled by S_d (process) and S_n = diag(κ)⁻¹ (sensors).

#include <string>
#include <vector>

#include "sparseobs/linalg.hpp"

namespace sparseobs {

enum class NormType { H2, Hinf };

std::string to_string(NormType n);
NormType parse_norm(const std::string& s);

class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotDetectableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LtiPlant {
  Matrix A;    // N_x × N_x
  Matrix B_u;  // N_x × N_u
  Matrix B_d;  // N_x × N_d
  Matrix C_y;  // N_y × N_x
  Matrix C_z;  // N_z × N_x
  Matrix D_u;  // N_y × N_u
  Matrix D_d;  // N_y × N_d
  Matrix S_d;  // N_d × N_d, diagonal, nonnegative

  std::vector<std::string> sensor_names;  // empty, or N_y names

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B_u.cols()); }
  int nd() const { return static_cast<int>(B_d.cols()); }
  int ny() const { return static_cast<int>(C_y.rows()); }
  int nz() const { return static_cast<int>(C_z.rows()); }

  /// Dimension, finiteness and S_d structure checks.
  void validate() const;
  std::string sensor_name(int i) const;
};

/// PBH test: every eigenvalue λ of A with Re λ ≥ 0 must satisfy
/// rank [A − λI; C_y] = N_x (singular-value tolerance 1e-8·‖A‖).
bool is_detectable(const Matrix& a, const Matrix& c);

/// validate() plus detectability of (A, C_y); throws NotDetectableError.
void check_plant(const LtiPlant& p);

struct NormWeights {
  Matrix W_u;  // N_u × N_u
  Matrix W_w;  // (N_d + N_y) square, block diagonal diag(W_d, I)
  Matrix W_z;  // N_z × N_z
};

/// Normalised plant: B_u W_u, D_u W_u, [B_d 0] W_w, [D_d I] W_w, W_z C_z.
/// The sensor part of W_w must be the identity so that the normalised plant
/// still has B_n = 0 and D_n = I.
LtiPlant apply_weights(const LtiPlant& p, const NormWeights& w);

/// Keeps only the sensors listed in `support` (ascending, 0-based).
LtiPlant restrict_sensors(const LtiPlant& p, const std::vector<int>& support);

struct PrecisionVector {
  Vector kappa_sq;
  std::vector<int> support;

  /// Support = {i : κ²_i > rel_tol · max κ²} (with rel_tol = 0 this is the
  /// set of strictly positive entries).
  static PrecisionVector from_values(const Vector& kappa_sq, double rel_tol = 0.0);

  double l1() const { return kappa_sq.cwiseAbs().sum(); }
  int size() const { return static_cast<int>(kappa_sq.size()); }
};

struct ErrorSystem {
  Matrix A_cl;  // A + L C_y
  Matrix B_cl;  // columns: process channels, then support sensor channels
  Matrix C_z;
  /// Identifier of each B_cl column: j for process channel j, N_d + i for
  /// sensor i of the originating plant.
  std::vector<int> input_channels;
};

/// Tolerance below which a gain column counts as zero.
inline constexpr double kZeroGainTol = 1e-12;

/// Assembles the error system for gain L and precisions κ². Sensors outside
/// the support contribute neither a measurement nor a noise channel, so
/// their gain column must be zero.
ErrorSystem build_error_system(const LtiPlant& p, const Matrix& L, const PrecisionVector& kappa_sq);

}  // namespace sparseobs
