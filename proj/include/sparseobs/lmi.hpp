#pragma once

// Lowering of the sparse H2 / H∞ observer programs into conic form.
//
// Decision variables are X (symmetric N_x×N_x), Y (N_x×N_y), β (N_y),
// Q (symmetric N_z×N_z, H2 only) and, when γ is penalised rather than fixed,
// one extra scalar: t ≥ tr(Q) for H2 (γ = √t) or γ itself for H∞.
//
// H2 (γ fixed):
//   minimize Σ ρ_i β_i  s.t.
//     [ M11   M12  Y        ]
//     [ M12ᵀ  −I   0        ] ≺ 0,   [ −Q   C_z ]
//     [ Yᵀ    0   −diag(β)  ]        [ C_zᵀ −X  ] ≺ 0,   tr(Q) < γ²,
//   with M11 = sym(XA + YC_y), M12 = (XB_d + YD_d)S_d.
//
// H∞ (γ fixed):
//   minimize Σ ρ_i β_i  s.t.
//     [ M11   M12   C_zᵀ  Y       ]
//     [ M12ᵀ  −γI   0     0       ]
//     [ C_z   0     −γI   0       ] ≺ 0.
//     [ Yᵀ    0     0    −diag(β) ]
//   Here X and Y are the γ-rescaled variables; L = X⁻¹Y is unaffected.
//
// With γ fixed both programs are assembled for C_z/γ and a unit bound, so
// the margins below are relative to γ; then κ² = β for either norm. With γ
// penalised, κ² = β (H2) or β/γ (H∞). Every strict inequality F ≺ 0 is
// emitted as −F − ε·I ⪰ 0 with ε = DesignSpec::lmi_margin.

#include <optional>
#include <variant>
#include <vector>

#include "sparseobs/model.hpp"
#include "sparseobs/sdp.hpp"

namespace sparseobs {

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixedGamma {
  double gamma = 1.0;
};

/// Minimise ‖β‖₁,ρ + c·γ (H∞) or ‖β‖₁,ρ + c·γ² (H2, through t ≥ tr Q).
struct PenalizedGamma {
  double c = 0.0;
};

struct DesignSpec {
  NormType norm = NormType::H2;
  std::variant<FixedGamma, PenalizedGamma> gamma_mode = FixedGamma{};
  /// Weights ρ; empty means all ones.
  Vector rho;
  /// Upper bounds on κ²; +inf entries are unbounded.
  std::optional<Vector> kappa_sq_max;
  double lmi_margin = 1e-8;

  static DesignSpec fixed(NormType norm, double gamma);
  static DesignSpec penalized(NormType norm, double c);

  bool is_fixed() const { return std::holds_alternative<FixedGamma>(gamma_mode); }
  double gamma() const;    // fixed mode only
  double penalty() const;  // penalised mode only
  Vector rho_or_ones(int ny) const;
  void validate(int ny) const;
};

struct VarRange {
  int offset = 0;
  int size = 0;
};

struct VariableLayout {
  NormType norm = NormType::H2;
  int nx = 0, ny = 0, nz = 0;
  VarRange X, Y, Q, beta;
  /// t (H2) or γ (H∞) in penalised mode; size 0 otherwise.
  VarRange gamma_var;
  int num_vars = 0;
  /// Factor applied to C_z when assembling (1/γ in fixed mode, else 1).
  double cz_scale = 1.0;

  /// Index of X(i, j) in the decision vector (either triangle).
  int x_index(int i, int j) const;
  int y_index(int i, int j) const;
  int q_index(int i, int j) const;

  Matrix X_of(const Vector& x) const;
  Matrix Y_of(const Vector& x) const;
  Matrix Q_of(const Vector& x) const;
  Vector beta_of(const Vector& x) const;
  std::optional<double> gamma_var_of(const Vector& x) const;
};

struct LmiProblem {
  sdp::SdpProblem problem;
  VariableLayout layout;
};

LmiProblem build_h2(const LtiPlant& p, const DesignSpec& spec);
LmiProblem build_hinf(const LtiPlant& p, const DesignSpec& spec);
/// Dispatches on spec.norm and applies precision bounds when present.
LmiProblem build(const LtiPlant& p, const DesignSpec& spec);

/// Appends β_i ≤ κ²_max,i (or β_i ≤ γ·κ²_max,i for penalised H∞) as orthant rows.
/// Infinite bounds add nothing.
void add_precision_bounds(LmiProblem& lp, const DesignSpec& spec);

enum class DesignStatus { Optimal, Infeasible, MaxIter, NumericalFailure, PolishInfeasible };
std::string to_string(DesignStatus s);

/// Raw LMI variables of a solved program (X, Y possibly γ-rescaled).
struct LmiPoint {
  Matrix X, Y, Q;
  Vector beta;
  std::optional<double> gamma_var;
};

struct IterationRecord {
  Vector rho;
  Vector beta;
  Vector kappa_sq;
  double weighted_objective = 0.0;  // Σ ρ_i β_i
  double unit_objective = 0.0;      // Σ β_i
  std::vector<int> support;
  sdp::Status solver_status = sdp::Status::Optimal;
};

struct DesignResult {
  DesignStatus status = DesignStatus::NumericalFailure;
  NormType norm = NormType::H2;
  Matrix L;
  PrecisionVector kappa_sq;
  double gamma = 0.0;
  /// ‖κ²‖₁ weighted with the ρ the design was solved with.
  double objective = 0.0;
  std::vector<int> support;
  std::vector<IterationRecord> iterations;
  LmiPoint point;
  sdp::SdpSolution solver;
};

/// L = X⁻¹Y, κ² from β, γ from the spec or the optimised variable.
/// Throws ConditioningError if X is numerically singular.
DesignResult recover_design(const sdp::SdpSolution& sol, const VariableLayout& layout,
                            const DesignSpec& spec, const LtiPlant& p);

}  // namespace sparseobs
