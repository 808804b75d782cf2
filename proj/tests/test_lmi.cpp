#include <doctest.h>

#include <cmath>
#include <set>

#include "sparseobs/analysis.hpp"
#include "sparseobs/lmi.hpp"
#include "support.hpp"

using namespace sparseobs;

namespace {

DesignResult solve_raw(const LtiPlant& p, const DesignSpec& s) {
  const LmiProblem lp = build(p, s);
  const sdp::SdpSolution sol = sdp::solve(lp.problem);
  REQUIRE(sol.status == sdp::Status::Optimal);
  return recover_design(sol, lp.layout, s, p);
}

}  // namespace

// Scalar plant ẋ = −x + d, y = x + n/κ, z = x with gain l = −m:
//   H2²  = (1 + m²/κ²) / (2(1 + m))        minimised at m = 2(1 − 2γ²)/(2γ²)
//   H∞   = sqrt(1 + m²/κ²) / (1 + m)        (peak at ω = 0)
// For γ = 0.5 the least precision is κ² = 8 at L = −2 (H2) and κ² = 3 at
// L = −3 (H∞).
TEST_SUITE("lmi") {

TEST_CASE("spec validation") {
  CHECK_THROWS(DesignSpec::fixed(NormType::H2, 0.0).validate(1));
  CHECK_THROWS(DesignSpec::fixed(NormType::H2, INFINITY).validate(1));
  CHECK_THROWS(DesignSpec::penalized(NormType::H2, -1.0).validate(1));
  DesignSpec s = DesignSpec::fixed(NormType::Hinf, 1.0);
  s.rho = Vector{{1.0, -1.0}};
  CHECK_THROWS(s.validate(2));
  s.rho = Vector::Ones(3);
  CHECK_THROWS_AS(s.validate(2), DimensionError);
  s.rho = Vector();
  s.kappa_sq_max = Vector{{1.0, -2.0}};
  CHECK_THROWS(s.validate(2));
  s.kappa_sq_max = Vector{{1.0, INFINITY}};
  CHECK_NOTHROW(s.validate(2));
  CHECK((s.rho_or_ones(2) - Vector::Ones(2)).norm() == 0.0);
  CHECK_THROWS(s.penalty());
}

TEST_CASE("variable layout covers every index once") {
  LtiPlant p = testing::scalar_plant();
  p.A = Matrix{{-1.0, 0.3}, {0.0, -2.0}};
  p.B_u = Matrix::Zero(2, 1);
  p.B_d = Matrix{{1.0}, {1.0}};
  p.C_y = Matrix::Identity(2, 2);
  p.C_z = Matrix::Identity(2, 2);
  p.D_u = Matrix::Zero(2, 1);
  p.D_d = Matrix::Zero(2, 1);
  for (NormType n : {NormType::H2, NormType::Hinf}) {
    for (bool fixed : {true, false}) {
      const DesignSpec s = fixed ? DesignSpec::fixed(n, 1.0) : DesignSpec::penalized(n, 1.0);
      const VariableLayout l = build(p, s).layout;
      std::set<int> seen;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j <= i; ++j) {
          CHECK(l.x_index(i, j) == l.x_index(j, i));
          seen.insert(l.x_index(i, j));
          if (n == NormType::H2) seen.insert(l.q_index(i, j));
        }
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) seen.insert(l.y_index(i, j));
      for (int i = 0; i < l.beta.size; ++i) seen.insert(l.beta.offset + i);
      if (l.gamma_var.size) seen.insert(l.gamma_var.offset);
      CHECK(static_cast<int>(seen.size()) == l.num_vars);
      CHECK(*seen.rbegin() == l.num_vars - 1);
      CHECK(l.gamma_var.size == (fixed ? 0 : 1));
    }
  }
}

TEST_CASE("scalar H2 design matches the closed form") {
  const LtiPlant p = testing::scalar_plant();
  const DesignResult r = solve_raw(p, DesignSpec::fixed(NormType::H2, 0.5));
  CHECK(r.kappa_sq.kappa_sq(0) == doctest::Approx(8.0).epsilon(1e-4));
  CHECK(r.L(0, 0) == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(r.gamma == 0.5);
  const ErrorSystem sys = build_error_system(p, r.L, r.kappa_sq);
  CHECK(h2_norm(sys) <= 0.5);
}

TEST_CASE("scalar H-infinity design matches the closed form") {
  const LtiPlant p = testing::scalar_plant();
  const DesignResult r = solve_raw(p, DesignSpec::fixed(NormType::Hinf, 0.5));
  CHECK(r.kappa_sq.kappa_sq(0) == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(r.L(0, 0) == doctest::Approx(-3.0).epsilon(1e-3));
  const ErrorSystem sys = build_error_system(p, r.L, r.kappa_sq);
  CHECK(hinf_norm(sys, 1e-10) <= 0.5 * (1.0 + 1e-6));
}

TEST_CASE("a loose bound needs no sensor") {
  // With γ² > 1/2 the open-loop error already meets the H2 bound.
  const DesignResult r = solve_raw(testing::scalar_plant(), DesignSpec::fixed(NormType::H2, 0.8));
  CHECK(r.kappa_sq.kappa_sq(0) <= 1e-6);
}

TEST_CASE("penalised H2 trades precision against gamma squared") {
  // κ²(t) = (1 − 2t)/t² with t = γ²; c = 96 puts the minimum of κ² + c·t at t = 1/4.
  const DesignResult r = solve_raw(testing::scalar_plant(), DesignSpec::penalized(NormType::H2, 96.0));
  CHECK(r.gamma == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(r.kappa_sq.kappa_sq(0) == doctest::Approx(8.0).epsilon(1e-3));
  REQUIRE(r.point.gamma_var.has_value());
  CHECK(*r.point.gamma_var == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("penalised H-infinity reports a certified gamma") {
  const LtiPlant p = testing::scalar_plant();
  const DesignResult r = solve_raw(p, DesignSpec::penalized(NormType::Hinf, 10.0));
  REQUIRE(r.gamma > 0.0);
  const ErrorSystem sys = build_error_system(p, r.L, r.kappa_sq);
  CHECK(hinf_norm(sys, 1e-10) <= r.gamma * (1.0 + 1e-6));
}

TEST_CASE("precision bounds") {
  const LtiPlant p = testing::scalar_plant();
  DesignSpec s = DesignSpec::fixed(NormType::H2, 0.5);
  const int rows = build(p, s).problem.cones.nonneg_dim;
  s.kappa_sq_max = Vector::Constant(1, INFINITY);
  CHECK(build(p, s).problem.cones.nonneg_dim == rows);
  s.kappa_sq_max = Vector::Constant(1, 9.0);
  CHECK(build(p, s).problem.cones.nonneg_dim == rows + 1);
  CHECK(solve_raw(p, s).kappa_sq.kappa_sq(0) == doctest::Approx(8.0).epsilon(1e-4));
  s.kappa_sq_max = Vector::Constant(1, 7.0);
  CHECK(sdp::solve(build(p, s).problem).status == sdp::Status::Infeasible);
}

TEST_CASE("recover_design refuses non-optimal solutions") {
  const LtiPlant p = testing::scalar_plant();
  const DesignSpec s = DesignSpec::fixed(NormType::H2, 0.5);
  const LmiProblem lp = build(p, s);
  sdp::SdpSolution sol;
  sol.status = sdp::Status::Infeasible;
  CHECK_THROWS_AS(recover_design(sol, lp.layout, s, p), std::invalid_argument);
  CHECK(to_string(DesignStatus::PolishInfeasible) == "polish_infeasible");
}

}
