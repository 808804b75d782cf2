#include <doctest.h>

#include <cmath>
#include <random>

#include "sparseobs/analysis.hpp"
#include "support.hpp"

using namespace sparseobs;

namespace {

ErrorSystem make(Matrix a, Matrix b, Matrix c) {
  ErrorSystem s;
  s.A_cl = std::move(a);
  s.B_cl = std::move(b);
  s.C_z = std::move(c);
  for (int j = 0; j < s.B_cl.cols(); ++j) s.input_channels.push_back(j);
  return s;
}

// 4/(s² + 0.4 s + 4): ω_n = 2, ζ = 0.1.
ErrorSystem resonant() {
  return make(Matrix{{0.0, 1.0}, {-4.0, -0.4}}, Matrix{{0.0}, {4.0}}, Matrix{{1.0, 0.0}});
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("first-order system") {
  // 2/(s + 4): H2 = 2/sqrt(8), H∞ = 1/2 at ω = 0.
  const ErrorSystem s = make(Matrix::Constant(1, 1, -4.0), Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1));
  CHECK(h2_norm(s) == doctest::Approx(2.0 / std::sqrt(8.0)).epsilon(1e-9));
  CHECK(hinf_norm(s) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sigma_max(s, 4.0) == doctest::Approx(2.0 / std::sqrt(32.0)));
}

TEST_CASE("diagonal system") {
  const Vector a{{1.0, 3.0, 0.5}}, b{{1.0, 2.0, 0.3}}, c{{2.0, 1.0, 1.0}};
  const ErrorSystem s = make(Matrix((-a).asDiagonal()), Matrix(b.asDiagonal()), Matrix(c.asDiagonal()));
  double h2 = 0.0, hinf = 0.0;
  for (int i = 0; i < 3; ++i) {
    h2 += std::pow(b(i) * c(i), 2) / (2.0 * a(i));
    hinf = std::max(hinf, b(i) * c(i) / a(i));
  }
  CHECK(h2_norm(s) == doctest::Approx(std::sqrt(h2)).epsilon(1e-9));
  CHECK(hinf_norm(s, 1e-9) == doctest::Approx(hinf).epsilon(1e-6));
}

TEST_CASE("lightly damped second-order system") {
  const double zeta = 0.1, wn = 2.0;
  const ErrorSystem s = resonant();
  CHECK(h2_norm(s) == doctest::Approx(std::sqrt(wn / (4.0 * zeta))).epsilon(1e-9));
  const HinfReport r = hinf_report(s, 1e-9);
  CHECK(r.value == doctest::Approx(1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta))).epsilon(1e-6));
  CHECK(r.peak_frequency == doctest::Approx(wn * std::sqrt(1.0 - 2.0 * zeta * zeta)).epsilon(1e-3));
  CHECK(r.lower <= r.value);
  CHECK(h2_report(s).lyapunov_residual < 1e-12);
}

TEST_CASE("H2 is invariant under orthogonal state changes") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = testing::random_stable(rng, 4);
    const Matrix b = testing::random_matrix(rng, 4, 2);
    const Matrix c = testing::random_matrix(rng, 3, 4);
    const Matrix q = testing::random_matrix(rng, 4, 4).householderQr().householderQ();
    const double v = h2_norm(make(a, b, c));
    const double w = h2_norm(make(q.transpose() * a * q, q.transpose() * b, c * q));
    CHECK(std::abs(v - w) <= 1e-9 * std::max(1.0, v));
  }
}

TEST_CASE("H-infinity bounds the DC gain") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const ErrorSystem s = make(testing::random_stable(rng, 4), testing::random_matrix(rng, 4, 2),
                               testing::random_matrix(rng, 2, 4));
    const Matrix dc = -s.C_z * s.A_cl.inverse() * s.B_cl;
    const double dc_gain = Eigen::JacobiSVD<Matrix>(dc).singularValues()(0);
    CHECK(hinf_norm(s) >= dc_gain * (1.0 - 1e-9));
  }
}

TEST_CASE("Hamiltonian and LMI H-infinity agree on random systems") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const ErrorSystem s = make(testing::random_stable(rng, 4), testing::random_matrix(rng, 4, 2),
                               testing::random_matrix(rng, 2, 4));
    const double ham = hinf_norm(s, 1e-9);
    const double lmi = hinf_norm_lmi(s);
    CHECK(std::abs(ham - lmi) <= 1e-4 * ham);
  }
}

TEST_CASE("unstable systems are rejected") {
  const ErrorSystem s = make(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  CHECK_THROWS_AS(h2_norm(s), UnstableSystemError);
  CHECK_THROWS_AS(hinf_norm(s), UnstableSystemError);
  CHECK_THROWS_AS(simulate(s), UnstableSystemError);
}

TEST_CASE("certificates") {
  const ErrorSystem s = make(Matrix::Constant(1, 1, -4.0), Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1));
  CHECK(certify(s, NormType::Hinf, 0.6).satisfied);
  CHECK_FALSE(certify(s, NormType::Hinf, 0.4).satisfied);
  const NormCertificate c = certify(s, NormType::H2, 1.0);
  CHECK(c.satisfied);
  CHECK(c.value == doctest::Approx(2.0 / std::sqrt(8.0)));
  CHECK_FALSE(certify(s, NormType::H2, c.value * (1.0 - 1e-3)).satisfied);
  CHECK_FALSE(certify(s, NormType::H2, c.value * (1.0 - 1e-3), 0.0).satisfied);
}

TEST_CASE("white-noise output power approaches the H2 norm") {
  const ErrorSystem s = make(Matrix{{-1.0, 0.5}, {0.0, -2.0}}, Matrix{{1.0, 0.0}, {0.3, 1.0}}, Matrix{{1.0, 1.0}});
  const double target = std::pow(h2_norm(s), 2);
  SimulationOptions o;
  o.noise.kind = NoiseModel::Kind::White;
  o.e0 = Vector::Zero(2);
  o.step = 1e-2;
  o.horizon = 500.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    o.seed = seed;
    const double rms = stationary_rms(simulate(s, o), 10.0);
    CHECK(std::abs(rms * rms - target) <= 0.1 * target);
  }
}

TEST_CASE("simulation is deterministic and shares channels") {
  const ErrorSystem s = resonant();
  SimulationOptions o;
  o.horizon = 1.0;
  const SimulationRun a = simulate(s, o);
  const SimulationRun b = simulate(s, o);
  CHECK(a.time.size() == 1001);
  CHECK((a.error - b.error).norm() == 0.0);
  o.seed = 43;
  CHECK((simulate(s, o).error - a.error).norm() > 0.0);

  // Same channel id 0 plus an extra channel with a zero input column.
  ErrorSystem t = s;
  t.B_cl = Matrix{{0.0, 0.0}, {4.0, 0.0}};
  t.input_channels = {0, 7};
  o.seed = 42;
  CHECK((simulate(t, o).error - a.error).norm() == 0.0);
  CHECK(a.error.row(0)(0) == 1.0);
  CHECK(a.error.row(0)(1) == 0.01);
}

TEST_CASE("noise-free decay envelope") {
  const ErrorSystem s = resonant();
  SimulationOptions o;
  o.noise.kind = NoiseModel::Kind::None;
  o.horizon = 20.0;
  const SimulationRun run = simulate(s, o);
  const DecayCheck d = check_decay(s, run);
  CHECK(d.alpha == doctest::Approx(0.1));
  CHECK(d.constant >= 1.0);
  CHECK(d.ok);
  CHECK(run.error.bottomRows(1).norm() < 1.0);
  CHECK_THROWS(stationary_rms(run, 100.0));
}

}
