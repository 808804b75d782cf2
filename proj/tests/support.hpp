#pragma once

#include <random>
#include <string>

#include "sparseobs/model.hpp"

namespace testing {

using sparseobs::Matrix;
using sparseobs::Vector;

inline std::string f16_path() { return std::string(SPARSEOBS_DATA_DIR) + "/f16_v1000.json"; }

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

// Random Hurwitz matrix: a Gaussian matrix shifted left of its spectral abscissa.
inline Matrix random_stable(std::mt19937_64& rng, int n) {
  Matrix a = random_matrix(rng, n, n);
  const double s = sparseobs::linalg::spectral_abscissa(a);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  return a - (s + u(rng)) * Matrix::Identity(n, n);
}

// ẋ = −x + d, y = x, z = x.
inline sparseobs::LtiPlant scalar_plant() {
  sparseobs::LtiPlant p;
  p.A = Matrix::Constant(1, 1, -1.0);
  p.B_u = Matrix::Zero(1, 1);
  p.B_d = Matrix::Constant(1, 1, 1.0);
  p.C_y = Matrix::Constant(1, 1, 1.0);
  p.C_z = Matrix::Constant(1, 1, 1.0);
  p.D_u = Matrix::Zero(1, 1);
  p.D_d = Matrix::Zero(1, 1);
  p.S_d = Matrix::Identity(1, 1);
  return p;
}

}  // namespace testing
