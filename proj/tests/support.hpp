#pragma once

// Shared fixtures and hand-rolled generators for the property tests.

#include <cmath>
#include <numbers>
#include <random>

#include "weylrec/model.hpp"

namespace weylrec::testing {

/// A = [[0, 0.09], [1, 0]], B = diag(1, -1), q12 = 0.05 x e^-x, q21 = 0.05 x^2 e^-x.
inline SystemSpec reference_spec() {
  SystemSpec s;
  s.name = "reference";
  s.A.resize(2, 2);
  s.A << 0.0, 0.09, 1.0, 0.0;
  s.b.resize(2);
  s.b << 1.0, -1.0;
  s.potential = PotentialModel(2, {{0, 1, {{0.05, 1.0, 1.0}}}, {1, 0, {{0.05, 2.0, 1.0}}}});
  return s;
}

inline SystemSpec free_spec() { return reference_spec().with_potential(PotentialModel(2, {})); }

/// B = cube roots of unity, mu = (-0.4, 0.1, 0.3).
inline SystemSpec cube_spec() {
  SystemSpec s;
  s.name = "cube";
  s.A.resize(3, 3);
  s.A << 0.0, 0.1, 0.0, 1.0, 0.0, 0.3, -0.4, 0.1, 0.0;
  s.b.resize(3);
  for (int k = 0; k < 3; ++k) s.b[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / 3.0);
  s.potential = PotentialModel(3, {{0, 1, {{0.05, 1.0, 1.0}}},
                                   {1, 2, {{0.03, 1.0, 2.0}}},
                                   {2, 0, {{0.04, 2.0, 1.0}}}});
  return s;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  cplx complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  CMatrix matrix(int rows, int cols, double scale = 1.0) {
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex(scale);
    return m;
  }
  CVector vector(int n, double scale = 1.0) { return matrix(n, 1, scale).col(0); }
  CMatrix offdiagonal(int n, double scale = 1.0) {
    CMatrix m = matrix(n, n, scale);
    for (int i = 0; i < n; ++i) m(i, i) = 0.0;
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace weylrec::testing
