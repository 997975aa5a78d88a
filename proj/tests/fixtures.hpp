#pragma once

// Shared test fixtures and seeded generators. Tests avoid library RNG helpers
// where independence matters; draws here are plain mt19937_64 streams.

#include <random>

#include "memliou/model.hpp"

namespace memtest {

using memliou::Complex;
using memliou::Index;
using memliou::Matrix;
using memliou::Vector;

inline Matrix pauli_x() {
  Matrix s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

inline Matrix pauli_z() {
  Matrix s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

inline Matrix random_matrix(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      a(i, j) = Complex(re, im);
    }
  return a;
}

inline Matrix random_hermitian(Index n, std::uint64_t seed) {
  const Matrix g = random_matrix(n, seed);
  return 0.5 * (g + g.adjoint().eval());
}

inline Matrix random_density(Index n, std::uint64_t seed) {
  const Matrix g = random_matrix(n, seed);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint().eval());
}

inline Vector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

// Two-qubit model whose initial state is maximally entangled between system
// and environment; the correlation part of the initial condition is large.
inline memliou::CompositeModel bell_model() {
  memliou::CompositeModel m;
  m.name = "bell-test";
  m.d_system = 2;
  m.d_env = 2;
  m.h_system = 0.5 * pauli_z();
  m.h_env = 0.4 * pauli_z() + 0.3 * pauli_x();
  m.couplings.push_back({0.25 * pauli_x(), pauli_z()});
  m.rho_env = Matrix::Identity(2, 2) * 0.5;
  Vector psi = Vector::Zero(4);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(3) = 1.0 / std::sqrt(2.0);
  m.initial = memliou::InitialStateSpec::full(psi * psi.adjoint());
  return m;
}

// QB3 with the product initial replaced by a pure entangled state, so the
// inversion has to carry a genuine correlation source term.
inline memliou::CompositeModel qb3_correlated() {
  memliou::CompositeModel m = memliou::catalog_model("QB3");
  Vector psi = Vector::Zero(6);
  psi(0) = 1.0 / std::sqrt(2.0);  // |0> (x) |0>
  psi(4) = 1.0 / std::sqrt(2.0);  // |1> (x) |1>
  return m.with_initial(memliou::InitialStateSpec::full(psi * psi.adjoint()));
}

}  // namespace memtest
