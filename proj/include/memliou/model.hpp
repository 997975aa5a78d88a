#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memliou/operator_space.hpp"

namespace memliou {

struct CouplingTerm {
  Matrix system_op;  // hermitian, d_system x d_system
  Matrix env_op;     // hermitian, d_env x d_env
};

enum class InitialKind { Product, FullMatrix, ProductPlusCorrelation };

// Initial state of the composite. Product: rho_system (x) rho_env.
// FullMatrix: an arbitrary density operator on the composite space.
// ProductPlusCorrelation: rho_system (x) rho_env + delta with delta hermitian,
// traceless, living entirely in the complement of the projector image.
struct InitialStateSpec {
  InitialKind kind = InitialKind::Product;
  Matrix rho_system;
  Matrix rho_total;
  Matrix delta;

  static InitialStateSpec product(Matrix rho_s);
  static InitialStateSpec full(Matrix rho_tot);
  static InitialStateSpec product_plus_correlation(Matrix rho_s, Matrix delta);
};

struct CompositeModel {
  Index d_system = 0;
  Index d_env = 0;
  Matrix h_system;
  Matrix h_env;
  std::vector<CouplingTerm> couplings;
  Matrix rho_env;  // reference environment state, full rank not required
  InitialStateSpec initial;

  // Optional system-space projector commuting with the total Hamiltonian
  // (size 0 when the model declares none). Catalog sector models set it.
  Matrix sector_projector;

  std::string name = "inline";
  std::uint64_t seed = 0;

  Index dim_total() const { return d_system * d_env; }
  CompositeModel with_initial(InitialStateSpec spec) const;
  void validate() const;  // throws ConfigError
};

Matrix build_total_hamiltonian(const CompositeModel& m);
Matrix build_total_liouville(const CompositeModel& m);

// Assembles and validates the initial total density operator. For
// ProductPlusCorrelation also checks Tr delta = 0 and that delta has no
// component in the projector image.
Matrix build_initial_total(const CompositeModel& m);

struct HamiltonianEigensystem {
  RealVector energies;  // ascending
  Matrix vectors;       // unitary, columns are eigenvectors
  double spectral_range() const;
};

// Hermitian eigendecomposition with a residual check (throws NumericalError
// if || H V - V diag(E) || exceeds 1e-10 * ||H||).
HamiltonianEigensystem analyze_hamiltonian(const Matrix& h);

// Spectral radius of the total Liouvillian = spectral range of H_tot.
double liouville_scale(const CompositeModel& m);

// GUE-type draw: A(i,i) standard normal, A(i,j) = (g + i h)/sqrt(2) for i<j,
// from mt19937_64(seed). Used by the catalog; exposed for tests.
Matrix gaussian_hermitian(Index n, std::uint64_t seed, double scale = 1.0);

// Deterministic named fixtures: QB3, GENERIC, DEGENERATE, DECOUPLED.
// d_env = 0 picks the per-name default. Unknown names throw ConfigError.
CompositeModel catalog_model(const std::string& name, std::uint64_t seed = 0,
                             Index d_env = 0);

}  // namespace memliou
