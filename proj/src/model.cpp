#include "memliou/model.hpp"

#include <cmath>
#include <random>

#include "memliou/errors.hpp"

namespace memliou {

namespace {

constexpr Index kMaxTotalDim = 16;  // dense D x D superoperators only

Matrix pauli_z() {
  Matrix s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

Matrix pauli_x() {
  Matrix s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

// Mixes name-local salts into the user seed so the sub-draws of one fixture
// are decorrelated without consuming draws from each other.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

double min_eigen_gap(const RealVector& e) {
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 1; i < e.size(); ++i) gap = std::min(gap, e(i) - e(i - 1));
  return gap;
}

}  // namespace

InitialStateSpec InitialStateSpec::product(Matrix rho_s) {
  InitialStateSpec s;
  s.kind = InitialKind::Product;
  s.rho_system = std::move(rho_s);
  return s;
}

InitialStateSpec InitialStateSpec::full(Matrix rho_tot) {
  InitialStateSpec s;
  s.kind = InitialKind::FullMatrix;
  s.rho_total = std::move(rho_tot);
  return s;
}

InitialStateSpec InitialStateSpec::product_plus_correlation(Matrix rho_s, Matrix delta) {
  InitialStateSpec s;
  s.kind = InitialKind::ProductPlusCorrelation;
  s.rho_system = std::move(rho_s);
  s.delta = std::move(delta);
  return s;
}

CompositeModel CompositeModel::with_initial(InitialStateSpec spec) const {
  CompositeModel copy = *this;
  copy.initial = std::move(spec);
  return copy;
}

void CompositeModel::validate() const {
  if (d_system <= 0 || d_env <= 0)
    throw ConfigError("model", "dimensions must be positive");
  if (dim_total() > kMaxTotalDim)
    throw ConfigError("model", "total dimension " + std::to_string(dim_total()) +
                                   " exceeds the supported maximum " +
                                   std::to_string(kMaxTotalDim));
  if (h_system.rows() != d_system || h_system.cols() != d_system)
    throw ConfigError("model.h_system", "expected " + std::to_string(d_system) + "x" +
                                            std::to_string(d_system));
  if (h_env.rows() != d_env || h_env.cols() != d_env)
    throw ConfigError("model.h_env", "expected " + std::to_string(d_env) + "x" +
                                         std::to_string(d_env));
  require_hermitian(h_system, "model.h_system");
  require_hermitian(h_env, "model.h_env");
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    const auto& c = couplings[k];
    const std::string tag = "model.couplings[" + std::to_string(k) + "]";
    if (c.system_op.rows() != d_system || c.system_op.cols() != d_system)
      throw ConfigError(tag + ".system", "wrong shape");
    if (c.env_op.rows() != d_env || c.env_op.cols() != d_env)
      throw ConfigError(tag + ".env", "wrong shape");
    require_hermitian(c.system_op, "coupling system operator");
    require_hermitian(c.env_op, "coupling environment operator");
  }
  validate_density_operator(rho_env, "model.rho_env");
  if (rho_env.rows() != d_env) throw ConfigError("model.rho_env", "wrong dimension");
  if (sector_projector.size() != 0) {
    if (sector_projector.rows() != d_system || sector_projector.cols() != d_system)
      throw ConfigError("model.sector_projector", "wrong shape");
    require_hermitian(sector_projector, "model.sector_projector");
  }
}

Matrix build_total_hamiltonian(const CompositeModel& m) {
  m.validate();
  const Matrix id_s = Matrix::Identity(m.d_system, m.d_system);
  const Matrix id_e = Matrix::Identity(m.d_env, m.d_env);
  Matrix h = kron(m.h_system, id_e) + kron(id_s, m.h_env);
  for (const auto& c : m.couplings) h += kron(c.system_op, c.env_op);
  return h;
}

Matrix build_total_liouville(const CompositeModel& m) {
  return commutator_superop(build_total_hamiltonian(m));
}

Matrix build_initial_total(const CompositeModel& m) {
  m.validate();
  const Index d = m.dim_total();
  Matrix rho_tot;
  switch (m.initial.kind) {
    case InitialKind::Product: {
      validate_density_operator(m.initial.rho_system, "initial.rho_system");
      if (m.initial.rho_system.rows() != m.d_system)
        throw ConfigError("initial.rho_system", "wrong dimension");
      rho_tot = kron(m.initial.rho_system, m.rho_env);
      break;
    }
    case InitialKind::FullMatrix: {
      if (m.initial.rho_total.rows() != d)
        throw ConfigError("initial.rho_total", "expected dimension " + std::to_string(d));
      validate_density_operator(m.initial.rho_total, "initial.rho_total");
      rho_tot = m.initial.rho_total;
      break;
    }
    case InitialKind::ProductPlusCorrelation: {
      validate_density_operator(m.initial.rho_system, "initial.rho_system");
      if (m.initial.rho_system.rows() != m.d_system)
        throw ConfigError("initial.rho_system", "wrong dimension");
      const Matrix& delta = m.initial.delta;
      if (delta.rows() != d || delta.cols() != d)
        throw ConfigError("initial.delta", "expected dimension " + std::to_string(d));
      require_hermitian(delta, "initial.delta");
      if (std::abs(delta.trace()) > 1e-12)
        throw ConfigError("initial.delta",
                          "trace " + std::to_string(std::abs(delta.trace())) + " is not 0");
      // delta must carry no component in the projector image:
      // Tr_env(delta) (x) rho_env has to vanish.
      const Matrix p_delta = kron(partial_trace_env(delta, m.d_system, m.d_env), m.rho_env);
      if (max_abs(p_delta) > 1e-10 * std::max(1.0, max_abs(delta)))
        throw ConfigError("initial.delta", "correlation part leaks into the projector image");
      rho_tot = kron(m.initial.rho_system, m.rho_env) + delta;
      validate_density_operator(rho_tot, "initial (product + correlation)");
      break;
    }
  }
  return rho_tot;
}

double HamiltonianEigensystem::spectral_range() const {
  if (energies.size() == 0) return 0.0;
  return energies(energies.size() - 1) - energies(0);
}

HamiltonianEigensystem analyze_hamiltonian(const Matrix& h) {
  require_hermitian(h, "analyze_hamiltonian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericalError("hermitian eigensolver failed to converge");
  HamiltonianEigensystem sys{es.eigenvalues(), es.eigenvectors()};
  const double residual =
      (h * sys.vectors - sys.vectors * sys.energies.asDiagonal().toDenseMatrix().cast<Complex>())
          .norm();
  if (residual > 1e-10 * std::max(1.0, h.norm()))
    throw NumericalError("eigendecomposition residual " + std::to_string(residual) +
                         " out of tolerance");
  return sys;
}

double liouville_scale(const CompositeModel& m) {
  return analyze_hamiltonian(build_total_hamiltonian(m)).spectral_range();
}

Matrix gaussian_hermitian(Index n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) = scale * normal(rng);
    for (Index j = i + 1; j < n; ++j) {
      const double g = normal(rng);
      const double h = normal(rng);
      a(i, j) = scale * Complex(g, h) / std::sqrt(2.0);
      a(j, i) = std::conj(a(i, j));
    }
  }
  return a;
}

namespace {

CompositeModel make_qb3() {
  CompositeModel m;
  m.name = "QB3";
  m.d_system = 2;
  m.d_env = 3;
  m.h_system = 0.5 * pauli_z();
  m.h_env = Matrix::Zero(3, 3);
  m.h_env(1, 1) = 0.7;
  m.h_env(2, 2) = 1.3;

  // Fixed hermitian coupling profile on the environment side; entries chosen
  // once, documented in the README, never redrawn.
  Matrix v(3, 3);
  v << Complex(0.0, 0.0), Complex(1.0, 0.5), Complex(0.5, 0.0),
      Complex(1.0, -0.5), Complex(0.3, 0.0), Complex(0.0, -0.7),
      Complex(0.5, 0.0), Complex(0.0, 0.7), Complex(-0.3, 0.0);
  m.couplings.push_back({0.2 * pauli_x(), v});

  // Gibbs state of h_env at beta = 1.
  Vector boltzmann(3);
  boltzmann << 1.0, std::exp(-0.7), std::exp(-1.3);
  m.rho_env = (boltzmann / boltzmann.sum()).asDiagonal();

  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  m.initial = InitialStateSpec::product(plus);
  return m;
}

CompositeModel make_generic(std::uint64_t seed, Index d_env) {
  CompositeModel m;
  m.name = "GENERIC";
  m.seed = seed;
  m.d_system = 2;
  m.d_env = d_env;
  m.h_system = 0.5 * pauli_z();
  m.rho_env = Matrix::Identity(d_env, d_env) / static_cast<double>(d_env);
  m.initial = InitialStateSpec::product(Matrix::Identity(2, 2) * 0.5);

  // Redraw until the total spectrum is gap-free at relative 1e-6; a
  // degenerate draw would silently change the zero-mode structure.
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    m.h_env = gaussian_hermitian(d_env, mix_seed(seed, 2 * attempt), 0.6);
    m.couplings.clear();
    m.couplings.push_back({gaussian_hermitian(2, mix_seed(seed, 2 * attempt + 1), 0.3),
                           gaussian_hermitian(d_env, mix_seed(seed, 1000 + attempt), 1.0)});
    const auto sys = analyze_hamiltonian(build_total_hamiltonian(m));
    if (min_eigen_gap(sys.energies) > 1e-6 * std::max(1.0, sys.spectral_range())) return m;
  }
  throw NumericalError("GENERIC: could not draw a gap-free spectrum in 64 attempts");
}

// Sector fixtures: diagonal system-side couplings keep |0><0| and |1><1|
// dynamically disconnected, so [H_tot, P_sector (x) 1] = 0 exactly and the
// effective generator keeps a two-fold zero mode at every frequency.
// Maximally mixed rho_env makes the sector stationary states exact.
CompositeModel make_sector_model(const std::string& name, std::uint64_t seed, Index d_env,
                                 double h_gap, double s0, double s1) {
  CompositeModel m;
  m.name = name;
  m.seed = seed;
  m.d_system = 2;
  m.d_env = d_env;
  m.h_system = Matrix::Zero(2, 2);
  m.h_system(1, 1) = h_gap;
  m.h_env = gaussian_hermitian(d_env, mix_seed(seed, 11), 0.7);
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = s0;
  s(1, 1) = s1;
  m.couplings.push_back({s, gaussian_hermitian(d_env, mix_seed(seed, 12), 0.45)});
  m.rho_env = Matrix::Identity(d_env, d_env) / static_cast<double>(d_env);
  m.sector_projector = Matrix::Zero(2, 2);
  m.sector_projector(0, 0) = 1.0;
  Matrix weights = Matrix::Zero(2, 2);
  weights(0, 0) = 0.3;
  weights(1, 1) = 0.7;
  m.initial = InitialStateSpec::product(weights);
  return m;
}

}  // namespace

CompositeModel catalog_model(const std::string& name, std::uint64_t seed, Index d_env) {
  CompositeModel m;
  if (name == "QB3") {
    if (d_env != 0 && d_env != 3)
      throw ConfigError("model.d_env", "QB3 has a fixed 3-level environment");
    m = make_qb3();
    m.seed = seed;
  } else if (name == "GENERIC") {
    m = make_generic(seed, d_env == 0 ? 4 : d_env);
  } else if (name == "DECOUPLED") {
    m = make_sector_model("DECOUPLED", seed, d_env == 0 ? 3 : d_env, 0.9, 0.7, 1.3);
  } else if (name == "DEGENERATE") {
    // Degenerate system energies: sector coherences sit close to zero
    // frequency, which stresses the zero-cluster separation.
    m = make_sector_model("DEGENERATE", seed, d_env == 0 ? 3 : d_env, 0.0, 0.6, 1.4);
  } else {
    throw ConfigError("model.catalog", "unknown catalog model '" + name + "'");
  }
  m.validate();
  return m;
}

}  // namespace memliou
