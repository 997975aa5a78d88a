#include "memliou/time_domain.hpp"

#include <cmath>

#include "memliou/errors.hpp"

namespace memliou {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Mean-field reference: H_ref = H_S + sum_k Tr(E_k rho_env) S_k. The block
// L_P of the generator is exactly the commutator with H_ref, so subtracting
// the reference resolvent removes the full uncorrelated O(1/z) tail of the
// frequency samples, including the t=0 discontinuity that a plain damped
// Fourier sum cannot represent.
struct MeanFieldReference {
  RealVector energies;
  Matrix vectors;
  Matrix rho0_eigbasis;

  Matrix resolvent_state(Complex z) const {
    const Index d = energies.size();
    Matrix m(d, d);
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b)
        m(a, b) = Complex(0.0, 1.0) * rho0_eigbasis_entry(a, b) /
                  (z - Complex(energies(a) - energies(b), 0.0));
    return vectors * m * vectors.adjoint();
  }

  Matrix state_at(double t) const {
    const Index d = energies.size();
    Matrix m(d, d);
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b)
        m(a, b) = rho0_eigbasis_entry(a, b) *
                  std::exp(Complex(0.0, -(energies(a) - energies(b)) * t));
    return vectors * m * vectors.adjoint();
  }

  Complex rho0_eigbasis_entry(Index a, Index b) const { return rho0_eigbasis(a, b); }
};

MeanFieldReference build_mean_field(const CompositeModel& m, const Matrix& rho_0) {
  Matrix h_ref = m.h_system;
  for (const auto& c : m.couplings)
    h_ref += (c.env_op * m.rho_env).trace().real() * c.system_op;
  const auto sys = analyze_hamiltonian(h_ref);
  return MeanFieldReference{sys.energies, sys.vectors,
                            sys.vectors.adjoint() * rho_0 * sys.vectors};
}

std::vector<double> trapezoid_nodes(const ContourSpec& c, std::vector<double>& weights) {
  const std::size_t n = c.n_points;
  const double d_omega = 2.0 * c.omega_max / static_cast<double>(n - 1);
  std::vector<double> nodes(n);
  weights.assign(n, d_omega);
  for (std::size_t j = 0; j < n; ++j)
    nodes[j] = -c.omega_max + d_omega * static_cast<double>(j);
  weights.front() = 0.5 * d_omega;
  weights.back() = 0.5 * d_omega;
  return nodes;
}

}  // namespace

TimeGrid TimeGrid::uniform(double t_min, double t_max, std::size_t count) {
  if (count == 0) throw ConfigError("times", "empty time grid");
  TimeGrid g;
  g.times.resize(count);
  if (count == 1) {
    g.times[0] = t_min;
  } else {
    const double step = (t_max - t_min) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k)
      g.times[k] = t_min + step * static_cast<double>(k);
    g.times.back() = t_max;
  }
  g.validate();
  return g;
}

void TimeGrid::validate() const {
  if (times.empty()) throw ConfigError("times", "empty time grid");
  if (times.front() < 0.0) throw ConfigError("times", "times must be nonnegative");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigError("times", "times must be strictly increasing");
}

ContourSpec ContourSpec::refined() const {
  return ContourSpec{epsilon / 2.0, omega_max * 2.0, n_points * 4, tail_subtraction};
}

void ContourSpec::validate(double t_max, double l_tot_scale) const {
  if (!(epsilon >= kMinImagFrequency))
    throw ConfigError("contour.epsilon", "must be at least 1e-9");
  if (!(omega_max > 0.0)) throw ConfigError("contour.omega_max", "must be positive");
  if (n_points < 2) throw ConfigError("contour.n_points", "need at least 2 nodes");
  if (epsilon * t_max > 700.0)
    throw ConfigError("contour.epsilon",
                      "epsilon * t_max too large, the damping correction overflows");
  (void)l_tot_scale;
}

ContourSpec default_contour(double l_tot_scale, double t_max) {
  const double s = std::max(l_tot_scale, 0.1);
  ContourSpec c;
  c.epsilon = 0.05 * s;
  c.omega_max = 16.0 * s;
  const double nyquist = 2.0 * c.omega_max * std::max(t_max, 1.0) / kPi;
  std::size_t n = static_cast<std::size_t>(std::ceil(nyquist * 8.0));
  n += n % 2;
  c.n_points = std::max<std::size_t>(n, 64);
  return c;
}

Trajectory exact_reduced_evolution(const CompositeModel& m, const TimeGrid& grid, Exec exec) {
  grid.validate();
  const Matrix h_tot = build_total_hamiltonian(m);
  const auto sys = analyze_hamiltonian(h_tot);
  const Matrix rho_tot0 = build_initial_total(m);
  const Matrix a0 = sys.vectors.adjoint() * rho_tot0 * sys.vectors;
  const Index d = h_tot.rows();

  Trajectory traj;
  traj.grid = grid;
  traj.method = "exact";
  traj.states.resize(grid.times.size());
  std::vector<double> defects(grid.times.size(), 0.0);

  for_each_index(grid.times.size(), exec, [&](std::size_t k) {
    const double t = grid.times[k];
    Matrix reduced;
    if (t == 0.0) {
      reduced = partial_trace_env(rho_tot0, m.d_system, m.d_env);
    } else {
      Matrix at(d, d);
      for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b)
          at(a, b) = a0(a, b) * std::exp(Complex(0.0, -(sys.energies(a) - sys.energies(b)) * t));
      reduced = partial_trace_env(sys.vectors * at * sys.vectors.adjoint(), m.d_system, m.d_env);
    }
    defects[k] = hermiticity_defect(reduced);
    traj.states[k] = 0.5 * (reduced + reduced.adjoint().eval());
  });

  for (double dft : defects) traj.hermiticity_defect = std::max(traj.hermiticity_defect, dft);
  return traj;
}

Trajectory inverse_laplace_evolve(const ModelPipeline& pipe, const ContourSpec& contour,
                                  const TimeGrid& grid, Exec exec) {
  grid.validate();
  contour.validate(grid.t_max(), pipe.scale);
  const Index d_s = pipe.rho_0.rows();

  std::vector<double> weights;
  const std::vector<double> omegas = trapezoid_nodes(contour, weights);
  const std::size_t n = omegas.size();

  // Frequency samples, minus the closed-form tail when enabled.
  MeanFieldReference mf{RealVector(), Matrix(), Matrix()};
  Matrix delta_first = Matrix::Zero(d_s, d_s);
  double kappa = 0.0;
  if (contour.tail_subtraction) {
    mf = build_mean_field(pipe.model, pipe.rho_0);
    if (pipe.delta_corr.size() != 0)
      delta_first = unvec(pipe.bd.restrict_map * (pipe.l_tot * pipe.delta_corr), d_s);
    kappa = 0.2 * std::max(pipe.scale, 1.0);
  }

  std::vector<Matrix> samples(n);
  for_each_index(n, exec, [&](std::size_t j) {
    const Complex z(omegas[j], contour.epsilon);
    Matrix g = pipe.solver.rho_z_at(z, pipe.rho_0, pipe.delta_corr).rho;
    if (contour.tail_subtraction) {
      g -= mf.resolvent_state(z);
      const Complex zk = z + Complex(0.0, kappa);
      g -= (Complex(0.0, 1.0) / (zk * zk)) * delta_first;
    }
    samples[j] = std::move(g);
  });

  Trajectory traj;
  traj.grid = grid;
  traj.method = contour.tail_subtraction ? "inverse-laplace" : "inverse-laplace-plain";
  traj.states.resize(grid.times.size());
  std::vector<double> defects(grid.times.size(), 0.0);

  for_each_index(grid.times.size(), exec, [&](std::size_t k) {
    const double t = grid.times[k];
    Matrix acc = Matrix::Zero(d_s, d_s);
    for (std::size_t j = 0; j < n; ++j)
      acc += (weights[j] * std::exp(Complex(0.0, -omegas[j] * t))) * samples[j];
    Matrix state = (std::exp(contour.epsilon * t) / (2.0 * kPi)) * acc;
    if (contour.tail_subtraction) {
      state += mf.state_at(t);
      state += Complex(0.0, -t * std::exp(-kappa * t)) * delta_first;
    }
    defects[k] = hermiticity_defect(state);
    traj.states[k] = 0.5 * (state + state.adjoint().eval());
  });

  for (double dft : defects) traj.hermiticity_defect = std::max(traj.hermiticity_defect, dft);
  return traj;
}

Trajectory inverse_laplace_evolve(const CompositeModel& m, const ContourSpec& contour,
                                  const TimeGrid& grid, Exec exec) {
  return inverse_laplace_evolve(build_pipeline(m), contour, grid, exec);
}

TrajectoryComparison compare_trajectories(const Trajectory& a, const Trajectory& b) {
  if (a.grid.times != b.grid.times)
    throw NumericalError("compare_trajectories: time grids differ");
  if (a.states.size() != b.states.size())
    throw NumericalError("compare_trajectories: state counts differ");
  TrajectoryComparison cmp;
  cmp.per_time.resize(a.states.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    cmp.per_time[k] = max_abs(a.states[k] - b.states[k]);
    cmp.max_deviation = std::max(cmp.max_deviation, cmp.per_time[k]);
    sum += cmp.per_time[k];
  }
  cmp.mean_deviation = a.states.empty() ? 0.0 : sum / static_cast<double>(a.states.size());
  return cmp;
}

}  // namespace memliou
