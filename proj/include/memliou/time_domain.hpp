#pragma once

#include <string>
#include <vector>

#include "memliou/effective_dynamics.hpp"

namespace memliou {

struct TimeGrid {
  std::vector<double> times;  // strictly increasing, times[0] >= 0
  static TimeGrid uniform(double t_min, double t_max, std::size_t count);
  double t_max() const { return times.empty() ? 0.0 : times.back(); }
  void validate() const;
};

// Horizontal inversion contour z = omega + i*epsilon, omega in [-omega_max,
// omega_max], n_points uniform nodes, trapezoidal weights. tail_subtraction
// removes the known large-|omega| asymptotics (the initial-value jump via the
// mean-field reference and the leading correlation tail) before quadrature
// and restores them in closed form; without it the synthesis is the plain
// damped Fourier sum.
struct ContourSpec {
  double epsilon = 0.0;
  double omega_max = 0.0;
  std::size_t n_points = 0;
  bool tail_subtraction = true;

  ContourSpec refined() const;  // epsilon/2, omega_max*2, n_points*4
  void validate(double t_max, double l_tot_scale) const;
};

// epsilon = 0.05*scale, omega_max = 16*scale, n from the Nyquist-type bound
// n >= 2*omega_max*t_max/pi with an 8x safety factor (rounded up to even).
ContourSpec default_contour(double l_tot_scale, double t_max);

struct Trajectory {
  TimeGrid grid;
  std::vector<Matrix> states;  // reduced, hermitized
  std::string method;
  double hermiticity_defect = 0.0;  // max anti-hermitian part before hermitization
};

// Closed-system oracle: eigendecompose H_tot once, conjugate by exact phases,
// partial-trace. Bypasses the projection machinery entirely.
Trajectory exact_reduced_evolution(const CompositeModel& m, const TimeGrid& grid,
                                   Exec exec = Exec::Parallel);

Trajectory inverse_laplace_evolve(const CompositeModel& m, const ContourSpec& contour,
                                  const TimeGrid& grid, Exec exec = Exec::Parallel);
Trajectory inverse_laplace_evolve(const ModelPipeline& pipe, const ContourSpec& contour,
                                  const TimeGrid& grid, Exec exec = Exec::Parallel);

struct TrajectoryComparison {
  double max_deviation = 0.0;   // max over times of entrywise max |a - b|
  double mean_deviation = 0.0;  // mean over times of entrywise max
  std::vector<double> per_time;
};

// Grids must match exactly.
TrajectoryComparison compare_trajectories(const Trajectory& a, const Trajectory& b);

}  // namespace memliou
