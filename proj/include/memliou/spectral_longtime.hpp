#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memliou/effective_dynamics.hpp"

namespace memliou {

// Eigensystem of L(z) with biorthonormalized left/right eigenmatrix pairs,
// sorted by |Im lambda| ascending (ties by Re lambda).
struct SpectralData {
  Complex z;
  Vector eigenvalues;
  std::vector<Matrix> right;  // right eigenmatrices R_k
  std::vector<Matrix> left;   // left eigenmatrices L_k, <L_j, R_k> = delta_jk
  double biorth_defect = 0.0;
  bool defective = false;  // eigenvector matrix numerically singular
};

SpectralData spectrum_effective(const EffectiveLiouvilleEval& eval);

inline constexpr double kDefaultClusterTol = 1e-6;

// Spectral projector onto the eigenvalue cluster |lambda| <= cluster_tol *
// spectral_radius(L_eff). Non-degenerate clusters get a unit-trace stationary
// state; degenerate ones keep the full mode list. Empty clusters violate
// probability conservation and throw NumericalError.
struct ZeroModeProjector {
  Matrix projector;  // d_S^2 x d_S^2, idempotent
  Matrix rho_inf;    // unit-trace representative (projector applied to 1/d_S)
  int degeneracy = 0;
  std::vector<Matrix> right_modes;
  std::vector<Matrix> left_modes;
};

ZeroModeProjector zero_mode_projector(const SpectralData& spec,
                                      double cluster_tol = kDefaultClusterTol);

// Stationary state via g(eps) = -i*(i*eps)*rho(i*eps) extrapolated to eps->0
// with polynomial (order <= 2) extrapolation over the given sequence.
// step_diffs are ||g(eps_k) - g(eps_{k-1})||_max; converged requires them to
// decrease monotonically (finite environments recur below the level-spacing
// scale, which shows up here as a non-convergent sequence).
struct ExtrapolationResult {
  Matrix rho_inf;
  std::vector<double> step_diffs;
  bool converged = true;
  std::vector<Matrix> g_values;  // per-eps finite averages
};

ExtrapolationResult long_time_limit_extrapolated(const ModelPipeline& pipe,
                                                 std::vector<double> eps_seq,
                                                 Exec exec = Exec::Parallel);

inline constexpr double kDefaultEpsRefFactor = 0.01;

// Stationary state from the zero-mode projector of L(i*eps_ref) applied to
// rho_0 + shift(i*eps_ref). In the non-degenerate case the result is
// independent of rho_0 by construction; that is verified with a second
// initial state rather than assumed, and the measured difference reported.
struct LongTimeFormulaResult {
  Matrix rho_inf;
  int degeneracy = 1;
  double eps_ref = 0.0;
  double rho0_independence_defect = 0.0;  // 0 when degenerate (not applicable)
  bool degenerate = false;
};

LongTimeFormulaResult long_time_formula(const ModelPipeline& pipe,
                                        std::optional<double> eps_ref = std::nullopt,
                                        double cluster_tol = kDefaultClusterTol);

// Exact infinite-time average: drop all off-diagonal (in the H_tot eigenbasis)
// matrix elements of rho_tot0 with |omega_ab| > degeneracy_tol * spectral
// range, transform back, partial-trace.
Matrix time_average_oracle(const CompositeModel& m, double degeneracy_tol = 1e-9);

// Heuristic memory/correlation timescales at z = i*eps_ref:
//   t_pq  = 1/||L_PQ||_2 (coupling block, reduced coordinates)
//   t_q_z = ||[z - L_Q]^{-1}||_2 on the Q image
//   tau   = t_pq^2 / t_q_z
// Uncoupled models get an explicit infinite-tau verdict instead of overflow.
struct TimescaleDiagnostics {
  bool coupled = false;
  double eps_ref = 0.0;
  double t_pq = 0.0;   // infinite when uncoupled (coupled == false)
  double t_q_z = 0.0;
  double tau = 0.0;
  double correlation_ratio = 0.0;  // t_q_z / t_pq
  std::string verdict;             // "negligible" / "moderate" / "important" / "uncoupled"
};

inline constexpr double kDefaultDiagnosticEpsFactor = 0.25;

TimescaleDiagnostics timescale_diagnostics(const ModelPipeline& pipe,
                                           std::optional<double> eps_ref = std::nullopt);

}  // namespace memliou
