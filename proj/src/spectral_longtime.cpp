#include "memliou/spectral_longtime.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "memliou/errors.hpp"

namespace memliou {

namespace {

bool mode_order(Complex a, Complex b) {
  const double ia = std::abs(a.imag()), ib = std::abs(b.imag());
  if (ia != ib) return ia < ib;
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

double sigma_max(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

double sigma_min(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Polynomial extrapolation of matrix samples to eps = 0 (Neville tableau).
Matrix neville_to_zero(const std::vector<double>& eps, const std::vector<Matrix>& vals) {
  std::vector<Matrix> t = vals;
  const std::size_t m = t.size();
  for (std::size_t level = 1; level < m; ++level)
    for (std::size_t i = 0; i + level < m; ++i)
      t[i] = (eps[i] * t[i + 1] - eps[i + level] * t[i]) / (eps[i] - eps[i + level]);
  return t[0];
}

}  // namespace

SpectralData spectrum_effective(const EffectiveLiouvilleEval& eval) {
  const Index n = eval.l_eff.rows();
  const Index d_s = static_cast<Index>(std::lround(std::sqrt(double(n))));
  Eigen::ComplexEigenSolver<Matrix> es(eval.l_eff, true);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed on the effective generator");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return mode_order(es.eigenvalues()(a), es.eigenvalues()(b));
  });

  SpectralData spec;
  spec.z = eval.z;
  spec.eigenvalues = Vector(n);
  Matrix v(n, n);
  for (Index k = 0; k < n; ++k) {
    spec.eigenvalues(k) = es.eigenvalues()(order[k]);
    v.col(k) = es.eigenvectors().col(order[k]);
  }

  Eigen::PartialPivLU<Matrix> lu(v);
  const double rcond = lu.rcond();
  spec.defective = !(rcond > 1e-12);
  const Matrix w = lu.inverse();
  spec.biorth_defect = max_abs(w * v - Matrix::Identity(n, n));

  spec.right.reserve(n);
  spec.left.reserve(n);
  for (Index k = 0; k < n; ++k) {
    spec.right.push_back(unvec(v.col(k), d_s));
    spec.left.push_back(unvec(w.row(k).adjoint(), d_s));
  }
  return spec;
}

ZeroModeProjector zero_mode_projector(const SpectralData& spec, double cluster_tol) {
  const Index n = spec.eigenvalues.size();
  const Index d_s = static_cast<Index>(std::lround(std::sqrt(double(n))));
  double specrad = 0.0;
  for (Index k = 0; k < n; ++k) specrad = std::max(specrad, std::abs(spec.eigenvalues(k)));

  std::vector<Index> cluster;
  for (Index k = 0; k < n; ++k)
    if (specrad == 0.0 || std::abs(spec.eigenvalues(k)) <= cluster_tol * specrad)
      cluster.push_back(k);
  if (cluster.empty())
    throw NumericalError("no stationary eigenvalue cluster; trace preservation is broken");

  ZeroModeProjector zm;
  zm.degeneracy = static_cast<int>(cluster.size());
  zm.projector = Matrix::Zero(n, n);
  for (Index k : cluster) {
    zm.projector += vec(spec.right[k]) * vec(spec.left[k]).adjoint();
    zm.right_modes.push_back(spec.right[k]);
    zm.left_modes.push_back(spec.left[k]);
  }

  const Vector rep = zm.projector * vec(Matrix::Identity(d_s, d_s) / double(d_s));
  Matrix rho = unvec(rep, d_s);
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-10)
    throw NumericalError("stationary cluster representative has vanishing trace");
  rho /= tr;
  zm.rho_inf = 0.5 * (rho + rho.adjoint().eval());
  return zm;
}

ExtrapolationResult long_time_limit_extrapolated(const ModelPipeline& pipe,
                                                 std::vector<double> eps_seq, Exec exec) {
  if (eps_seq.empty()) throw ConfigError("longtime.eps_seq", "empty sequence");
  for (std::size_t k = 0; k < eps_seq.size(); ++k) {
    if (!(eps_seq[k] >= kMinImagFrequency))
      throw ConfigError("longtime.eps_seq", "entries must be at least 1e-9");
    if (k > 0 && !(eps_seq[k] < eps_seq[k - 1]))
      throw ConfigError("longtime.eps_seq", "entries must be strictly decreasing");
  }

  ExtrapolationResult out;
  out.g_values.resize(eps_seq.size());
  for_each_index(eps_seq.size(), exec, [&](std::size_t k) {
    const Complex z(0.0, eps_seq[k]);
    const Matrix rho = pipe.solver.rho_z_at(z, pipe.rho_0, pipe.delta_corr).rho;
    out.g_values[k] = eps_seq[k] * rho;
  });

  for (std::size_t k = 1; k < eps_seq.size(); ++k)
    out.step_diffs.push_back(max_abs(out.g_values[k] - out.g_values[k - 1]));
  for (std::size_t k = 1; k < out.step_diffs.size(); ++k)
    if (out.step_diffs[k] > out.step_diffs[k - 1]) out.converged = false;

  // Use the smallest epsilons, at most three (quadratic extrapolation).
  const std::size_t m = std::min<std::size_t>(3, eps_seq.size());
  std::vector<double> eps_tail(eps_seq.end() - m, eps_seq.end());
  std::vector<Matrix> val_tail(out.g_values.end() - m, out.g_values.end());
  Matrix rho = neville_to_zero(eps_tail, val_tail);
  out.rho_inf = 0.5 * (rho + rho.adjoint().eval());
  return out;
}

LongTimeFormulaResult long_time_formula(const ModelPipeline& pipe,
                                        std::optional<double> eps_ref, double cluster_tol) {
  LongTimeFormulaResult out;
  out.eps_ref = eps_ref.value_or(kDefaultEpsRefFactor * std::max(pipe.scale, 0.1));
  if (!(out.eps_ref >= kMinImagFrequency))
    throw ConfigError("longtime.eps_ref", "must be at least 1e-9");
  const Complex z(0.0, out.eps_ref);

  const EffectiveLiouvilleEval eval = pipe.solver.effective_liouville(z);
  const SpectralData spec = spectrum_effective(eval);
  const ZeroModeProjector zm = zero_mode_projector(spec, cluster_tol);
  out.degeneracy = zm.degeneracy;
  out.degenerate = zm.degeneracy > 1;

  const Matrix shift = pipe.solver.initial_shift(z, pipe.delta_corr);
  const Vector x = vec(pipe.rho_0 + shift);
  Matrix rho = unvec((zm.projector * x).eval(), pipe.rho_0.rows());
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-10)
    throw NumericalError("stationary state lost its trace; initial state is orthogonal "
                         "to the zero cluster");
  rho /= tr;
  out.rho_inf = 0.5 * (rho + rho.adjoint().eval());

  if (!out.degenerate) {
    // The projector has rank one here, so any unit-trace input must land on
    // the same state; measure that with an unrelated basis-state input.
    Matrix alt = Matrix::Zero(pipe.rho_0.rows(), pipe.rho_0.cols());
    alt(0, 0) = 1.0;
    Matrix rho_alt = unvec((zm.projector * vec(alt)).eval(), pipe.rho_0.rows());
    rho_alt /= rho_alt.trace();
    rho_alt = 0.5 * (rho_alt + rho_alt.adjoint().eval());
    out.rho0_independence_defect = max_abs(out.rho_inf - rho_alt);
  }
  return out;
}

Matrix time_average_oracle(const CompositeModel& m, double degeneracy_tol) {
  const Matrix h_tot = build_total_hamiltonian(m);
  const auto sys = analyze_hamiltonian(h_tot);
  const Matrix rho_tot0 = build_initial_total(m);
  Matrix a = sys.vectors.adjoint() * rho_tot0 * sys.vectors;
  const double range = sys.spectral_range();
  const Index d = h_tot.rows();
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (std::abs(sys.energies(i) - sys.energies(j)) > degeneracy_tol * std::max(range, 1e-300))
        a(i, j) = 0.0;
  const Matrix avg = sys.vectors * a * sys.vectors.adjoint();
  Matrix rho = partial_trace_env(avg, m.d_system, m.d_env);
  return 0.5 * (rho + rho.adjoint().eval());
}

TimescaleDiagnostics timescale_diagnostics(const ModelPipeline& pipe,
                                           std::optional<double> eps_ref) {
  TimescaleDiagnostics d;
  d.eps_ref = eps_ref.value_or(kDefaultDiagnosticEpsFactor * std::max(pipe.scale, 0.1));
  if (!(d.eps_ref >= kMinImagFrequency))
    throw ConfigError("diagnose.eps_ref", "must be at least 1e-9");

  const Matrix& snk = pipe.solver.coupling_out();
  const double coupling_norm = sigma_max(snk);

  Matrix m = Matrix::Identity(pipe.solver.dim_q(), pipe.solver.dim_q()) * Complex(0.0, d.eps_ref);
  m -= pipe.solver.basis().adjoint() * (pipe.bd.l_q * pipe.solver.basis());
  d.t_q_z = 1.0 / sigma_min(m);

  if (coupling_norm <= 1e-12 * std::max(pipe.scale, 1.0)) {
    d.coupled = false;
    d.t_pq = std::numeric_limits<double>::infinity();
    d.tau = std::numeric_limits<double>::infinity();
    d.correlation_ratio = 0.0;
    d.verdict = "uncoupled";
    return d;
  }

  d.coupled = true;
  d.t_pq = 1.0 / coupling_norm;
  d.tau = d.t_pq * d.t_pq / d.t_q_z;
  d.correlation_ratio = d.t_q_z / d.t_pq;
  if (d.correlation_ratio <= 0.1)
    d.verdict = "negligible";
  else if (d.correlation_ratio <= 1.0)
    d.verdict = "moderate";
  else
    d.verdict = "important";
  return d;
}

}  // namespace memliou
