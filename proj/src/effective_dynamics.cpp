#include "memliou/effective_dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <random>

#include "memliou/errors.hpp"

namespace memliou {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kSolveResidualTol = 1e-9;
constexpr double kTraceTol = 1e-9;

std::uint64_t probe_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Deterministic eigenvalue order for serialized sweeps: slow modes first.
void sort_modes(std::vector<Complex>& ev) {
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
    const double ia = std::abs(a.imag()), ib = std::abs(b.imag());
    if (ia != ib) return ia < ib;
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

}  // namespace

void require_upper_half(Complex z) {
  if (!(z.imag() >= kMinImagFrequency))
    throw NumericalError("frequency " + std::to_string(z.real()) + "+" +
                         std::to_string(z.imag()) +
                         "i is below the upper-half-plane floor");
}

FrequencySolver::FrequencySolver(const BlockDecomposition& bd, const QImageBasis& qb) {
  const Index dim = bd.l_tot.rows();
  d_s_ = static_cast<Index>(std::lround(std::sqrt(double(bd.restrict_map.rows()))));
  d_e_ = static_cast<Index>(std::lround(std::sqrt(double(dim)))) / d_s_;
  if (d_s_ * d_s_ * d_e_ * d_e_ != dim)
    throw NumericalError("FrequencySolver: inconsistent block dimensions");
  basis_ = qb.basis;
  embed_ = bd.embed_map;
  restrict_ = bd.restrict_map;
  p_ = bd.embed_map * bd.restrict_map;
  a_qq_ = basis_.adjoint() * bd.l_q * basis_;
  src_ = basis_.adjoint() * (bd.l_qp * embed_);
  snk_ = restrict_ * (bd.l_tot * basis_);
  l_pr_ = restrict_ * (bd.l_tot * embed_);
}

FrequencySolver::ZFactor FrequencySolver::factorize(Complex z) const {
  require_upper_half(z);
  const Index r = a_qq_.rows();
  Matrix m = -a_qq_;
  m.diagonal().array() += z;
  ZFactor zf{z, Eigen::PartialPivLU<Matrix>(m), 0.0};
  zf.rcond = zf.lu.rcond();
  if (!(zf.rcond > 1.0 / kMaxCondition))
    throw NearPoleError(z, 1.0 / std::max(zf.rcond, 1e-300),
                        "memory propagator is singular at this frequency");
  (void)r;
  return zf;
}

Matrix FrequencySolver::q_solve(const ZFactor& zf, const Matrix& rhs) const {
  Matrix m = -a_qq_;
  m.diagonal().array() += zf.z;
  Matrix x = zf.lu.solve(rhs);
  x += zf.lu.solve(rhs - m * x);  // one refinement step
  const double resid = (rhs - m * x).norm();
  if (resid > kSolveResidualTol * rhs.norm())
    throw NearPoleError(zf.z, 1.0 / std::max(zf.rcond, 1e-300),
                        "memory propagator solve residual " + std::to_string(resid) +
                            " out of tolerance");
  return x;
}

Vector FrequencySolver::q_propagate(Complex z, const Vector& y, bool check_precondition) const {
  if (y.size() != p_.rows()) throw NumericalError("q_propagate: wrong input dimension");
  if (check_precondition) {
    const double leak = (p_ * y).norm();
    if (leak > 1e-8 * std::max(y.norm(), 1e-300))
      throw NumericalError("q_propagate: input is not in the complement image");
  }
  const ZFactor zf = factorize(z);
  return basis_ * q_solve(zf, basis_.adjoint() * y);
}

EffectiveLiouvilleEval FrequencySolver::effective_liouville(Complex z) const {
  const ZFactor zf = factorize(z);
  EffectiveLiouvilleEval eval;
  eval.z = z;
  eval.l_eff = l_pr_ + snk_ * q_solve(zf, src_);
  eval.condition = 1.0 / std::max(zf.rcond, 1e-300);
  return eval;
}

Matrix FrequencySolver::initial_shift(Complex z, const Vector& delta_corr) const {
  if (delta_corr.size() == 0 || delta_corr.norm() == 0.0)
    return Matrix::Zero(d_s_, d_s_);
  const double leak = (p_ * delta_corr).norm();
  if (leak > 1e-8 * delta_corr.norm())
    throw NumericalError("initial_shift: correlation part is not in the complement image");
  const ZFactor zf = factorize(z);
  return unvec(snk_ * q_solve(zf, basis_.adjoint() * delta_corr), d_s_);
}

FrequencyState FrequencySolver::rho_z(const EffectiveLiouvilleEval& eval, const Matrix& rho_0,
                                      const Matrix& shift) const {
  const Complex z = eval.z;
  Matrix m = -eval.l_eff;
  m.diagonal().array() += z;
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxCondition))
    throw NearPoleError(z, 1.0 / std::max(rcond, 1e-300),
                        "effective propagator is singular at this frequency");
  const Vector rhs = vec(rho_0 + shift);
  Vector x = lu.solve(rhs);
  x += lu.solve(rhs - m * x);
  if ((rhs - m * x).norm() > kSolveResidualTol * rhs.norm())
    throw NearPoleError(z, 1.0 / rcond, "effective propagator solve residual out of tolerance");
  FrequencyState state;
  state.z = z;
  state.rho = Complex(0.0, 1.0) * unvec(x, d_s_);
  // Trace preservation pins Tr rho(z) = i/z; a miss means the algebra upstream
  // is broken, not that the point is hard.
  const Complex expected = Complex(0.0, 1.0) / z;
  if (std::abs(state.rho.trace() - expected) > kTraceTol * std::max(1.0, std::abs(expected)))
    throw NumericalError("frequency-domain state lost trace normalization");
  return state;
}

FrequencyState FrequencySolver::rho_z_at(Complex z, const Matrix& rho_0,
                                         const Vector& delta_corr) const {
  const EffectiveLiouvilleEval eval = effective_liouville(z);
  return rho_z(eval, rho_0, initial_shift(z, delta_corr));
}

Vector q_propagate(const BlockDecomposition& bd, const QImageBasis& qb, Complex z,
                   const Vector& y) {
  return FrequencySolver(bd, qb).q_propagate(z, y);
}

EffectiveLiouvilleEval effective_liouville(const BlockDecomposition& bd, const QImageBasis& qb,
                                           Complex z) {
  return FrequencySolver(bd, qb).effective_liouville(z);
}

Matrix initial_shift(const BlockDecomposition& bd, const QImageBasis& qb, Complex z,
                     const Vector& delta_corr) {
  return FrequencySolver(bd, qb).initial_shift(z, delta_corr);
}

FrequencyState rho_z(const EffectiveLiouvilleEval& eval, const Matrix& rho_0,
                     const Matrix& shift) {
  const Index d_s = static_cast<Index>(std::lround(std::sqrt(double(eval.l_eff.rows()))));
  Matrix m = -eval.l_eff;
  m.diagonal().array() += eval.z;
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxCondition))
    throw NearPoleError(eval.z, 1.0 / std::max(rcond, 1e-300),
                        "effective propagator is singular at this frequency");
  const Vector rhs = vec(rho_0 + shift);
  Vector x = lu.solve(rhs);
  x += lu.solve(rhs - m * x);
  FrequencyState state;
  state.z = eval.z;
  state.rho = Complex(0.0, 1.0) * unvec(x, d_s);
  return state;
}

ModelPipeline build_pipeline(const CompositeModel& m) {
  m.validate();
  const Matrix l_tot = build_total_liouville(m);
  ProjectorPair pq = build_projector_pair(m.rho_env, m.d_system, m.d_env);
  BlockDecomposition bd = decompose_liouville(l_tot, pq);
  QImageBasis qb = q_image_basis(pq);
  FrequencySolver solver(bd, qb);
  const Matrix rho_tot0 = build_initial_total(m);
  SplitInitial split = split_initial(rho_tot0, pq);
  const double scale = liouville_scale(m);
  return ModelPipeline{m,
                       l_tot,
                       std::move(pq),
                       std::move(bd),
                       std::move(qb),
                       std::move(solver),
                       std::move(split.rho_system),
                       std::move(split.delta_corr),
                       scale};
}

Matrix full_resolvent(const Matrix& l_tot, Complex z) {
  require_upper_half(z);
  Matrix m = -l_tot;
  m.diagonal().array() += z;
  return m.partialPivLu().inverse();
}

ResolventCheck verify_resolvent_identities(const ModelPipeline& pipe, Complex z,
                                           std::uint64_t probe_seed) {
  const FrequencySolver& s = pipe.solver;
  const Index dim = pipe.l_tot.rows();

  const Matrix fullres = full_resolvent(pipe.l_tot, z);
  const Matrix lhs_embed = pipe.bd.restrict_map * fullres * pipe.bd.embed_map;

  const EffectiveLiouvilleEval eval = s.effective_liouville(z);
  Matrix m = -eval.l_eff;
  m.diagonal().array() += z;
  Eigen::PartialPivLU<Matrix> lu(m);
  const Matrix rhs_embed = lu.inverse();

  ResolventCheck check;
  check.z = z;
  check.r_embed = (lhs_embed - rhs_embed).norm() / std::max(rhs_embed.norm(), 1e-300);

  // Correlation route probe: random vector pushed into the complement image.
  std::mt19937_64 rng(probe_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector raw(dim);
  for (Index k = 0; k < dim; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    raw(k) = Complex(re, im);
  }
  Vector y = pipe.pq.q * raw;
  y /= y.norm();

  const Vector lhs_cross = pipe.bd.restrict_map * (fullres * y);
  const Vector w = s.q_propagate(z, y);
  const Vector rhs_cross = lu.solve(pipe.bd.restrict_map * (pipe.l_tot * w));
  check.r_cross = (lhs_cross - rhs_cross).norm() / std::max(lhs_cross.norm(), 1e-300);

  const FrequencyState state = s.rho_z(eval, pipe.rho_0, s.initial_shift(z, pipe.delta_corr));
  check.trace_dev = std::abs(state.rho.trace() - Complex(0.0, 1.0) / z);

  const Index d_s2 = eval.l_eff.rows();
  const Index d_s = static_cast<Index>(std::lround(std::sqrt(double(d_s2))));
  const Vector left = vec(Matrix::Identity(d_s, d_s));
  check.left_zero_norm =
      (left.adjoint() * eval.l_eff).norm() / std::max(eval.l_eff.norm(), 1e-300);
  return check;
}

std::vector<FreqSweepPoint> sweep_frequency_grid(const ModelPipeline& pipe,
                                                 const std::vector<Complex>& zs, Exec exec) {
  std::vector<FreqSweepPoint> out(zs.size());
  for_each_index(zs.size(), exec, [&](std::size_t i) {
    const EffectiveLiouvilleEval eval = pipe.solver.effective_liouville(zs[i]);
    const Matrix shift = pipe.solver.initial_shift(zs[i], pipe.delta_corr);
    const FrequencyState state = pipe.solver.rho_z(eval, pipe.rho_0, shift);
    Eigen::ComplexEigenSolver<Matrix> es(eval.l_eff, false);
    if (es.info() != Eigen::Success)
      throw NumericalError("eigensolver failed on the effective generator");
    std::vector<Complex> ev(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    sort_modes(ev);
    FreqSweepPoint& pt = out[i];
    pt.z = zs[i];
    pt.rho = state.rho;
    pt.l_eff_eigenvalues = Eigen::Map<const Vector>(ev.data(), ev.size());
    pt.condition = eval.condition;
  });
  return out;
}

std::vector<ResolventCheck> verify_grid(const ModelPipeline& pipe, const std::vector<Complex>& zs,
                                        std::uint64_t probe_seed, Exec exec) {
  std::vector<ResolventCheck> out(zs.size());
  for_each_index(zs.size(), exec, [&](std::size_t i) {
    out[i] = verify_resolvent_identities(pipe, zs[i], probe_stream(probe_seed, i));
  });
  return out;
}

}  // namespace memliou
