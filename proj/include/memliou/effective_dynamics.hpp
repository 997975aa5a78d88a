#pragma once

#include <vector>

#include "memliou/model.hpp"
#include "memliou/parallel.hpp"
#include "memliou/projection.hpp"

namespace memliou {

// Evaluations must stay strictly above the real axis.
inline constexpr double kMinImagFrequency = 1e-9;
void require_upper_half(Complex z);

struct EffectiveLiouvilleEval {
  Complex z;
  Matrix l_eff;      // d_S^2 x d_S^2
  double condition;  // condition estimate of (z - L_Q) on the Q image
};

struct FrequencyState {
  Complex z;
  Matrix rho;  // d_S x d_S, Tr rho = i/z
};

// Frequency-resolved reduced dynamics for one model. Immutable after
// construction and safe to share across threads. All Q-space propagation is
// done in the orthonormal Q-image coordinates; the full-space block L_Q is
// never inverted directly.
class FrequencySolver {
 public:
  FrequencySolver(const BlockDecomposition& bd, const QImageBasis& qb);

  Index dim_reduced() const { return l_pr_.rows(); }
  Index dim_q() const { return a_qq_.rows(); }

  // x = [z - L_Q]^{-1} y for y in image(Q), full-space in and out.
  // check_precondition enforces ||P y|| <= 1e-8 ||y||.
  Vector q_propagate(Complex z, const Vector& y, bool check_precondition = true) const;

  // L(z) = L_P + L_PQ [z - L_Q]^{-1} L_QP in reduced coordinates.
  EffectiveLiouvilleEval effective_liouville(Complex z) const;

  // Correlation source L_PQ [z - L_Q]^{-1} delta_corr, as a d_S x d_S matrix.
  Matrix initial_shift(Complex z, const Vector& delta_corr) const;

  // rho(z) = i [z - L(z)]^{-1} vec(rho_0 + shift).
  FrequencyState rho_z(const EffectiveLiouvilleEval& eval, const Matrix& rho_0,
                       const Matrix& shift) const;
  FrequencyState rho_z_at(Complex z, const Matrix& rho_0, const Vector& delta_corr) const;

  const Matrix& l_p_reduced() const { return l_pr_; }       // R L E
  const Matrix& coupling_out() const { return snk_; }       // R L B
  const Matrix& coupling_in() const { return src_; }        // B^dag Q L E
  const Matrix& basis() const { return basis_; }
  // First memory moment L_PQ L_QP (reduced); the large-z limit of z*(memory term).
  Matrix memory_first_moment() const { return snk_ * src_; }

 private:
  struct ZFactor {
    Complex z;
    Eigen::PartialPivLU<Matrix> lu;
    double rcond;
  };
  ZFactor factorize(Complex z) const;
  Matrix q_solve(const ZFactor& zf, const Matrix& rhs) const;  // multi-RHS, refined

  Index d_s_, d_e_;
  Matrix basis_;  // orthonormal Q-image basis B
  Matrix a_qq_;   // B^dag L_Q B
  Matrix src_;    // B^dag Q L E
  Matrix snk_;    // R L B
  Matrix l_pr_;   // R L E
  Matrix p_;      // full P, for precondition checks
  Matrix embed_, restrict_;
};

// Free-function forms; each builds the restricted operators on the fly.
Vector q_propagate(const BlockDecomposition& bd, const QImageBasis& qb, Complex z,
                   const Vector& y);
EffectiveLiouvilleEval effective_liouville(const BlockDecomposition& bd,
                                           const QImageBasis& qb, Complex z);
Matrix initial_shift(const BlockDecomposition& bd, const QImageBasis& qb, Complex z,
                     const Vector& delta_corr);
FrequencyState rho_z(const EffectiveLiouvilleEval& eval, const Matrix& rho_0,
                     const Matrix& shift);

// Everything needed to evaluate one model on a frequency grid.
struct ModelPipeline {
  CompositeModel model;
  Matrix l_tot;
  ProjectorPair pq;
  BlockDecomposition bd;
  QImageBasis qb;
  FrequencySolver solver;
  Matrix rho_0;       // reduced initial state
  Vector delta_corr;  // Q part of the initial total state
  double scale;       // spectral radius of L_tot
};

ModelPipeline build_pipeline(const CompositeModel& m);

// Dense (z - L_tot)^{-1}; brute-force oracle used by the verification path.
Matrix full_resolvent(const Matrix& l_tot, Complex z);

// Residuals of the two resolvent identities against the brute-force total
// resolvent: r_embed compares R [z-L_tot]^{-1} E with [z-L(z)]^{-1}; r_cross
// compares the correlation route R [z-L_tot]^{-1} y against
// [z-L(z)]^{-1} L_PQ [z-L_Q]^{-1} y on a random Q-image probe.
struct ResolventCheck {
  Complex z;
  double r_embed;
  double r_cross;
  double trace_dev;       // |Tr rho(z) - i/z|
  double left_zero_norm;  // ||vec(1)^dag L(z)|| / ||L(z)||
};

ResolventCheck verify_resolvent_identities(const ModelPipeline& pipe, Complex z,
                                           std::uint64_t probe_seed = 0);

struct FreqSweepPoint {
  Complex z;
  Matrix rho;
  Vector l_eff_eigenvalues;  // sorted by |Im| ascending, ties by Re
  double condition;
};

std::vector<FreqSweepPoint> sweep_frequency_grid(const ModelPipeline& pipe,
                                                 const std::vector<Complex>& zs,
                                                 Exec exec = Exec::Parallel);

std::vector<ResolventCheck> verify_grid(const ModelPipeline& pipe,
                                        const std::vector<Complex>& zs,
                                        std::uint64_t probe_seed = 0,
                                        Exec exec = Exec::Parallel);

}  // namespace memliou
