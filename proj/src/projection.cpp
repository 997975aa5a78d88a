#include "memliou/projection.hpp"

#include <Eigen/QR>

#include "memliou/errors.hpp"

namespace memliou {

namespace {

// vec(Tr_env X) = R vec(X). Row (a*d_s + b), columns run over the composite
// indices ((a,e),(b,e)).
Matrix restrict_map_matrix(Index d_s, Index d_e) {
  const Index d = d_s * d_e;
  Matrix r = Matrix::Zero(d_s * d_s, d * d);
  for (Index a = 0; a < d_s; ++a)
    for (Index b = 0; b < d_s; ++b)
      for (Index e = 0; e < d_e; ++e)
        r(a * d_s + b, (a * d_e + e) * d + (b * d_e + e)) = 1.0;
  return r;
}

// vec(rho_S (x) rho_env) = Em vec(rho_S).
Matrix embed_map_matrix(const Matrix& rho_env, Index d_s, Index d_e) {
  const Index d = d_s * d_e;
  Matrix em = Matrix::Zero(d * d, d_s * d_s);
  for (Index a = 0; a < d_s; ++a)
    for (Index b = 0; b < d_s; ++b)
      for (Index e = 0; e < d_e; ++e)
        for (Index f = 0; f < d_e; ++f)
          em((a * d_e + e) * d + (b * d_e + f), a * d_s + b) = rho_env(e, f);
  return em;
}

}  // namespace

ProjectorPair build_projector_pair(const Matrix& rho_env, Index d_system, Index d_env) {
  if (rho_env.rows() != d_env || rho_env.cols() != d_env)
    throw ConfigError("rho_env", "wrong shape for the declared environment dimension");
  validate_density_operator(rho_env, "projector rho_env");
  ProjectorPair pq;
  pq.d_system = d_system;
  pq.d_env = d_env;
  pq.rho_env = rho_env;
  const Matrix em = embed_map_matrix(rho_env, d_system, d_env);
  const Matrix r = restrict_map_matrix(d_system, d_env);
  pq.p = em * r;
  pq.q = Matrix::Identity(pq.dim_full(), pq.dim_full()) - pq.p;
  return pq;
}

BlockDecomposition decompose_liouville(const Matrix& l_tot, const ProjectorPair& pq) {
  const Index dim = pq.dim_full();
  if (l_tot.rows() != dim || l_tot.cols() != dim)
    throw NumericalError("decompose_liouville: generator dimension mismatch");
  BlockDecomposition bd;
  bd.l_tot = l_tot;
  bd.embed_map = embed_map_matrix(pq.rho_env, pq.d_system, pq.d_env);
  bd.restrict_map = restrict_map_matrix(pq.d_system, pq.d_env);
  bd.l_p = pq.p * l_tot * pq.p;
  bd.l_pq = pq.p * l_tot * pq.q;
  bd.l_qp = pq.q * l_tot * pq.p;
  bd.l_q = pq.q * l_tot * pq.q;
  return bd;
}

QImageBasis q_image_basis(const ProjectorPair& pq, double rel_tol) {
  const Index dim = pq.dim_full();
  const Index expected = dim - pq.dim_p();
  Eigen::ColPivHouseholderQR<Matrix> qr(pq.q);
  qr.setThreshold(rel_tol);
  const Index rank = qr.rank();
  if (rank != expected)
    throw NumericalError("q_image_basis: rank " + std::to_string(rank) + ", expected " +
                         std::to_string(expected));
  Matrix thin = qr.householderQ() * Matrix::Identity(dim, rank);
  return QImageBasis{std::move(thin)};
}

SplitInitial split_initial(const Matrix& rho_tot0, const ProjectorPair& pq) {
  const Index d = pq.d_system * pq.d_env;
  if (rho_tot0.rows() != d || rho_tot0.cols() != d)
    throw NumericalError("split_initial: state dimension mismatch");
  SplitInitial out;
  out.rho_system = partial_trace_env(rho_tot0, pq.d_system, pq.d_env);
  out.delta_corr = vec(rho_tot0) - vec(embed_with_env(out.rho_system, pq.rho_env));
  return out;
}

}  // namespace memliou
