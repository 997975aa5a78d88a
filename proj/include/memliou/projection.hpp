#pragma once

#include "memliou/operator_space.hpp"

namespace memliou {

// P X = Tr_env(X) (x) rho_env and Q = 1 - P, as dense D x D matrices acting on
// vectorized operators (D = (d_system*d_env)^2). P is generally non-orthogonal
// when rho_env is not maximally mixed.
struct ProjectorPair {
  Index d_system = 0;
  Index d_env = 0;
  Matrix rho_env;
  Matrix p;
  Matrix q;

  Index dim_full() const { return d_system * d_system * d_env * d_env; }
  Index dim_p() const { return d_system * d_system; }
};

ProjectorPair build_projector_pair(const Matrix& rho_env, Index d_system, Index d_env);

// Coordinate maps between the P-image and reduced (d_system^2) coordinates:
//   embed_map:    vec(rho_S) -> vec(rho_S (x) rho_env)      (D x d_S^2)
//   restrict_map: vec(X)     -> vec(Tr_env X)               (d_S^2 x D)
// restrict_map * embed_map = identity; embed_map * restrict_map = P.
struct BlockDecomposition {
  Matrix l_tot;
  Matrix l_p;   // P L P
  Matrix l_pq;  // P L Q
  Matrix l_qp;  // Q L P
  Matrix l_q;   // Q L Q
  Matrix embed_map;
  Matrix restrict_map;
};

BlockDecomposition decompose_liouville(const Matrix& l_tot, const ProjectorPair& pq);

// Orthonormal basis of image(Q), computed by rank-revealing column-pivoted QR
// of Q. Columns: D x (D - d_S^2). Rank defects throw NumericalError.
struct QImageBasis {
  Matrix basis;
  Index dim_q() const { return basis.cols(); }
};

QImageBasis q_image_basis(const ProjectorPair& pq, double rel_tol = 1e-9);

// rho_system = Tr_env(rho_tot0); delta_corr = vec(rho_tot0) - vec(rho_system (x) rho_env),
// computed by exact subtraction so the two parts recombine bitwise.
struct SplitInitial {
  Matrix rho_system;
  Vector delta_corr;
};

SplitInitial split_initial(const Matrix& rho_tot0, const ProjectorPair& pq);

}  // namespace memliou
