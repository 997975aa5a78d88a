#pragma once

#include <complex>
#include <Eigen/Dense>

namespace memliou {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Conventions used throughout:
//   * vectorization is row-major: vec(X)[i*d + j] = X(i,j), so that
//     vec(A X B) = (A (x) B^T) vec(X)
//   * composite indices order system (x) environment: (s,e) -> s*d_env + e
//   * hbar = 1

Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index d);

Matrix kron(const Matrix& a, const Matrix& b);

// Hilbert-Schmidt inner product <A,B> = Tr(A^dag B), antilinear in A.
Complex hs_inner(const Matrix& a, const Matrix& b);

Matrix partial_trace_env(const Matrix& x, Index d_system, Index d_env);
Matrix embed_with_env(const Matrix& rho_system, const Matrix& rho_env);

// [H, .] as a dense superoperator: H (x) I - I (x) H^T.
Matrix commutator_superop(const Matrix& h, bool require_herm = true);

double max_abs(const Matrix& a);
double hermiticity_defect(const Matrix& a);  // max |A - A^dag|
bool is_hermitian(const Matrix& a, double rel_tol = 1e-12);
void require_hermitian(const Matrix& a, const char* what, double rel_tol = 1e-12);

// Throws ConfigError unless rho is square, unit trace, hermitian and has
// min eigenvalue >= -psd_tol.
void validate_density_operator(const Matrix& rho, const char* what,
                               double trace_tol = 1e-10, double psd_tol = 1e-10);

}  // namespace memliou
