#include "memliou/operator_space.hpp"

#include <string>

#include "memliou/errors.hpp"

namespace memliou {

namespace {

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw ConfigError(what, "expected a non-empty square matrix, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

}  // namespace

Vector vec(const Matrix& x) {
  require_square(x, "vec");
  const Index d = x.rows();
  Vector v(d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) v(i * d + j) = x(i, j);
  return v;
}

Matrix unvec(const Vector& v, Index d) {
  if (v.size() != d * d)
    throw ConfigError("unvec", "vector of length " + std::to_string(v.size()) +
                                   " does not match dimension " + std::to_string(d));
  Matrix x(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = v(i * d + j);
  return x;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      c.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return c;
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError("hs_inner", "operand shapes differ");
  return (a.adjoint() * b).trace();
}

Matrix partial_trace_env(const Matrix& x, Index d_system, Index d_env) {
  if (d_system <= 0 || d_env <= 0 || x.rows() != d_system * d_env || x.rows() != x.cols())
    throw ConfigError("partial_trace_env", "matrix is not " + std::to_string(d_system) +
                                               "*" + std::to_string(d_env) + " square");
  Matrix out = Matrix::Zero(d_system, d_system);
  for (Index s = 0; s < d_system; ++s)
    for (Index t = 0; t < d_system; ++t)
      for (Index e = 0; e < d_env; ++e) out(s, t) += x(s * d_env + e, t * d_env + e);
  return out;
}

Matrix embed_with_env(const Matrix& rho_system, const Matrix& rho_env) {
  require_square(rho_system, "embed_with_env: rho_system");
  require_square(rho_env, "embed_with_env: rho_env");
  return kron(rho_system, rho_env);
}

Matrix commutator_superop(const Matrix& h, bool require_herm) {
  require_square(h, "commutator_superop");
  if (require_herm) require_hermitian(h, "commutator_superop");
  const Index d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  return kron(h, id) - kron(id, h.transpose());
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermiticity_defect(const Matrix& a) {
  if (a.rows() != a.cols()) return max_abs(a);
  return max_abs(Matrix(a - a.adjoint()));
}

bool is_hermitian(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  return hermiticity_defect(a) <= rel_tol * std::max(1.0, max_abs(a));
}

void require_hermitian(const Matrix& a, const char* what, double rel_tol) {
  if (!is_hermitian(a, rel_tol))
    throw ConfigError(what, "matrix is not hermitian (defect " +
                                std::to_string(hermiticity_defect(a)) + ")");
}

void validate_density_operator(const Matrix& rho, const char* what, double trace_tol,
                               double psd_tol) {
  require_square(rho, what);
  const double trace_dev = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (trace_dev > trace_tol)
    throw ConfigError(what, "trace deviates from 1 by " + std::to_string(trace_dev));
  if (hermiticity_defect(rho) > psd_tol)
    throw ConfigError(what, "not hermitian within " + std::to_string(psd_tol));
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (rho + rho.adjoint())),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": eigensolver failed");
  if (es.eigenvalues().minCoeff() < -psd_tol)
    throw ConfigError(what, "minimum eigenvalue " + std::to_string(es.eigenvalues().minCoeff()) +
                                " below -" + std::to_string(psd_tol));
}

}  // namespace memliou
