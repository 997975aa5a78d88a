#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "memliou/errors.hpp"
#include "memliou/operator_space.hpp"

using namespace memliou;
using memtest::random_density;
using memtest::random_hermitian;
using memtest::random_matrix;

TEST_CASE("vec is row-major") {
  Matrix x(2, 2);
  x << Complex(1, 2), Complex(3, 4), Complex(5, 6), Complex(7, 8);
  const Vector v = vec(x);
  CHECK(v(0) == Complex(1, 2));
  CHECK(v(1) == Complex(3, 4));
  CHECK(v(2) == Complex(5, 6));
  CHECK(v(3) == Complex(7, 8));
  CHECK(max_abs(unvec(v, 2) - x) == 0.0);
}

TEST_CASE("vec(AXB) = kron(A, B^T) vec(X)") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Index d = 2 + seed % 3;
    const Matrix a = random_matrix(d, 100 + seed);
    const Matrix x = random_matrix(d, 200 + seed);
    const Matrix b = random_matrix(d, 300 + seed);
    const Vector lhs = vec(a * x * b);
    const Vector rhs = kron(a, b.transpose()) * vec(x);
    CHECK((lhs - rhs).norm() <= 1e-12 * lhs.norm());
  }
}

TEST_CASE("kron literal 2x2") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 5, 6, 7;
  const Matrix k = kron(a, b);
  REQUIRE(k.rows() == 4);
  CHECK(k(0, 1) == Complex(5));   // a(0,0) b(0,1)
  CHECK(k(0, 3) == Complex(10));  // a(0,1) b(0,1)
  CHECK(k(2, 0) == Complex(0));   // a(1,0) b(0,0)
  CHECK(k(3, 2) == Complex(24));  // a(1,1) b(1,0)
}

TEST_CASE("commutator superoperator acts as [H, .]") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index d = 2 + seed % 4;
    const Matrix h = random_hermitian(d, 40 + seed);
    const Matrix x = random_matrix(d, 50 + seed);
    const Matrix l = commutator_superop(h);
    const Vector lhs = l * vec(x);
    const Vector rhs = vec(h * x - x * h);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
    // hermitian H makes the superoperator hermitian too
    CHECK(hermiticity_defect(l) <= 1e-14 * max_abs(h));
  }
  CHECK_THROWS_AS(commutator_superop(random_matrix(3, 7)), ConfigError);
}

TEST_CASE("partial trace") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Index ds = 2 + seed % 2, de = 2 + seed % 3;
    const Matrix a = random_matrix(ds, 60 + seed);
    const Matrix b = random_matrix(de, 70 + seed);
    const Matrix pt = partial_trace_env(kron(a, b), ds, de);
    CHECK(max_abs(pt - a * b.trace()) <= 1e-13 * max_abs(a) * std::abs(b.trace() + 1.0));

    const Matrix x = random_matrix(ds * de, 80 + seed);
    CHECK(std::abs(partial_trace_env(x, ds, de).trace() - x.trace()) <= 1e-13);
  }
}

TEST_CASE("embed and partial trace invert each other") {
  const Matrix rho_s = random_density(2, 11);
  const Matrix rho_e = random_density(3, 12);
  const Matrix full = embed_with_env(rho_s, rho_e);
  CHECK(max_abs(partial_trace_env(full, 2, 3) - rho_s) <= 1e-14);
}

TEST_CASE("hs inner product is antilinear in the first slot") {
  const Matrix a = random_matrix(3, 21);
  const Matrix b = random_matrix(3, 22);
  const Complex c(0.3, -1.7);
  CHECK(std::abs(hs_inner(c * a, b) - std::conj(c) * hs_inner(a, b)) <= 1e-12);
  CHECK(std::abs(hs_inner(a, c * b) - c * hs_inner(a, b)) <= 1e-12);
  CHECK(std::abs(hs_inner(a, a).imag()) <= 1e-14 * hs_inner(a, a).real());
}

TEST_CASE("hermiticity checks") {
  const Matrix h = random_hermitian(4, 31);
  CHECK(is_hermitian(h));
  Matrix almost = h;
  almost(1, 2) += Complex(0, 1e-6);
  CHECK(!is_hermitian(almost));
  CHECK(hermiticity_defect(almost) == doctest::Approx(1e-6).epsilon(1e-3));
  CHECK_THROWS_AS(require_hermitian(almost, "test"), ConfigError);
}

TEST_CASE("density operator validation") {
  CHECK_NOTHROW(validate_density_operator(random_density(4, 41), "ok"));

  Matrix bad_trace = random_density(3, 42) * 1.5;
  CHECK_THROWS_AS(validate_density_operator(bad_trace, "trace"), ConfigError);

  Matrix not_herm = random_density(3, 43);
  not_herm(0, 1) += Complex(0, 1e-4);
  CHECK_THROWS_AS(validate_density_operator(not_herm, "herm"), ConfigError);

  Matrix indefinite = Matrix::Zero(2, 2);
  indefinite(0, 0) = 1.5;
  indefinite(1, 1) = -0.5;
  CHECK_THROWS_AS(validate_density_operator(indefinite, "psd"), ConfigError);

  CHECK_THROWS_AS(validate_density_operator(Matrix::Zero(2, 3), "shape"), ConfigError);
}
