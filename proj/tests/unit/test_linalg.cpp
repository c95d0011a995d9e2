#include <cmath>
#include <random>

#include "bellprep/linalg.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bellprep;
using namespace bellprep::testing;

TEST_CASE("tensor product of identities is the identity") {
  CHECK(tensor_product(ComplexMatrix::identity(2), ComplexMatrix::identity(3)) == ComplexMatrix::identity(6));
}

TEST_CASE("tensor product of a diagonal with the identity repeats entries") {
  const ComplexMatrix r = tensor_product(ComplexMatrix::diagonal({1.0, 2.0}), ComplexMatrix::identity(2));
  CHECK(r == ComplexMatrix::diagonal({1.0, 1.0, 2.0, 2.0}));
}

TEST_CASE("tensor product matches the four-index formula") {
  std::mt19937_64 rng(11);
  const ComplexMatrix a = random_matrix(2, rng);
  const ComplexMatrix b = random_matrix(3, rng);
  const ComplexMatrix r = tensor_product(a, b);
  REQUIRE(r.dim() == 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) CHECK(r(i * 3 + k, j * 3 + l) == a(i, j) * b(k, l));
}

TEST_CASE("tensor product is associative") {
  // Small integer entries keep every product exact.
  std::mt19937_64 rng(12);
  const ComplexMatrix a = random_integer_matrix(2, rng);
  const ComplexMatrix b = random_integer_matrix(3, rng);
  const ComplexMatrix c = random_integer_matrix(2, rng);
  CHECK(tensor_product(tensor_product(a, b), c) == tensor_product(a, tensor_product(b, c)));
}

TEST_CASE("matrix product agrees with the triple loop") {
  std::mt19937_64 rng(13);
  for (std::size_t n : {1, 4, 9}) {
    const ComplexMatrix a = random_matrix(n, rng);
    const ComplexMatrix b = random_matrix(n, rng);
    CHECK(max_abs_diff(a * b, naive_multiply(a, b)) <= 1e-14 * n);
  }
}

TEST_CASE("adjoint is an involution and reverses products") {
  std::mt19937_64 rng(14);
  const ComplexMatrix a = random_matrix(5, rng);
  const ComplexMatrix b = random_matrix(5, rng);
  CHECK(a.adjoint().adjoint() == a);
  CHECK((a * b).adjoint() == b.adjoint() * a.adjoint());
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(ComplexMatrix(2) + ComplexMatrix(3), DimensionError);
  CHECK_THROWS_AS(ComplexMatrix(2) * ComplexMatrix(3), DimensionError);
  CHECK_THROWS_AS(ComplexMatrix(3, std::vector<Complex>(8)), DimensionError);
}

TEST_CASE("inverse of simple matrices") {
  CHECK(max_abs_diff(invert(ComplexMatrix::identity(8)), ComplexMatrix::identity(8)) == 0.0);
  const ComplexMatrix inv = invert(ComplexMatrix::diagonal({2.0, Complex{0.0, 4.0}}));
  CHECK(std::abs(inv(0, 0) - 0.5) < 1e-16);
  CHECK(std::abs(inv(1, 1) - Complex{0.0, -0.25}) < 1e-16);
  CHECK(inv(0, 1) == Complex{});
}

TEST_CASE("inverse residual for random well-conditioned matrices") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_matrix(8, rng) + 4.0 * ComplexMatrix::identity(8);
    const ComplexMatrix inv = invert(a);
    CHECK((a * inv - ComplexMatrix::identity(8)).frobenius_norm() <= 1e-12 * a.frobenius_norm() * 8);
    CHECK((invert(inv) - a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
  }
}

TEST_CASE("singular matrices are reported") {
  CHECK_THROWS_AS(invert(ComplexMatrix(3)), SingularMatrixError);
  const ComplexMatrix rank_one{{1.0, 2.0}, {2.0, 4.0}};
  CHECK_THROWS_AS(invert(rank_one), SingularMatrixError);
}

TEST_CASE("exponential of zero and of a diagonal") {
  CHECK(max_abs_diff(matrix_exponential(ComplexMatrix(4)), ComplexMatrix::identity(4)) == 0.0);
  const ComplexMatrix e = matrix_exponential(ComplexMatrix::diagonal({std::log(2.0), 0.0}));
  CHECK(std::abs(e(0, 0) - 2.0) < 1e-14);
  CHECK(std::abs(e(1, 1) - 1.0) < 1e-14);
  CHECK(std::abs(e(0, 1)) == 0.0);
}

TEST_CASE("exponential matches the Taylor series for small norm") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix a = random_matrix(6, rng);
    a *= 0.5 / a.norm1();
    CHECK(max_abs_diff(matrix_exponential(a), taylor_exponential(a, 30)) <= 1e-12);
  }
}

TEST_CASE("exponential is accurate up to norm 10") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix a = random_matrix(6, rng);
    a *= 10.0 / a.norm1();
    // e^a = (e^{a/64})^64 with the core evaluated by a converged Taylor sum.
    ComplexMatrix reference = taylor_exponential((1.0 / 64) * a, 30);
    for (int k = 0; k < 6; ++k) reference = reference * reference;
    const ComplexMatrix e = matrix_exponential(a);
    CHECK((e - reference).frobenius_norm() <= 1e-10 * reference.frobenius_norm());
  }
}

TEST_CASE("exponential of commuting matrices factorises") {
  const ComplexMatrix a = ComplexMatrix::diagonal({Complex{0.3, 1.0}, -2.0, Complex{0.0, 4.0}});
  const ComplexMatrix b = ComplexMatrix::diagonal({1.5, Complex{-0.2, 0.7}, 3.0});
  const ComplexMatrix lhs = matrix_exponential(a + b);
  const ComplexMatrix rhs = matrix_exponential(a) * matrix_exponential(b);
  CHECK((lhs - rhs).frobenius_norm() <= 1e-10 * lhs.frobenius_norm());
}

TEST_CASE("exponential overflow bound") {
  CHECK_THROWS_AS(matrix_exponential(2000.0 * ComplexMatrix::identity(2)), OverflowError);
  CHECK_NOTHROW(matrix_exponential(2000.0 * ComplexMatrix::identity(2), 1e4));
}

TEST_CASE("minimum eigenvalue of simple Hermitian matrices") {
  CHECK(min_eigenvalue_hermitian(ComplexMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(min_eigenvalue_hermitian(ComplexMatrix::diagonal({0.2, 0.8})) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("minimum eigenvalue agrees with a Jacobi eigensolver") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_hermitian(4, rng);
    CHECK(std::abs(min_eigenvalue_hermitian(a) - jacobi_min_eigenvalue(a)) <= 1e-10);
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  const ComplexMatrix a{{1.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(min_eigenvalue_hermitian(a), NonHermitianError);
}

TEST_CASE("commutator and state-vector helpers") {
  const ComplexMatrix x{{0.0, 1.0}, {1.0, 0.0}};
  const ComplexMatrix z{{1.0, 0.0}, {0.0, -1.0}};
  const ComplexMatrix c = commutator(x, z);
  CHECK(c == ComplexMatrix{{0.0, -2.0}, {2.0, 0.0}});

  StateVector v(2);
  v[0] = 3.0;
  v[1] = Complex{0.0, 4.0};
  CHECK(v.norm() == doctest::Approx(5.0));
  CHECK(v.normalized().is_normalized());
  CHECK(std::abs(inner(v, v) - 25.0) < 1e-14);
  CHECK(std::abs(matrix_element(v, z, v) - (9.0 - 16.0)) < 1e-14);
  const ComplexMatrix p = v.normalized().projector();
  CHECK(std::abs(p.trace() - 1.0) < 1e-15);
}
