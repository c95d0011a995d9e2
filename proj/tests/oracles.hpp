#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bellprep/linalg.hpp"

namespace bellprep::testing {

inline ComplexMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = {normal(rng), normal(rng)};
  return m;
}

inline ComplexMatrix random_integer_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(-9, 9);
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = {double(digit(rng)), double(digit(rng))};
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(n, rng);
  return 0.5 * (a + a.adjoint());
}

/// Random density matrix a a^dag / tr(a a^dag).
inline ComplexMatrix random_density(std::size_t n, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(n, rng);
  ComplexMatrix rho = a * a.adjoint();
  rho *= 1.0 / rho.trace();
  return rho;
}

inline ComplexMatrix naive_multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t n = a.dim();
  ComplexMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s{};
      for (std::size_t k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

/// sum_{k < terms} a^k / k!
inline ComplexMatrix taylor_exponential(const ComplexMatrix& a, int terms) {
  ComplexMatrix sum = ComplexMatrix::identity(a.dim());
  ComplexMatrix power = ComplexMatrix::identity(a.dim());
  for (int k = 1; k < terms; ++k) {
    power = naive_multiply(power, a);
    power *= 1.0 / k;
    sum += power;
  }
  return sum;
}

/// Cyclic Jacobi on the real symmetric embedding [[Re, -Im], [Im, Re]],
/// whose spectrum is that of the Hermitian matrix with doubled multiplicity.
inline std::vector<double> jacobi_eigenvalues(const ComplexMatrix& h) {
  const std::size_t n = h.dim();
  const std::size_t m = 2 * n;
  std::vector<double> s(m * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return s[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Complex z = 0.5 * (h(i, j) + std::conj(h(j, i)));
      at(i, j) = z.real();
      at(i + n, j + n) = z.real();
      at(i, j + n) = -z.imag();
      at(i + n, j) = z.imag();
    }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) off += at(p, q) * at(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double tau = (at(q, q) - at(p, p)) / (2 * at(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t);
        const double sn = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double kp = at(k, p), kq = at(k, q);
          at(k, p) = c * kp - sn * kq;
          at(k, q) = sn * kp + c * kq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double pk = at(p, k), qk = at(q, k);
          at(p, k) = c * pk - sn * qk;
          at(q, k) = sn * pk + c * qk;
        }
      }
  }
  std::vector<double> eig(m);
  for (std::size_t i = 0; i < m; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double jacobi_min_eigenvalue(const ComplexMatrix& h) { return jacobi_eigenvalues(h).front(); }

}  // namespace bellprep::testing
