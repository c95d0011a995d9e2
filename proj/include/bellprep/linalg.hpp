#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellprep {

using Complex = std::complex<double>;

/// Operand dimensions do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// LU pivot fell below the singularity threshold.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix exponential argument norm exceeds the configured bound.
class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonHermitianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * @brief Dense square complex matrix, row-major.
 *
 * Every operator in the model (Hamiltonian terms, jump operators, propagator
 * blocks, Liouvillians up to 324x324) is stored this way. Dimension mismatch
 * between operands throws DimensionError.
 */
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t dim);
  ComplexMatrix(std::size_t dim, std::vector<Complex> entries);
  /// Row-wise nested initializer, e.g. {{1, 2}, {3, 4}}.
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix zeros(std::size_t dim) { return ComplexMatrix(dim); }
  static ComplexMatrix diagonal(std::span<const Complex> diag);
  static ComplexMatrix diagonal(std::initializer_list<Complex> diag);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  Complex& operator()(std::size_t row, std::size_t col) noexcept {
    return entries_[row * dim_ + col];
  }
  const Complex& operator()(std::size_t row, std::size_t col) const noexcept {
    return entries_[row * dim_ + col];
  }

  std::span<const Complex> entries() const noexcept { return entries_; }
  std::span<Complex> entries() noexcept { return entries_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conjugate() const;
  Complex trace() const;

  double frobenius_norm() const;
  /// Maximum absolute column sum.
  double norm1() const;
  double max_abs() const;
  bool all_finite() const;
  bool is_real() const;

  /// Square sub-block of size n starting at (row0, col0).
  ComplexMatrix block(std::size_t row0, std::size_t col0, std::size_t n) const;
  void set_block(std::size_t row0, std::size_t col0, const ComplexMatrix& b);

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex s);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, Complex s);

/// Column vector of complex amplitudes.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t dim) : amplitudes_(dim) {}
  explicit StateVector(std::vector<Complex> amplitudes) : amplitudes_(std::move(amplitudes)) {}

  static StateVector unit(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return amplitudes_.size(); }
  Complex& operator[](std::size_t i) noexcept { return amplitudes_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return amplitudes_[i]; }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }

  double norm() const;
  StateVector normalized() const;
  bool is_normalized(double tol = 1e-12) const;
  /// |v><v|
  ComplexMatrix projector() const;

  StateVector& operator+=(const StateVector& rhs);
  StateVector& operator*=(Complex s);

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<Complex> amplitudes_;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator*(Complex s, StateVector v);
StateVector operator*(const ComplexMatrix& a, const StateVector& v);

/// <a|b>, conjugate-linear in the first argument.
Complex inner(const StateVector& a, const StateVector& b);
/// <a|op|b>
Complex matrix_element(const StateVector& a, const ComplexMatrix& op, const StateVector& b);

/// Kronecker product; entry (i*b.dim+k, j*b.dim+l) = a(i,j) * b(k,l).
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Inverse by LU with partial pivoting. Throws SingularMatrixError when a
/// pivot magnitude drops below relative_threshold * ||a||_F.
ComplexMatrix invert(const ComplexMatrix& a, double relative_threshold = 1e-14);

/// e^a by scaling and squaring around a degree-13 Pade core.
ComplexMatrix matrix_exponential(const ComplexMatrix& a, double max_norm = 1e3);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue_hermitian(const ComplexMatrix& a);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// max |a(i,j) - b(i,j)|
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace bellprep
