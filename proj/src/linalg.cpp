#include "bellprep/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>

namespace bellprep {

namespace {

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
  }
}

// In-place LU factorisation with partial pivoting, PA = LU.
struct LuFactors {
  ComplexMatrix lu;
  std::vector<std::size_t> perm;
};

LuFactors lu_factor(const ComplexMatrix& a, double relative_threshold) {
  const std::size_t n = a.dim();
  LuFactors f{a, std::vector<std::size_t>(n)};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  const double threshold = relative_threshold * a.frobenius_norm();
  ComplexMatrix& m = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (!(best > threshold)) {
      throw SingularMatrixError("invert: pivot " + std::to_string(k) + " has magnitude " +
                                std::to_string(best) + " below threshold " +
                                std::to_string(threshold));
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(pivot, j));
      std::swap(f.perm[k], f.perm[pivot]);
    }
    const Complex inv_pivot = 1.0 / m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex factor = m(i, k) * inv_pivot;
      m(i, k) = factor;
      if (factor == Complex{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= factor * m(k, j);
    }
  }
  return f;
}

// Solves A X = B given the factors of A.
ComplexMatrix lu_solve(const LuFactors& f, const ComplexMatrix& b) {
  const std::size_t n = f.lu.dim();
  const ComplexMatrix& m = f.lu;
  ComplexMatrix x(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x(i, j) = b(f.perm[i], j);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = 1; i < n; ++i) {
      Complex s = x(i, col);
      for (std::size_t k = 0; k < i; ++k) s -= m(i, k) * x(k, col);
      x(i, col) = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      Complex s = x(i, col);
      for (std::size_t k = i + 1; k < n; ++k) s -= m(i, k) * x(k, col);
      x(i, col) = s / m(i, i);
    }
  }
  return x;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim) {}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (entries_.size() != dim_ * dim_) {
    throw DimensionError("ComplexMatrix: expected " + std::to_string(dim_ * dim_) +
                         " entries, got " + std::to_string(entries_.size()));
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(rows.size()) {
  entries_.reserve(dim_ * dim_);
  for (const auto& row : rows) {
    if (row.size() != dim_) throw DimensionError("ComplexMatrix: rows must form a square");
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
  ComplexMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::initializer_list<Complex> diag) {
  return diagonal(std::span<const Complex>(diag.begin(), diag.size()));
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix r(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix r(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix r(*this);
  for (auto& z : r.entries_) z = std::conj(z);
  return r;
}

Complex ComplexMatrix::trace() const {
  Complex t{};
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : entries_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::norm1() const {
  double best = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double ComplexMatrix::max_abs() const {
  double best = 0.0;
  for (const auto& z : entries_) best = std::max(best, std::abs(z));
  return best;
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

bool ComplexMatrix::is_real() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const Complex& z) { return z.imag() == 0.0; });
}

ComplexMatrix ComplexMatrix::block(std::size_t row0, std::size_t col0, std::size_t n) const {
  if (row0 + n > dim_ || col0 + n > dim_) throw DimensionError("block: out of range");
  ComplexMatrix b(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
  return b;
}

void ComplexMatrix::set_block(std::size_t row0, std::size_t col0, const ComplexMatrix& b) {
  if (row0 + b.dim() > dim_ || col0 + b.dim() > dim_) throw DimensionError("set_block: out of range");
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) (*this)(row0 + i, col0 + j) = b(i, j);
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs, "operator+=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += rhs.entries_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_dim(*this, rhs, "operator-=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= rhs.entries_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (auto& z : entries_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "operator*");
  const std::size_t n = a.dim();
  ComplexMatrix c(n);
  // Zero test skips structurally sparse operators (jump operators, projectors).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

StateVector StateVector::unit(std::size_t dim, std::size_t index) {
  StateVector v(dim);
  v[index] = 1.0;
  return v;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& z : amplitudes_) s += std::norm(z);
  return std::sqrt(s);
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::domain_error("StateVector::normalized: zero vector");
  return Complex(1.0 / n) * StateVector(*this);
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

ComplexMatrix StateVector::projector() const {
  const std::size_t n = dim();
  ComplexMatrix p(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = amplitudes_[i] * std::conj(amplitudes_[j]);
  return p;
}

StateVector& StateVector::operator+=(const StateVector& rhs) {
  if (dim() != rhs.dim()) throw DimensionError("StateVector::operator+=: dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i) amplitudes_[i] += rhs.amplitudes_[i];
  return *this;
}

StateVector& StateVector::operator*=(Complex s) {
  for (auto& z : amplitudes_) z *= s;
  return *this;
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator*(Complex s, StateVector v) { return v *= s; }

StateVector operator*(const ComplexMatrix& a, const StateVector& v) {
  if (a.dim() != v.dim()) throw DimensionError("matrix-vector product: dimension mismatch");
  const std::size_t n = a.dim();
  StateVector r(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex s{};
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw DimensionError("inner: dimension mismatch");
  Complex s{};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

Complex matrix_element(const StateVector& a, const ComplexMatrix& op, const StateVector& b) {
  return inner(a, op * b);
}

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t na = a.dim();
  const std::size_t nb = b.dim();
  ComplexMatrix r(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{}) continue;
      for (std::size_t k = 0; k < nb; ++k)
        for (std::size_t l = 0; l < nb; ++l) r(i * nb + k, j * nb + l) = aij * b(k, l);
    }
  return r;
}

ComplexMatrix invert(const ComplexMatrix& a, double relative_threshold) {
  if (a.empty()) throw DimensionError("invert: empty matrix");
  const LuFactors f = lu_factor(a, relative_threshold);
  return lu_solve(f, ComplexMatrix::identity(a.dim()));
}

ComplexMatrix matrix_exponential(const ComplexMatrix& a, double max_norm) {
  // Higham (2005) degree-13 coefficients and the matching scaling threshold.
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  static constexpr double theta13 = 5.371920351148152;

  const std::size_t n = a.dim();
  const double norm = a.norm1();
  if (!std::isfinite(norm) || norm > max_norm) {
    throw OverflowError("matrix_exponential: norm " + std::to_string(norm) + " exceeds bound " +
                        std::to_string(max_norm));
  }
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const ComplexMatrix x = std::ldexp(1.0, -squarings) * a;

  const ComplexMatrix id = ComplexMatrix::identity(n);
  const ComplexMatrix x2 = x * x;
  const ComplexMatrix x4 = x2 * x2;
  const ComplexMatrix x6 = x4 * x2;

  ComplexMatrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2);
  u_inner += b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
  const ComplexMatrix u = x * u_inner;
  ComplexMatrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2);
  v += b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

  ComplexMatrix result = lu_solve(lu_factor(v - u, 0.0), v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

double min_eigenvalue_hermitian(const ComplexMatrix& a) {
  const double scale = a.frobenius_norm();
  const double asym = (a - a.adjoint()).frobenius_norm();
  if (asym > 1e-8 * scale) {
    throw NonHermitianError("min_eigenvalue_hermitian: ||a - a^dag||_F = " + std::to_string(asym) +
                            " exceeds 1e-8 * ||a||_F");
  }
  const std::size_t n = a.dim();
  Eigen::MatrixXcd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          0.5 * (a(i, j) + std::conj(a(j, i)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "max_abs_diff");
  double best = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k)
    best = std::max(best, std::abs(a.entries()[k] - b.entries()[k]));
  return best;
}

}  // namespace bellprep
