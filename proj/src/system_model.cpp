#include "bellprep/system_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace bellprep {

DrivingModulation DrivingModulation::fixed(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("fixed modulation value must be finite");
  return {Kind::Fixed, value};
}

DrivingModulation DrivingModulation::parse(std::string_view text) {
  if (text == "tan") return tan();
  if (text == "negcot") return neg_cot();
  constexpr std::string_view prefix = "fixed:";
  if (text.starts_with(prefix)) {
    const std::string_view number = text.substr(prefix.size());
    double value = 0.0;
    const auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec == std::errc{} && end == number.data() + number.size()) return fixed(value);
  }
  throw std::invalid_argument("unknown modulation '" + std::string(text) +
                              "' (expected tan, negcot or fixed:VALUE)");
}

std::string DrivingModulation::name() const {
  switch (kind) {
    case Kind::Tan:
      return "tan";
    case Kind::NegCot:
      return "negcot";
    case Kind::Fixed: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, fixed_value);
      return "fixed:" + std::string(buf, res.ptr);
    }
  }
  return {};
}

double pole_distance(const DrivingModulation& modulation, double theta) {
  using std::numbers::pi;
  switch (modulation.kind) {
    case DrivingModulation::Kind::Tan:
      return std::abs(std::remainder(theta - pi / 2, pi));
    case DrivingModulation::Kind::NegCot:
      return std::abs(std::remainder(theta, pi));
    case DrivingModulation::Kind::Fixed:
      break;
  }
  return std::numeric_limits<double>::infinity();
}

double f_value(const DrivingModulation& modulation, double theta) {
  if (pole_distance(modulation, theta) < kPoleGuard) {
    throw PoleError("f(theta) = " + modulation.name() + " has a pole within " +
                    std::to_string(kPoleGuard) + " rad of theta = " + std::to_string(theta));
  }
  switch (modulation.kind) {
    case DrivingModulation::Kind::Tan:
      return std::tan(theta);
    case DrivingModulation::Kind::NegCot:
      return -std::cos(theta) / std::sin(theta);
    case DrivingModulation::Kind::Fixed:
      break;
  }
  return modulation.fixed_value;
}

void SystemParameters::validate() const {
  const double values[] = {g, delta, Delta, kappa, gamma, Omega, theta, branching_to_0};
  if (!std::all_of(std::begin(values), std::end(values), [](double v) { return std::isfinite(v); }))
    throw std::invalid_argument("SystemParameters: all values must be finite");
  if (!(g > 0.0)) throw std::invalid_argument("SystemParameters: g must be positive");
  if (kappa < 0.0 || gamma < 0.0 || Omega < 0.0)
    throw std::invalid_argument("SystemParameters: kappa, gamma and Omega must be non-negative");
  if (branching_to_0 < 0.0 || branching_to_0 > 1.0)
    throw std::invalid_argument("SystemParameters: branching_to_0 must lie in [0, 1]");
}

bool SystemParameters::weak_driving() const {
  double smallest = g;
  if (kappa > 0.0) smallest = std::min(smallest, kappa);
  if (gamma > 0.0) smallest = std::min(smallest, gamma);
  return Omega * std::max(1.0, std::abs(f())) <= 0.2 * smallest;
}

void ScaledParameters::validate() const {
  if (!(alpha > 0.0) || !(x > 0.0))
    throw std::invalid_argument("ScaledParameters: alpha and x must be positive");
  const double tildes[] = {tilde_delta, tilde_Delta, tilde_kappa, tilde_gamma, tilde_Omega};
  if (!std::all_of(std::begin(tildes), std::end(tildes),
                   [](double v) { return std::isfinite(v) && v >= 0.0; }))
    throw std::invalid_argument("ScaledParameters: dimensionless multipliers must be >= 0");
}

SystemParameters from_scaled(const ScaledParameters& s, double theta, DrivingModulation modulation) {
  s.validate();
  const double y = s.alpha * s.x;
  SystemParameters p;
  p.g = y;
  p.delta = s.tilde_delta * y;
  p.Delta = s.tilde_Delta * y;
  p.kappa = s.tilde_kappa * s.x;
  p.gamma = s.tilde_gamma * s.x;
  p.Omega = s.tilde_Omega * s.x;
  p.theta = theta;
  p.modulation = modulation;
  return p;
}

ComplexMatrix OperatorSet::hamiltonian() const { return H_e + W_plus + W_minus; }

OperatorSet build_bare_operators(const SystemParameters& p) {
  p.validate();
  const double f = p.f();
  const std::size_t n = kFullDim;
  OperatorSet ops;
  ops.dim = n;
  ops.H_e = ComplexMatrix(n);
  ops.H_ac = ComplexMatrix(n);
  ops.W_plus = ComplexMatrix(n);
  for (auto& l : ops.L) l = ComplexMatrix(n);

  const double sqrt_kappa = std::sqrt(p.kappa);
  const double sqrt_gamma0 = std::sqrt(p.gamma0());
  const double sqrt_gamma1 = std::sqrt(p.gamma1());
  constexpr std::size_t e = kLevelExcited;

  for (std::size_t a1 = 0; a1 < 3; ++a1) {
    for (std::size_t a2 = 0; a2 < 3; ++a2) {
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t col = product_index(a1, a2, c);
        ops.H_e(col, col) = p.Delta * ((a1 == e) + (a2 == e)) + p.delta * static_cast<double>(c);
        // g a |e><1| per atom; the Hermitian conjugate is added below.
        if (c == 1 && a1 == 1) ops.H_ac(product_index(e, a2, 0), col) += p.g;
        if (c == 1 && a2 == 1) ops.H_ac(product_index(a1, e, 0), col) += p.g;
        if (a1 == 0) ops.W_plus(product_index(e, a2, c), col) += p.Omega / 2;
        if (a2 == 0) ops.W_plus(product_index(a1, e, c), col) += f * p.Omega / 2;
        if (c == 1) ops.L[0](product_index(a1, a2, 0), col) = sqrt_kappa;
        if (a1 == e) {
          ops.L[1](product_index(0, a2, c), col) = sqrt_gamma0;
          ops.L[3](product_index(1, a2, c), col) = sqrt_gamma1;
        }
        if (a2 == e) {
          ops.L[2](product_index(a1, 0, c), col) = sqrt_gamma0;
          ops.L[4](product_index(a1, 1, c), col) = sqrt_gamma1;
        }
      }
    }
  }
  ops.H_ac += ops.H_ac.adjoint();
  ops.H_e += ops.H_ac;
  ops.W_minus = ops.W_plus.adjoint();
  return ops;
}

BasisB build_basis_B(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  constexpr std::size_t e = kLevelExcited;
  auto ket = [](std::size_t a1, std::size_t a2, std::size_t ph) {
    return StateVector::unit(kFullDim, product_index(a1, a2, ph));
  };

  BasisB basis;
  basis.theta = theta;
  basis.columns.reserve(kBasisDim);
  auto push_ground_block = [&](std::size_t ph) {
    basis.columns.push_back(ket(0, 0, ph));
    basis.columns.push_back(c * ket(1, 0, ph) + s * ket(0, 1, ph));
    basis.columns.push_back(c * ket(0, 1, ph) + (-s) * ket(1, 0, ph));
    basis.columns.push_back(ket(1, 1, ph));
  };
  push_ground_block(0);
  for (std::size_t j = 0; j < 2; ++j) {
    basis.columns.push_back(c * ket(e, j, 0) + s * ket(j, e, 0));
    basis.columns.push_back(c * ket(j, e, 0) + (-s) * ket(e, j, 0));
  }
  push_ground_block(1);
  return basis;
}

ComplexMatrix project_to_B(const ComplexMatrix& op, const BasisB& basis) {
  if (op.dim() != kFullDim || basis.columns.size() != kBasisDim)
    throw DimensionError("project_to_B: expected an 18x18 operator and a 12-column basis");
  ComplexMatrix r(kBasisDim);
  std::vector<StateVector> images;
  images.reserve(kBasisDim);
  for (const auto& col : basis.columns) images.push_back(op * col);
  for (std::size_t i = 0; i < kBasisDim; ++i)
    for (std::size_t j = 0; j < kBasisDim; ++j) r(i, j) = inner(basis.columns[i], images[j]);
  return r;
}

OperatorSet project_to_B(const OperatorSet& ops, const BasisB& basis) {
  OperatorSet r;
  r.dim = kBasisDim;
  r.H_e = project_to_B(ops.H_e, basis);
  r.H_ac = project_to_B(ops.H_ac, basis);
  r.W_plus = project_to_B(ops.W_plus, basis);
  r.W_minus = r.W_plus.adjoint();
  for (std::size_t k = 0; k < ops.L.size(); ++k) r.L[k] = project_to_B(ops.L[k], basis);
  return r;
}

OperatorSet appendix_operators(const SystemParameters& p) {
  p.validate();
  const double f = p.f();
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const std::size_t n = kBasisDim;

  OperatorSet ops;
  ops.dim = n;
  ops.H_ac = ComplexMatrix(n);
  ops.H_ac(kPsiCPlus, kPsi0Plus) = p.g;
  ops.H_ac(kPsiCMinus, kPsi0Minus) = p.g;
  ops.H_ac(k11c, kPsi1Plus) = p.g * (c + s);
  ops.H_ac(k11c, kPsi1Minus) = p.g * (c - s);
  ops.H_ac += ops.H_ac.adjoint();

  ops.H_e = ops.H_ac;
  for (std::size_t k = kPsi0Plus; k <= kPsi1Minus; ++k) ops.H_e(k, k) += p.Delta;
  for (std::size_t k = k00c; k <= k11c; ++k) ops.H_e(k, k) += p.delta;

  ops.W_plus = ComplexMatrix(n);
  auto& w = ops.W_plus;
  w(kPsi0Plus, k00) = c + f * s;
  w(kPsi0Minus, k00) = f * c - s;
  w(kPsi1Plus, kPsiMinus) = c * c - f * s * s;
  w(kPsi1Plus, kPsiPlus) = c * s + f * c * s;
  w(kPsi1Minus, kPsiMinus) = -(c * s + f * c * s);
  w(kPsi1Minus, kPsiPlus) = f * c * c - s * s;
  w *= p.Omega / 2;
  ops.W_minus = w.adjoint();

  for (auto& l : ops.L) l = ComplexMatrix(n);
  const double rk = std::sqrt(p.kappa);
  ops.L[0](k00, k00c) = rk;
  ops.L[0](kPsiPlus, kPsiCPlus) = rk;
  ops.L[0](kPsiMinus, kPsiCMinus) = rk;
  ops.L[0](k11, k11c) = rk;

  const double r0 = std::sqrt(p.gamma0());
  auto& l2 = ops.L[1];
  l2(k00, kPsi0Plus) = r0 * c;
  l2(k00, kPsi0Minus) = -r0 * s;
  l2(kPsiMinus, kPsi1Plus) = r0 * c * c;
  l2(kPsiPlus, kPsi1Plus) = r0 * c * s;
  l2(kPsiMinus, kPsi1Minus) = -r0 * c * s;
  l2(kPsiPlus, kPsi1Minus) = -r0 * s * s;

  auto& l3 = ops.L[2];
  l3(k00, kPsi0Plus) = r0 * s;
  l3(k00, kPsi0Minus) = r0 * c;
  l3(kPsiMinus, kPsi1Plus) = -r0 * s * s;
  l3(kPsiPlus, kPsi1Plus) = r0 * c * s;
  l3(kPsiMinus, kPsi1Minus) = -r0 * c * s;
  l3(kPsiPlus, kPsi1Minus) = r0 * c * c;

  const double r1 = std::sqrt(p.gamma1());
  auto& l4 = ops.L[3];
  l4(k11, kPsi1Plus) = r1 * c;
  l4(k11, kPsi1Minus) = -r1 * s;
  l4(kPsiMinus, kPsi0Plus) = -r1 * c * s;
  l4(kPsiPlus, kPsi0Plus) = r1 * c * c;
  l4(kPsiMinus, kPsi0Minus) = r1 * s * s;
  l4(kPsiPlus, kPsi0Minus) = -r1 * c * s;

  auto& l5 = ops.L[4];
  l5(k11, kPsi1Plus) = r1 * s;
  l5(k11, kPsi1Minus) = r1 * c;
  l5(kPsiMinus, kPsi0Plus) = r1 * c * s;
  l5(kPsiPlus, kPsi0Plus) = r1 * s * s;
  l5(kPsiMinus, kPsi0Minus) = r1 * c * c;
  l5(kPsiPlus, kPsi0Minus) = r1 * c * s;
  return ops;
}

}  // namespace bellprep
