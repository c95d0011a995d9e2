#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bellprep/linalg.hpp"

namespace bellprep {

/// Driving angle lies inside the exclusion window around a pole of f(theta).
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Relative drive on the second atom: f(theta) = tan, -cot, or a constant.
struct DrivingModulation {
  enum class Kind { Tan, NegCot, Fixed };

  Kind kind = Kind::Tan;
  double fixed_value = 0.0;

  static DrivingModulation tan() { return {Kind::Tan, 0.0}; }
  static DrivingModulation neg_cot() { return {Kind::NegCot, 0.0}; }
  static DrivingModulation fixed(double value);

  /// "tan", "negcot" or "fixed:VALUE".
  static DrivingModulation parse(std::string_view text);
  std::string name() const;

  friend bool operator==(const DrivingModulation&, const DrivingModulation&) = default;
};

inline constexpr double kPoleGuard = 1e-6;

/// Distance from theta to the nearest pole of the modulation (infinite for Fixed).
double pole_distance(const DrivingModulation& modulation, double theta);

double f_value(const DrivingModulation& modulation, double theta);

/**
 * @brief Physical rates and detunings of the two-atom cavity.
 *
 * All angular quantities in rad/time, rates in 1/time. The spontaneous
 * emission rate gamma is split as gamma0 = branching_to_0 * gamma into |0>
 * and gamma1 = (1 - branching_to_0) * gamma into |1>.
 */
struct SystemParameters {
  double g = 1.0;
  double delta = 0.0;
  double Delta = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double Omega = 0.0;
  double theta = 0.0;
  DrivingModulation modulation = DrivingModulation::tan();
  double branching_to_0 = 0.5;

  /// Throws std::invalid_argument on g <= 0, negative rates, or branching outside [0, 1].
  void validate() const;

  double gamma0() const { return branching_to_0 * gamma; }
  double gamma1() const { return (1.0 - branching_to_0) * gamma; }
  double f() const { return f_value(modulation, theta); }

  /// Omega * max(1, |f|) <= 0.2 * min of the nonzero (g, kappa, gamma).
  bool weak_driving() const;
};

/// Dimensionless parametrisation g = alpha x, delta = tilde_delta alpha x, ...
struct ScaledParameters {
  double alpha = 10.0;
  double x = 0.1;
  double tilde_delta = 0.5;
  double tilde_Delta = 2.0;
  double tilde_kappa = 1.0;
  double tilde_gamma = 0.5;
  double tilde_Omega = 0.1;

  void validate() const;

  friend bool operator==(const ScaledParameters&, const ScaledParameters&) = default;
};

SystemParameters from_scaled(const ScaledParameters& s, double theta, DrivingModulation modulation);

// Computational product basis: atom levels |0>,|1>,|e> -> 0,1,2; cavity
// |vac>,|1ph> -> 0,1; flat index (a1 * 3 + a2) * 2 + c.
inline constexpr std::size_t kFullDim = 18;
inline constexpr std::size_t kBasisDim = 12;
inline constexpr std::size_t kGroundDim = 4;
inline constexpr std::size_t kExcitedDim = 8;
inline constexpr std::size_t kLevelExcited = 2;

constexpr std::size_t product_index(std::size_t atom1, std::size_t atom2, std::size_t photons) {
  return (atom1 * 3 + atom2) * 2 + photons;
}

/// Labels of basis B, in order: ground block G, atomic-excitation block A,
/// cavity-excitation block C.
enum BasisLabel : std::size_t {
  k00 = 0,
  kPsiPlus,
  kPsiMinus,
  k11,
  kPsi0Plus,
  kPsi0Minus,
  kPsi1Plus,
  kPsi1Minus,
  k00c,
  kPsiCPlus,
  kPsiCMinus,
  k11c,
};

inline constexpr std::array<std::string_view, kBasisDim> kBasisLabels = {
    "00", "psi_plus", "psi_minus", "11", "psi0_plus", "psi0_minus",
    "psi1_plus", "psi1_minus", "00_c", "psic_plus", "psic_minus", "11_c"};

struct OperatorSet {
  std::size_t dim = 0;
  ComplexMatrix H_e;
  ComplexMatrix H_ac;
  ComplexMatrix W_plus;
  ComplexMatrix W_minus;
  std::array<ComplexMatrix, 5> L;

  /// H_g + H_e + W_plus + W_minus with H_g = 0.
  ComplexMatrix hamiltonian() const;
};

/// Isometry from the 12-dimensional single-excitation subspace of the
/// product space onto basis B; columns are stored as product-basis vectors.
struct BasisB {
  double theta = 0.0;
  std::vector<StateVector> columns;

  const StateVector& operator[](std::size_t label) const { return columns[label]; }
};

OperatorSet build_bare_operators(const SystemParameters& p);
BasisB build_basis_B(double theta);
/// V^dag op V for an 18x18 operator.
ComplexMatrix project_to_B(const ComplexMatrix& op, const BasisB& basis);
OperatorSet project_to_B(const OperatorSet& ops, const BasisB& basis);
/// Closed-form operators directly in basis B (12x12).
OperatorSet appendix_operators(const SystemParameters& p);

}  // namespace bellprep
