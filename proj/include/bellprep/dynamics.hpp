#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bellprep/effective.hpp"
#include "bellprep/linalg.hpp"
#include "bellprep/system_model.hpp"

namespace bellprep {

/// Integration diverged or a density-matrix diagnostic left its bounds.
class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoStationaryStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density matrix at a given time (units of 1/g).
struct DensityMatrix {
  ComplexMatrix rho;
  double time = 0.0;

  static DensityMatrix pure(const StateVector& psi, double time = 0.0) {
    return {psi.projector(), time};
  }
};

/// Hamiltonian plus jump operators of a Lindblad generator.
struct Generator {
  ComplexMatrix H;
  std::vector<ComplexMatrix> L;

  std::size_t dim() const { return H.dim(); }
  /// ||H||_F + sum_k ||L_k||_F^2, the natural size of the generator's action.
  double scale() const;
};

/// Full 18-dimensional model: H = H_e + W_+ + W_-, five bare jump operators.
Generator full_generator(const SystemParameters& p);
/// Reduced 4-dimensional model; requires H_eff to be present.
Generator effective_generator(const EffectiveModel& m);

struct IntegratorConfig {
  enum class Method { RK4, PropagatorExp };

  Method method = Method::PropagatorExp;
  double dt = 1.0;
  double t_final = 15000.0;
  std::size_t output_stride = 1;

  /// Propagator stepping with dt = 1 for t_final > 1000, RK4 with dt = 0.01 otherwise.
  static IntegratorConfig defaults_for(double t_final);
  void validate() const;
  std::size_t steps() const;
};

struct Populations {
  double P00 = 0.0;
  double Ppsi_plus = 0.0;
  double Ppsi_minus = 0.0;
  double P11 = 0.0;
  /// Population outside the single-excitation subspace (full model only).
  std::optional<double> leakage;
};

struct Diagnostics {
  double trace_dev = 0.0;
  double herm_dev = 0.0;
  double min_eig = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Populations> populations;
  std::vector<Diagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
};

/// -i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho}).
ComplexMatrix lindblad_rhs(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls,
                           const ComplexMatrix& rho);
ComplexMatrix lindblad_rhs(const Generator& gen, const ComplexMatrix& rho);

/// Superoperator acting on column-stacked vec(rho), index i + d * j.
ComplexMatrix liouvillian_matrix(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls);
ComplexMatrix liouvillian_matrix(const Generator& gen);

StateVector vectorize(const ComplexMatrix& rho);
ComplexMatrix unvectorize(const StateVector& v);

/// Ground-state populations. dim 4 is the effective basis [00, psi+, psi-, 11];
/// dim 18 is the product basis, where psi+- depend on theta.
Populations ground_populations(const ComplexMatrix& rho, double theta);

Diagnostics density_diagnostics(const ComplexMatrix& rho);

/**
 * Integrates the master equation from rho0 and samples populations and
 * diagnostics every output_stride steps (the initial state is always
 * recorded, and so is the final state).
 *
 * Throws IntegratorError when |tr rho - 1| exceeds 1e-6 at any step or the
 * minimum eigenvalue of a sampled state drops below -1e-8.
 */
Trajectory evolve(const Generator& gen, const DensityMatrix& rho0, const IntegratorConfig& config,
                  double theta);
Trajectory evolve(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls,
                  const DensityMatrix& rho0, const IntegratorConfig& config, double theta);

struct SteadyStates {
  std::size_t nullspace_dim = 0;
  /// Hermitian representatives of an orthonormal nullspace basis, trace-normalised when the
  /// trace is nonzero.
  std::vector<ComplexMatrix> basis;
  /// The representatives that are valid density matrices (trace one, positive).
  std::vector<DensityMatrix> states;
};

/// Numerical nullspace of the Liouvillian (singular values <= 1e-10 sigma_max).
SteadyStates steady_state(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls);
SteadyStates steady_state(const Generator& gen);

}  // namespace bellprep
