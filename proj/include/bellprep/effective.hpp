#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "bellprep/linalg.hpp"
#include "bellprep/system_model.hpp"

namespace bellprep {

/// d_n vanishes (to 1e-12 g^2) so the excited-state propagator is undefined.
class DegeneratePropagatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A block of the partitioned inverse could not be formed.
class SingularBlockError : public std::runtime_error {
 public:
  SingularBlockError(std::string block, const std::string& detail)
      : std::runtime_error("singular " + block + ": " + detail), block_(std::move(block)) {}
  const std::string& block() const noexcept { return block_; }

 private:
  std::string block_;
};

/// d_n, d~_n and R_n for n = 0, 1, 2.
struct PropagatorScalars {
  std::array<Complex, 3> d{};
  std::array<Complex, 3> d_tilde{};
  std::array<Complex, 3> R{};
};

/**
 * Blocks of the inverse of the 8x8 excited-space non-Hermitian Hamiltonian,
 * ordered [atomic excitations psi0+, psi0-, psi1+, psi1-; cavity excitations
 * 00_c, psic+, psic-, 11_c]. A_hat is atomic x atomic, B_hat atomic rows x
 * cavity columns, C_hat cavity x atomic, D_hat cavity x cavity.
 */
struct PropagatorBlocks {
  ComplexMatrix A_hat;
  ComplexMatrix B_hat;
  ComplexMatrix C_hat;
  ComplexMatrix D_hat;

  ComplexMatrix assemble() const;
};

/// Reduced model on the ground space [|00>, |psi+>, |psi->, |11>].
struct EffectiveModel {
  std::optional<ComplexMatrix> H_eff;
  std::array<ComplexMatrix, 5> L_eff;
  PropagatorScalars scalars;
  SystemParameters params;
};

/// Excited-block offsets inside basis B.
inline constexpr std::size_t kAtomicBlockOffset = kPsi0Plus;
inline constexpr std::size_t kCavityBlockOffset = k00c;

/// H_e - (i/2) sum_k L_k^dag L_k restricted to the eight excited basis-B states.
ComplexMatrix build_H_NH(const SystemParameters& p);

/// Block inverse via Schur complement of the leading (atomic) block.
PropagatorBlocks banachiewicz_invert(const ComplexMatrix& h);

PropagatorScalars propagator_scalars(const SystemParameters& p);

/// Analytic inverse blocks in terms of d_n and R_n.
PropagatorBlocks closed_form_blocks(const SystemParameters& p);

/// Effective operators from their definitions, with H_NH inverted numerically.
EffectiveModel derive_effective_model(const SystemParameters& p);

/// Effective jump operators from their analytic expressions; H_eff is left empty.
EffectiveModel closed_form_effective(const SystemParameters& p);

/// Places an 8x8 excited-space operator into the excited block of a 12x12 one.
ComplexMatrix embed_excited(const ComplexMatrix& excited);

}  // namespace bellprep
