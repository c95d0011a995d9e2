#include "bellprep/effective.hpp"

#include <cmath>

namespace bellprep {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr std::size_t kBlock = 4;

struct ProjectedModel {
  OperatorSet ops;  // 12x12, basis B
  ComplexMatrix h_nh;
};

ProjectedModel project_model(const SystemParameters& p) {
  const OperatorSet bare = build_bare_operators(p);
  const BasisB basis = build_basis_B(p.theta);
  ComplexMatrix decay(kFullDim);
  for (const auto& l : bare.L) decay += l.adjoint() * l;
  const ComplexMatrix h_full = bare.H_e - (0.5 * kI) * decay;
  return {project_to_B(bare, basis),
          project_to_B(h_full, basis).block(kAtomicBlockOffset, kAtomicBlockOffset, kExcitedDim)};
}

}  // namespace

ComplexMatrix PropagatorBlocks::assemble() const {
  ComplexMatrix m(2 * kBlock);
  m.set_block(0, 0, A_hat);
  m.set_block(0, kBlock, B_hat);
  m.set_block(kBlock, 0, C_hat);
  m.set_block(kBlock, kBlock, D_hat);
  return m;
}

ComplexMatrix build_H_NH(const SystemParameters& p) { return project_model(p).h_nh; }

PropagatorBlocks banachiewicz_invert(const ComplexMatrix& h) {
  if (h.dim() != kExcitedDim) throw DimensionError("banachiewicz_invert: expected an 8x8 matrix");
  const ComplexMatrix a = h.block(0, 0, kBlock);
  const ComplexMatrix b = h.block(0, kBlock, kBlock);
  const ComplexMatrix c = h.block(kBlock, 0, kBlock);
  const ComplexMatrix d = h.block(kBlock, kBlock, kBlock);

  ComplexMatrix a_inv;
  try {
    a_inv = invert(a);
  } catch (const SingularMatrixError& e) {
    throw SingularBlockError("leading block A~", e.what());
  }
  ComplexMatrix schur_inv;
  try {
    schur_inv = invert(d - c * a_inv * b);
  } catch (const SingularMatrixError& e) {
    throw SingularBlockError("Schur complement D~ - C~ A~^-1 B~", e.what());
  }

  PropagatorBlocks r;
  r.D_hat = schur_inv;
  r.B_hat = -(a_inv * b * schur_inv);
  r.C_hat = -(schur_inv * c * a_inv);
  r.A_hat = a_inv + a_inv * b * schur_inv * c * a_inv;
  return r;
}

PropagatorScalars propagator_scalars(const SystemParameters& p) {
  const Complex atomic{p.Delta, -p.gamma / 2};
  const Complex cavity{p.delta, -p.kappa / 2};
  const Complex tilde_base = Complex{p.gamma, 2 * p.Delta} * Complex{p.kappa, 2 * p.delta};
  const double g2 = p.g * p.g;

  PropagatorScalars s;
  for (int n = 0; n < 3; ++n) {
    s.d[n] = atomic * cavity - static_cast<double>(n) * g2;
    if (std::abs(s.d[n]) < 1e-12 * g2) {
      throw DegeneratePropagatorError("propagator_scalars: |d_" + std::to_string(n) + "| = " +
                                      std::to_string(std::abs(s.d[n])) + " is below 1e-12 g^2");
    }
    s.d_tilde[n] = 4.0 * n * g2 + tilde_base;
    s.R[n] = atomic / s.d[n];
  }
  return s;
}

PropagatorBlocks closed_form_blocks(const SystemParameters& p) {
  const PropagatorScalars s = propagator_scalars(p);
  const double c = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  const double g2 = p.g * p.g;
  const Complex atomic{p.Delta, -p.gamma / 2};
  const Complex d2_atomic = s.d[2] * atomic;
  // Local indices: atomic block psi0+, psi0-, psi1+, psi1-; cavity block 00_c, psic+, psic-, 11_c.
  enum : std::size_t { a0p = 0, a0m, a1p, a1m };
  enum : std::size_t { c00 = 0, cp, cm, c11 };

  PropagatorBlocks r;
  r.A_hat = ComplexMatrix(kBlock);
  const Complex j0 = Complex{-4 * p.delta, 2 * p.kappa} / s.d_tilde[1];
  r.A_hat(a0p, a0p) = j0;
  r.A_hat(a0m, a0m) = j0;
  r.A_hat(a1m, a1p) = g2 * std::cos(2 * p.theta) / d2_atomic;
  r.A_hat(a1p, a1m) = r.A_hat(a1m, a1p);
  r.A_hat(a1m, a1m) = (s.d[2] + g2 * (1 - std::sin(2 * p.theta))) / d2_atomic;
  r.A_hat(a1p, a1p) = (s.d[2] + g2 * (1 + std::sin(2 * p.theta))) / d2_atomic;

  r.B_hat = ComplexMatrix(kBlock);
  r.B_hat(a0p, cp) = -p.g / s.d[1];
  r.B_hat(a0m, cm) = -p.g / s.d[1];
  r.B_hat(a1p, c11) = -p.g * (c + sn) / s.d[2];
  r.B_hat(a1m, c11) = -p.g * (c - sn) / s.d[2];

  r.C_hat = r.B_hat.transpose();
  r.D_hat = ComplexMatrix::diagonal({s.R[0], s.R[1], s.R[1], s.R[2]});
  return r;
}

ComplexMatrix embed_excited(const ComplexMatrix& excited) {
  if (excited.dim() != kExcitedDim) throw DimensionError("embed_excited: expected an 8x8 matrix");
  ComplexMatrix m(kBasisDim);
  m.set_block(kAtomicBlockOffset, kAtomicBlockOffset, excited);
  return m;
}

EffectiveModel derive_effective_model(const SystemParameters& p) {
  const ProjectedModel model = project_model(p);
  const ComplexMatrix propagator = embed_excited(invert(model.h_nh));
  const ComplexMatrix& w_plus = model.ops.W_plus;
  const ComplexMatrix& w_minus = model.ops.W_minus;

  EffectiveModel eff;
  eff.params = p;
  eff.scalars = propagator_scalars(p);
  const ComplexMatrix h = -0.5 * (w_minus * (propagator + propagator.adjoint()) * w_plus);
  eff.H_eff = h.block(0, 0, kGroundDim);
  for (std::size_t k = 0; k < eff.L_eff.size(); ++k)
    eff.L_eff[k] = (model.ops.L[k] * propagator * w_plus).block(0, 0, kGroundDim);
  return eff;
}

EffectiveModel closed_form_effective(const SystemParameters& p) {
  const PropagatorScalars s = propagator_scalars(p);
  const double f = p.f();
  const double c = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  const Complex dt1 = s.d_tilde[1];
  const Complex dt2 = s.d_tilde[2];
  const double g4 = 4 * p.g * p.g;
  const Complex drive = Complex{p.kappa, 2 * p.delta};            // 2i delta + kappa
  const Complex out_den = Complex{p.gamma, 2 * p.Delta} * dt2;   // (gamma + 2i Delta) d~_2
  const Complex pre0 = kI * std::sqrt(p.gamma0()) * p.Omega;     // i sqrt(gamma/2) Omega at equal split
  const Complex pre1 = kI * std::sqrt(p.gamma1()) * p.Omega;
  const double cavity_pre = 2 * p.g * p.Omega * std::sqrt(p.kappa);

  EffectiveModel eff;
  eff.params = p;
  eff.scalars = s;
  for (auto& l : eff.L_eff) l = ComplexMatrix(kGroundDim);

  auto& l1 = eff.L_eff[0];
  l1(kPsiPlus, k00) = cavity_pre * (c + f * sn) / dt1;
  l1(kPsiMinus, k00) = cavity_pre * (f * c - sn) / dt1;
  l1(k11, kPsiMinus) = cavity_pre * (c - f * sn) / dt2;
  l1(k11, kPsiPlus) = cavity_pre * (f * c + sn) / dt2;

  const Complex minus_branch2 = dt1 * c + g4 * f * sn;
  const Complex plus_branch2 = dt1 * sn - g4 * f * c;
  auto& l2 = eff.L_eff[1];
  l2(k00, k00) = pre0 * drive / dt1;
  l2(kPsiMinus, kPsiMinus) = pre0 * c * minus_branch2 / out_den;
  l2(kPsiPlus, kPsiMinus) = pre0 * sn * minus_branch2 / out_den;
  l2(kPsiPlus, kPsiPlus) = pre0 * sn * plus_branch2 / out_den;
  l2(kPsiMinus, kPsiPlus) = pre0 * c * plus_branch2 / out_den;

  const Complex minus_branch3 = dt1 * f * sn + g4 * c;
  const Complex plus_branch3 = dt1 * f * c - g4 * sn;
  auto& l3 = eff.L_eff[2];
  l3(k00, k00) = pre0 * drive * f / dt1;
  l3(kPsiMinus, kPsiMinus) = pre0 * sn * minus_branch3 / out_den;
  l3(kPsiPlus, kPsiMinus) = -pre0 * c * minus_branch3 / out_den;
  l3(kPsiPlus, kPsiPlus) = pre0 * c * plus_branch3 / out_den;
  l3(kPsiMinus, kPsiPlus) = -pre0 * sn * plus_branch3 / out_den;

  auto& l4 = eff.L_eff[3];
  l4(kPsiMinus, k00) = -pre1 * sn * drive / dt1;
  l4(kPsiPlus, k00) = pre1 * c * drive / dt1;
  l4(k11, kPsiMinus) = pre1 * minus_branch2 / out_den;
  l4(k11, kPsiPlus) = pre1 * plus_branch2 / out_den;

  auto& l5 = eff.L_eff[4];
  l5(kPsiMinus, k00) = pre1 * f * c * drive / dt1;
  l5(kPsiPlus, k00) = pre1 * f * sn * drive / dt1;
  l5(k11, kPsiMinus) = -pre1 * minus_branch3 / out_den;
  l5(k11, kPsiPlus) = pre1 * plus_branch3 / out_den;
  return eff;
}

}  // namespace bellprep
