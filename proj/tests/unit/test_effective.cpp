#include <cmath>
#include <numbers>
#include <random>

#include "bellprep/effective.hpp"
#include "bellprep/experiments.hpp"
#include "doctest.h"

using namespace bellprep;
using std::numbers::pi;

namespace {

SystemParameters nominal(double theta, DrivingModulation m = DrivingModulation::tan()) {
  return from_scaled(ScaledParameters{}, theta, m);
}

double largest(const std::array<ComplexMatrix, 5>& ms) {
  double m = 0.0;
  for (const auto& x : ms) m = std::max(m, x.max_abs());
  return m;
}

// Excited-space indices; the cavity block starts at 4.
constexpr std::size_t a0p = 0, a0m = 1, a1p = 2, a1m = 3, c00 = 4;
// Column of psic+ inside the 4x4 off-diagonal block.
constexpr std::size_t block_cp = 1;

}  // namespace

TEST_CASE("non-Hermitian Hamiltonian is complex symmetric with the expected diagonal") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemParameters p = random_parameters(rng);
    const ComplexMatrix h = build_H_NH(p);
    REQUIRE(h.dim() == kExcitedDim);
    CHECK(max_abs_diff(h, h.transpose()) <= 1e-15);
    const Complex atomic{p.Delta, -p.gamma / 2};
    for (std::size_t k : {a0p, a0m, a1p, a1m}) CHECK(std::abs(h(k, k) - atomic) <= 1e-15);
    CHECK(std::abs(h(c00, c00) - Complex{p.delta, -p.kappa / 2}) <= 1e-15);
  }
}

TEST_CASE("block inverse of a block-diagonal matrix") {
  ComplexMatrix h(kExcitedDim);
  const ComplexMatrix a{{2.0, 1.0, 0.0, 0.0}, {1.0, 3.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.5}, {0.0, 0.0, 0.0, 4.0}};
  const ComplexMatrix d = ComplexMatrix::diagonal({Complex{1.0, 1.0}, 2.0, Complex{0.0, -3.0}, 5.0});
  h.set_block(0, 0, a);
  h.set_block(4, 4, d);
  const PropagatorBlocks b = banachiewicz_invert(h);
  CHECK(max_abs_diff(b.A_hat, invert(a)) <= 1e-15);
  CHECK(max_abs_diff(b.D_hat, invert(d)) <= 1e-15);
  CHECK(b.B_hat.max_abs() == 0.0);
  CHECK(b.C_hat.max_abs() == 0.0);
}

TEST_CASE("block inverse names the singular block") {
  ComplexMatrix h(kExcitedDim);
  h.set_block(0, 4, ComplexMatrix::identity(4));
  h.set_block(4, 0, ComplexMatrix::identity(4));
  h.set_block(4, 4, ComplexMatrix::identity(4));
  try {
    banachiewicz_invert(h);
    FAIL("expected SingularBlockError");
  } catch (const SingularBlockError& e) {
    CHECK(e.block().find("leading") != std::string::npos);
  }

  h.set_block(0, 0, ComplexMatrix::identity(4));
  try {
    banachiewicz_invert(h);
    FAIL("expected SingularBlockError");
  } catch (const SingularBlockError& e) {
    CHECK(e.block().find("Schur") != std::string::npos);
  }
  CHECK_THROWS_AS(banachiewicz_invert(ComplexMatrix::identity(4)), DimensionError);
}

TEST_CASE("block inverse at the default parameters") {
  const ComplexMatrix h = build_H_NH(nominal(pi));
  const PropagatorBlocks b = banachiewicz_invert(h);
  const ComplexMatrix inv = b.assemble();
  CHECK((h * inv - ComplexMatrix::identity(kExcitedDim)).frobenius_norm() <= 1e-12);
  CHECK(max_abs_diff(b.C_hat, b.B_hat.transpose()) <= 1e-12);
  CHECK(max_abs_diff(inv, invert(h)) <= 1e-10 * inv.max_abs());
}

TEST_CASE("propagator scalars at the default parameters") {
  const PropagatorScalars s = propagator_scalars(nominal(pi));
  // (0.05 + 4i)(0.1 + 1i) + 4 = 0.005 + 0.45i.
  CHECK(std::abs(s.d_tilde[1] - Complex{0.005, 0.45}) <= 1e-14);
  CHECK(std::abs(s.d[1] - Complex{-0.00125, -0.1125}) <= 1e-14);
  CHECK(std::abs(s.d_tilde[2] - Complex{4.005, 0.45}) <= 1e-14);
  const double ratio = std::abs(s.d_tilde[2]) / std::abs(s.d_tilde[1]);
  CHECK(ratio == doctest::Approx(std::hypot(4.005, 0.45) / std::hypot(0.005, 0.45)).epsilon(1e-12));
  CHECK(ratio == doctest::Approx(8.9555).epsilon(1e-4));
}

TEST_CASE("propagator scalar identities hold for random parameters") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const SystemParameters p = random_parameters(rng);
    const PropagatorScalars s = propagator_scalars(p);
    for (int n = 0; n < 3; ++n) {
      CHECK(std::abs(-4.0 * s.d[n] - s.d_tilde[n]) <= 1e-12 * std::abs(s.d_tilde[n]));
      const Complex r = Complex{p.Delta, -p.gamma / 2} / s.d[n];
      CHECK(std::abs(s.R[n] - r) <= 1e-12 * std::abs(r));
    }
  }
}

TEST_CASE("degenerate propagator is reported") {
  SystemParameters p;
  p.g = 1.0;
  p.delta = 1.0;
  p.Delta = 1.0;
  CHECK_THROWS_AS(propagator_scalars(p), DegeneratePropagatorError);
}

TEST_CASE("closed-form blocks") {
  const SystemParameters p = nominal(2.0);
  const PropagatorScalars s = propagator_scalars(p);
  const PropagatorBlocks b = closed_form_blocks(p);
  CHECK(b.D_hat(0, 0) == s.R[0]);
  CHECK(std::abs(b.B_hat(a0p, block_cp) - (-p.g / s.d[1])) <= 1e-15 * std::abs(p.g / s.d[1]));

  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const SystemParameters q = random_parameters(rng);
    const ComplexMatrix closed = closed_form_blocks(q).assemble();
    const ComplexMatrix numeric = banachiewicz_invert(build_H_NH(q)).assemble();
    CHECK(max_abs_diff(closed, numeric) <= 1e-12 / std::abs(propagator_scalars(q).d[1]));
    CHECK(max_abs_diff(numeric, invert(build_H_NH(q))) <= 1e-10 * numeric.max_abs());
  }
}

TEST_CASE("effective operators annihilate |11> and H_eff is Hermitian") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const EffectiveModel m = derive_effective_model(random_parameters(rng));
    REQUIRE(m.H_eff.has_value());
    const ComplexMatrix& h = *m.H_eff;
    CHECK((h - h.adjoint()).frobenius_norm() <= 1e-12 * h.frobenius_norm());
    for (const auto& l : m.L_eff)
      for (std::size_t i = 0; i < kGroundDim; ++i) CHECK(l(i, k11) == Complex{});
    for (std::size_t i = 0; i < k11; ++i) {
      CHECK(std::abs(h(i, k11)) <= 1e-12 * h.max_abs());
      CHECK(std::abs(h(k11, i)) <= 1e-12 * h.max_abs());
    }
  }
}

TEST_CASE("the target is dark at theta = pi under tan driving") {
  const EffectiveModel m = derive_effective_model(nominal(pi));
  for (const auto& l : m.L_eff) {
    CHECK(std::abs(l(kPsiMinus, kPsiPlus)) <= 1e-12 * l.max_abs());
    CHECK(std::abs(l(k11, kPsiPlus)) <= 1e-12 * l.max_abs());
  }
}

TEST_CASE("cavity channel never feeds the suppressed target") {
  for (int k = 1; k < 40; ++k) {
    const double theta = 0.157 * k;
    if (pole_distance(DrivingModulation::tan(), theta) > 1e-3) {
      const ComplexMatrix l1 = closed_form_effective(nominal(theta)).L_eff[0];
      CHECK(std::abs(l1(kPsiMinus, k00)) <= 1e-14 * l1.max_abs());
    }
    if (pole_distance(DrivingModulation::neg_cot(), theta) > 1e-3) {
      const ComplexMatrix l1 = closed_form_effective(nominal(theta, DrivingModulation::neg_cot())).L_eff[0];
      CHECK(std::abs(l1(kPsiPlus, k00)) <= 1e-14 * l1.max_abs());
    }
  }
}

TEST_CASE("closed-form effective operators equal the numerical derivation") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 50; ++trial) {
    SystemParameters p = random_parameters(rng);
    if (trial % 4 == 0) p.branching_to_0 = 0.25;
    const EffectiveModel closed = closed_form_effective(p);
    const EffectiveModel numeric = derive_effective_model(p);
    CHECK_FALSE(closed.H_eff.has_value());
    const double scale = largest(numeric.L_eff);
    for (std::size_t k = 0; k < 5; ++k) CHECK(max_abs_diff(closed.L_eff[k], numeric.L_eff[k]) <= 1e-10 * scale);
  }
}

TEST_CASE("inflow into the target dominates outflow at the optimal angle") {
  for (const auto& [m, target] :
       {std::pair{DrivingModulation::tan(), kPsiPlus}, std::pair{DrivingModulation::neg_cot(), kPsiMinus}}) {
    const double theta = m.kind == DrivingModulation::Kind::Tan ? pi : pi / 2;
    const ComplexMatrix l1 = derive_effective_model(nominal(theta, m)).L_eff[0];
    const double in = std::abs(l1(target, k00));
    for (std::size_t w : {kPsiPlus, kPsiMinus, k11}) {
      if (w != target) CHECK(in > std::abs(l1(w, target)));
    }
  }
}

TEST_CASE("embedding places the excited block") {
  const ComplexMatrix e = embed_excited(ComplexMatrix::identity(kExcitedDim));
  CHECK(e.block(kAtomicBlockOffset, kAtomicBlockOffset, kExcitedDim) == ComplexMatrix::identity(kExcitedDim));
  CHECK(e.block(0, 0, kGroundDim).max_abs() == 0.0);
}
