#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "bellprep/effective.hpp"
#include "bellprep/system_model.hpp"

namespace bellprep {

enum class Target : std::size_t { Plus = 0, Minus = 1 };

/// Destinations of an outflow amplitude, in order psi+, psi-, 11.
enum class Destination : std::size_t { PsiPlus = 0, PsiMinus = 1, Eleven = 2 };

/**
 * Effective matrix elements rescaled by the intermediate propagators.
 *
 * Channels j = 1..5 are the effective jump operators, channel 6 is H_eff.
 * Inflow numerators are <psi_t|O_j|00> d~_1; outflow numerators are
 * <w|O_j|psi_s> d~_2. Outflow entries with w equal to the source are absent
 * for j <= 5 and present (energy shifts) for j = 6.
 */
struct ChannelAmplitudes {
  static constexpr std::size_t kChannels = 6;

  std::array<std::array<Complex, 2>, kChannels> numerator_in{};
  std::array<std::array<std::array<std::optional<Complex>, 3>, 2>, kChannels> numerator_out{};
  /// <psi_t|O_j|11>, unscaled.
  std::array<std::array<Complex, 2>, kChannels> from_eleven{};

  Complex in(std::size_t channel, Target t) const;
  std::optional<Complex> out(std::size_t channel, Target source, Destination w) const;
};

/// Requires m.H_eff.
ChannelAmplitudes channel_amplitudes(const EffectiveModel& m);

enum class Regime { Strong, Weak, Invalid };
const char* regime_name(Regime r);

struct RegimeThresholds {
  double ratio_strong = 2.0;
  double f_max = 2.0;
};

struct RegimeReport {
  double theta = 0.0;
  DrivingModulation modulation;
  Regime classification = Regime::Invalid;
  /// Inflow numerator of the cavity channel into the favoured target.
  Complex dominant_in_amplitude;
  double competitor_max = 0.0;
  /// |f(theta)|; infinite inside the pole window.
  double f_magnitude = 0.0;
};

/**
 * Compares the favoured inflow term against its competitors: |sec| against
 * |sin tan| and |sin| for Tan, |cosec| against |cos cot| and |cos| for
 * NegCot. Strong when the ratio reaches ratio_strong, Invalid when
 * |f| > f_max or theta sits in the pole window, Weak otherwise.
 * Throws std::invalid_argument for Fixed modulation.
 */
RegimeReport regime_classifier(const SystemParameters& p, RegimeThresholds thresholds = {});

/// Target favoured by the modulation and the angle at which it peaks.
Target favoured_target(const DrivingModulation& m);
double optimal_theta(const DrivingModulation& m);

struct DetuningReport {
  ScaledParameters engineered;
  /// Index n = 1, 2; index 0 is unused.
  std::array<Complex, 3> leading_order{};
  std::array<Complex, 3> exact{};
  std::array<Complex, 3> residual{};
};

/// Copy of s with tilde_Delta = 1 / tilde_delta. Requires tilde_delta > 0.
ScaledParameters engineer_detunings(const ScaledParameters& s);
/// Engineered parameters with 4 x^2 alpha^2 (n - tilde_delta tilde_Delta) next to exact d~_n.
DetuningReport detuning_report(const ScaledParameters& s);

/// g^2 / (kappa gamma); std::domain_error when kappa or gamma vanishes.
double cooperativity(const SystemParameters& p);

/// Reference overlays scaled by 1/5: (|sec|, |sin|, |tan|) for Tan,
/// (|cosec|, |cos|, |cot|) for NegCot. Throws for Fixed.
std::array<double, 3> reference_trig(const DrivingModulation& m, double theta);

}  // namespace bellprep
