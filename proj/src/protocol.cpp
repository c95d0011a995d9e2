#include "bellprep/protocol.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bellprep {

namespace {

constexpr std::array<std::size_t, 2> kTargetLabel = {kPsiPlus, kPsiMinus};
constexpr std::array<std::size_t, 3> kDestinationLabel = {kPsiPlus, kPsiMinus, k11};

void require_trig_modulation(const DrivingModulation& m, const char* where) {
  if (m.kind == DrivingModulation::Kind::Fixed) {
    throw std::invalid_argument(std::string(where) + ": requires tan or negcot modulation");
  }
}

}  // namespace

Complex ChannelAmplitudes::in(std::size_t channel, Target t) const {
  return numerator_in.at(channel - 1)[static_cast<std::size_t>(t)];
}

std::optional<Complex> ChannelAmplitudes::out(std::size_t channel, Target source,
                                              Destination w) const {
  return numerator_out.at(channel - 1)[static_cast<std::size_t>(source)][static_cast<std::size_t>(w)];
}

ChannelAmplitudes channel_amplitudes(const EffectiveModel& m) {
  if (!m.H_eff) throw std::invalid_argument("channel_amplitudes: model carries no H_eff");
  const Complex dt1 = m.scalars.d_tilde[1];
  const Complex dt2 = m.scalars.d_tilde[2];

  ChannelAmplitudes a;
  for (std::size_t j = 0; j < ChannelAmplitudes::kChannels; ++j) {
    const ComplexMatrix& op = j < m.L_eff.size() ? m.L_eff[j] : *m.H_eff;
    const bool shifts = j == m.L_eff.size();
    for (std::size_t t = 0; t < 2; ++t) {
      a.numerator_in[j][t] = op(kTargetLabel[t], k00) * dt1;
      a.from_eleven[j][t] = op(kTargetLabel[t], k11);
      for (std::size_t w = 0; w < 3; ++w) {
        if (kDestinationLabel[w] == kTargetLabel[t] && !shifts) continue;
        a.numerator_out[j][t][w] = op(kDestinationLabel[w], kTargetLabel[t]) * dt2;
      }
    }
  }
  return a;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Strong:
      return "strong";
    case Regime::Weak:
      return "weak";
    case Regime::Invalid:
      break;
  }
  return "invalid";
}

Target favoured_target(const DrivingModulation& m) {
  require_trig_modulation(m, "favoured_target");
  return m.kind == DrivingModulation::Kind::Tan ? Target::Plus : Target::Minus;
}

double optimal_theta(const DrivingModulation& m) {
  require_trig_modulation(m, "optimal_theta");
  return m.kind == DrivingModulation::Kind::Tan ? std::numbers::pi : std::numbers::pi / 2;
}

RegimeReport regime_classifier(const SystemParameters& p, RegimeThresholds thresholds) {
  require_trig_modulation(p.modulation, "regime_classifier");
  RegimeReport r;
  r.theta = p.theta;
  r.modulation = p.modulation;
  if (pole_distance(p.modulation, p.theta) < kPoleGuard) {
    r.f_magnitude = std::numeric_limits<double>::infinity();
    r.dominant_in_amplitude = std::numeric_limits<double>::quiet_NaN();
    r.competitor_max = std::numeric_limits<double>::quiet_NaN();
    r.classification = Regime::Invalid;
    return r;
  }
  r.f_magnitude = std::abs(p.f());

  const bool tan_kind = p.modulation.kind == DrivingModulation::Kind::Tan;
  // For NegCot the roles of sin and cos swap.
  const double lead = tan_kind ? std::cos(p.theta) : std::sin(p.theta);
  const double other = tan_kind ? std::sin(p.theta) : std::cos(p.theta);
  const double dominant = 1.0 / std::abs(lead);
  r.competitor_max = std::max(std::abs(other * other / lead), std::abs(other));

  const EffectiveModel cf = closed_form_effective(p);
  r.dominant_in_amplitude =
      cf.L_eff[0](kTargetLabel[static_cast<std::size_t>(favoured_target(p.modulation))], k00) *
      cf.scalars.d_tilde[1];

  if (r.f_magnitude > thresholds.f_max) {
    r.classification = Regime::Invalid;
  } else if (dominant >= thresholds.ratio_strong * r.competitor_max) {
    r.classification = Regime::Strong;
  } else {
    r.classification = Regime::Weak;
  }
  return r;
}

ScaledParameters engineer_detunings(const ScaledParameters& s) {
  if (!(s.tilde_delta > 0.0)) throw std::invalid_argument("engineer_detunings: tilde_delta must be positive");
  ScaledParameters out = s;
  out.tilde_Delta = 1.0 / s.tilde_delta;
  return out;
}

DetuningReport detuning_report(const ScaledParameters& s) {
  DetuningReport r;
  r.engineered = engineer_detunings(s);
  const ScaledParameters& e = r.engineered;
  const SystemParameters p = from_scaled(e, std::numbers::pi, DrivingModulation::tan());
  const PropagatorScalars scalars = propagator_scalars(p);
  const double scale = 4.0 * e.x * e.x * e.alpha * e.alpha;
  for (int n = 1; n <= 2; ++n) {
    r.leading_order[n] = scale * (n - e.tilde_delta * e.tilde_Delta);
    r.exact[n] = scalars.d_tilde[n];
    r.residual[n] = r.exact[n] - r.leading_order[n];
  }
  return r;
}

double cooperativity(const SystemParameters& p) {
  if (!(p.kappa > 0.0) || !(p.gamma > 0.0)) {
    throw std::domain_error("cooperativity: undefined for kappa = 0 or gamma = 0");
  }
  return p.g * p.g / (p.kappa * p.gamma);
}

std::array<double, 3> reference_trig(const DrivingModulation& m, double theta) {
  require_trig_modulation(m, "reference_trig");
  const bool tan_kind = m.kind == DrivingModulation::Kind::Tan;
  const double lead = tan_kind ? std::cos(theta) : std::sin(theta);
  const double other = tan_kind ? std::sin(theta) : std::cos(theta);
  return {std::abs(1.0 / lead) / 5.0, std::abs(other) / 5.0, std::abs(other / lead) / 5.0};
}

}  // namespace bellprep
