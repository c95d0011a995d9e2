#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bellprep/dynamics.hpp"
#include "bellprep/effective.hpp"
#include "bellprep/protocol.hpp"
#include "bellprep/system_model.hpp"

namespace bellprep {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitIntegrator = 3,
};

/// Malformed configuration or command-line input.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { Full, Effective };
enum class InitialState { Ground00, Eleven };

/// Fully resolved run description. CLI flags override file values.
struct RunConfig {
  std::variant<ScaledParameters, SystemParameters> parameters = ScaledParameters{};
  DrivingModulation modulation = DrivingModulation::tan();
  /// Defaults to the angle favoured by the modulation (pi for a fixed one).
  std::optional<double> theta;
  double branching_to_0 = 0.5;

  ModelKind model = ModelKind::Effective;
  InitialState initial = InitialState::Ground00;
  double t_final = 15000.0;
  std::optional<IntegratorConfig::Method> method;
  std::optional<double> dt;
  /// Unset: about 1000 rows per trajectory.
  std::optional<std::size_t> output_stride;

  std::size_t points = 201;
  /// Explicit theta grid; replaces the default grid when present.
  std::optional<std::vector<double>> theta_grid;
  std::vector<double> cooperativities = {100.0, 200.0, 400.0, 800.0};
  /// sweep-coop sweeps theta at every C instead of holding theta fixed.
  bool coop_theta_sweep = false;

  std::optional<std::string> output_path;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  double resolved_theta() const;
  IntegratorConfig integrator() const;
  SystemParameters resolve(double theta) const;
  /// Same configuration with kappa chosen so that g^2 / (kappa gamma) = C.
  RunConfig with_cooperativity(double C) const;
};

/// Parses a JSON document with one of {"scaled": {...}} or {"absolute": {...}}.
RunConfig config_from_json(std::string_view text);
RunConfig load_config(const std::string& path);

/// "3.14", "pi", "-pi/3", "2pi/3", "2*pi/3".
double parse_angle(std::string_view text);
/// Comma-separated list of numbers.
std::vector<double> parse_number_list(std::string_view text);
ModelKind parse_model(std::string_view text);
IntegratorConfig::Method parse_method(std::string_view text);
InitialState parse_initial(std::string_view text);

/// Round-trip decimal form with 17 significant digits, independent of locale.
std::string format_double(double v);

/// Single header line starting with '#' that echoes every resolved parameter.
std::string parameter_echo(const RunConfig& config, const SystemParameters& p);

Generator model_generator(const SystemParameters& p, ModelKind model);
DensityMatrix initial_density(ModelKind model, InitialState initial);
Trajectory run_trajectory(const SystemParameters& p, ModelKind model, InitialState initial,
                          const IntegratorConfig& integrator);

/// Evenly spaced points over [0, 2 pi], dropping those within 0.02 rad of a pole.
std::vector<double> default_theta_grid(std::size_t points, const DrivingModulation& m);
inline constexpr double kSweepPoleWindow = 0.02;

struct SweepRow {
  std::optional<double> cooperativity;
  double theta = 0.0;
  Populations populations;
  double trace_dev = 0.0;
  double min_eig = 0.0;
  std::optional<Regime> regime;
  std::array<double, 3> reference{};
  std::optional<std::string> error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t warnings = 0;
};

/// Final-time populations at every grid point, in grid order.
SweepResult sweep_theta(const RunConfig& config, const std::vector<double>& grid);
SweepResult sweep_cooperativity(const RunConfig& config);

void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Uniform draw of physical parameters with all |d_n| bounded away from zero.
SystemParameters random_parameters(std::mt19937_64& rng);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidateOptions {
  std::function<EffectiveModel(const SystemParameters&)> closed_form = closed_form_effective;
  std::size_t draws = 50;
};

std::vector<CheckResult> run_validation(const RunConfig& config, const ValidateOptions& options = {});

int cmd_derive(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_evolve(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_sweep_theta(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_sweep_coop(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& log,
                 const ValidateOptions& options = {});

/// Dispatches by subcommand name and maps exceptions to exit codes.
int run_command(std::string_view name, const RunConfig& config, std::ostream& out, std::ostream& log);

}  // namespace bellprep
