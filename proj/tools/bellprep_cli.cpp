#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bellprep/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::string model;
  std::string modulation;
  std::string theta;
  double t_final = 0.0;
  double dt = 0.0;
  std::string method;
  std::size_t points = 0;
  std::string cooperativities;
  std::string out;
  std::size_t threads = 0;
  std::string initial;
  std::size_t stride = 0;
  std::uint64_t seed = 0;
  bool theta_sweep = false;
};

bellprep::RunConfig resolve_config(const CLI::App& app, const Flags& f) {
  using namespace bellprep;
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  auto given = [&app](const char* name) { return app.get_option(name)->count() > 0; };
  if (given("--model")) c.model = parse_model(f.model);
  if (given("--modulation")) {
    try {
      c.modulation = DrivingModulation::parse(f.modulation);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (given("--theta")) c.theta = parse_angle(f.theta);
  if (given("--T")) c.t_final = f.t_final;
  if (given("--dt")) c.dt = f.dt;
  if (given("--method")) c.method = parse_method(f.method);
  if (given("--points")) c.points = f.points;
  if (given("--C")) c.cooperativities = parse_number_list(f.cooperativities);
  if (given("--out")) c.output_path = f.out;
  if (given("--threads")) c.threads = f.threads;
  if (given("--initial")) c.initial = parse_initial(f.initial);
  if (given("--stride")) c.output_stride = f.stride;
  if (given("--seed")) c.seed = f.seed;
  if (f.theta_sweep) c.coop_theta_sweep = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-state preparation in a driven two-atom cavity: derivation, dynamics and sweeps"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--model", f.model, "full|effective");
  app.add_option("--modulation", f.modulation, "tan|negcot|fixed:VALUE");
  app.add_option("--theta", f.theta, "driving angle in rad (accepts pi, pi/2, 2pi/3)");
  app.add_option("--T", f.t_final, "final time in units of 1/g");
  app.add_option("--dt", f.dt, "integrator step");
  app.add_option("--method", f.method, "rk4|prop");
  app.add_option("--points", f.points, "theta grid size");
  app.add_option("--C", f.cooperativities, "comma-separated cooperativities");
  app.add_option("--out", f.out, "output path (default stdout)");
  app.add_option("--threads", f.threads, "sweep worker count");
  app.add_option("--initial", f.initial, "initial ground state 00|11");
  app.add_option("--stride", f.stride, "record every N integrator steps");
  app.add_option("--seed", f.seed, "seed for randomized validation draws");
  app.add_flag("--theta-sweep", f.theta_sweep, "sweep-coop: sweep theta at every C");

  for (const char* name : {"derive", "evolve", "sweep-theta", "sweep-coop", "validate"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("derive")->description("effective operators and cross-validation residuals as JSON");
  app.get_subcommand("evolve")->description("population trajectory as CSV");
  app.get_subcommand("sweep-theta")->description("final populations over a theta grid as CSV");
  app.get_subcommand("sweep-coop")->description("final populations over cooperativities as CSV");
  app.get_subcommand("validate")->description("run every consistency check and report residuals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? bellprep::kExitOk : bellprep::kExitUsage;
  }

  bellprep::RunConfig config;
  try {
    config = resolve_config(app, f);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return bellprep::kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (!config.output_path) return bellprep::run_command(command, config, std::cout, std::cerr);

  std::ofstream file(*config.output_path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open output file '" << *config.output_path << "'\n";
    return bellprep::kExitUsage;
  }
  const int code = bellprep::run_command(command, config, file, std::cerr);
  file.close();
  if (!file) {
    std::cerr << "error: failed writing '" << *config.output_path << "'\n";
    return bellprep::kExitUsage;
  }
  return code;
}
