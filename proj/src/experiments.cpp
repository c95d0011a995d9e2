#include "bellprep/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace bellprep {

namespace {

using json = nlohmann::ordered_json;
using std::numbers::pi;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kResidualGate = 1e-8;
constexpr std::size_t kDefaultRows = 1000;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw UsageError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

const char* model_name(ModelKind m) { return m == ModelKind::Full ? "full" : "effective"; }
const char* method_name(IntegratorConfig::Method m) {
  return m == IntegratorConfig::Method::RK4 ? "rk4" : "prop";
}
const char* initial_name(InitialState s) { return s == InitialState::Ground00 ? "00" : "11"; }

// Reads only the listed keys and rejects anything else.
void read_object(const json& obj, std::string_view where,
                 std::initializer_list<std::pair<const char*, double*>> fields) {
  if (!obj.is_object()) throw UsageError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = std::find_if(fields.begin(), fields.end(),
                                 [&](const auto& f) { return key == f.first; });
    if (it == fields.end()) throw UsageError("unknown key '" + key + "' in " + std::string(where));
    if (!value.is_number()) throw UsageError(std::string(where) + "." + key + " must be a number");
    *it->second = value.get<double>();
  }
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json scalars_json(const std::array<Complex, 3>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(complex_json(z));
  return a;
}

double max_element(std::span<const ComplexMatrix> ms) {
  double m = 0.0;
  for (const auto& x : ms) m = std::max(m, x.max_abs());
  return m;
}

double relative_operator_residual(std::span<const ComplexMatrix> a, std::span<const ComplexMatrix> b) {
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, max_abs_diff(a[k], b[k]));
  return diff / max_element(b);
}

std::vector<ComplexMatrix> operator_list(const OperatorSet& ops) {
  std::vector<ComplexMatrix> v = {ops.H_e, ops.H_ac, ops.W_plus, ops.W_minus};
  v.insert(v.end(), ops.L.begin(), ops.L.end());
  return v;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; results land by index.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

SweepRow sweep_point(const RunConfig& config, double theta, std::optional<double> C) {
  SweepRow row;
  row.cooperativity = C;
  row.theta = theta;
  const bool trig = config.modulation.kind != DrivingModulation::Kind::Fixed;
  row.reference = trig ? reference_trig(config.modulation, theta)
                       : std::array<double, 3>{kNaN, kNaN, kNaN};
  try {
    const SystemParameters p = config.resolve(theta);
    if (trig) row.regime = regime_classifier(p).classification;
    IntegratorConfig ic = config.integrator();
    ic.output_stride = ic.steps();
    const Trajectory traj = run_trajectory(p, config.model, config.initial, ic);
    row.populations = traj.populations.back();
    row.trace_dev = traj.diagnostics.back().trace_dev;
    row.min_eig = traj.diagnostics.back().min_eig;
  } catch (const std::exception& e) {
    row.populations = {kNaN, kNaN, kNaN, kNaN, std::nullopt};
    row.trace_dev = kNaN;
    row.min_eig = kNaN;
    row.error = e.what();
  }
  return row;
}

SweepResult run_sweep(const std::vector<std::pair<RunConfig, std::optional<double>>>& settings,
                      const std::vector<double>& grid, std::size_t threads) {
  const std::size_t n = settings.size() * grid.size();
  SweepResult result;
  result.rows.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& [config, C] = settings[i / grid.size()];
    result.rows[i] = sweep_point(config, grid[i % grid.size()], C);
  });
  result.warnings = static_cast<std::size_t>(
      std::count_if(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return r.error.has_value(); }));
  return result;
}

void report_warnings(const SweepResult& r, std::ostream& log) {
  if (r.warnings == 0) return;
  log << "warning: " << r.warnings << " sweep point(s) failed and were written as NaN rows\n";
  for (const auto& row : r.rows) {
    if (row.error) log << "  theta=" << format_double(row.theta) << ": " << *row.error << "\n";
  }
}

std::vector<double> resolved_grid(const RunConfig& config) {
  return config.theta_grid ? *config.theta_grid : default_theta_grid(config.points, config.modulation);
}

void check_increasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw UsageError(std::string(what) + " must be strictly increasing");
  }
}

CheckResult make_check(std::string name, double residual, double tolerance) {
  const bool passed = std::isfinite(residual) && residual <= tolerance;
  return {std::move(name), residual, tolerance, passed};
}

// Integration check that keeps integrator failures inside the report.
template <typename Fn>
CheckResult guarded_check(std::string name, double tolerance, Fn fn) {
  try {
    return make_check(name, fn(), tolerance);
  } catch (const std::exception&) {
    return {name, kNaN, tolerance, false};
  }
}

double max_population_gap(const Populations& a, const Populations& b) {
  return std::max({std::abs(a.P00 - b.P00), std::abs(a.Ppsi_plus - b.Ppsi_plus),
                   std::abs(a.Ppsi_minus - b.Ppsi_minus), std::abs(a.P11 - b.P11)});
}

}  // namespace

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
  if (const auto* s = std::get_if<ScaledParameters>(&parameters)) {
    s->validate();
  } else {
    SystemParameters p = std::get<SystemParameters>(parameters);
    p.branching_to_0 = branching_to_0;
    p.validate();
  }
  if (!(branching_to_0 >= 0.0 && branching_to_0 <= 1.0))
    throw UsageError("branching_to_0 must lie in [0, 1]");
  if (points < 2) throw UsageError("points must be at least 2");
  if (threads == 0) throw UsageError("threads must be positive");
  if (output_stride && *output_stride == 0) throw UsageError("output_stride must be positive");
  if (theta && !std::isfinite(*theta)) throw UsageError("theta must be finite");
  if (theta_grid) {
    if (theta_grid->empty()) throw UsageError("theta grid is empty");
    check_increasing(*theta_grid, "theta grid");
    if (theta_grid->front() < 0.0 || theta_grid->back() > 2 * pi)
      throw UsageError("theta grid must lie in [0, 2 pi]");
  }
  if (cooperativities.empty()) throw UsageError("cooperativity list is empty");
  check_increasing(cooperativities, "cooperativity list");
  if (!(cooperativities.front() > 0.0)) throw UsageError("cooperativities must be positive");
  try {
    integrator().validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

double RunConfig::resolved_theta() const {
  if (theta) return *theta;
  return modulation.kind == DrivingModulation::Kind::Fixed ? pi : optimal_theta(modulation);
}

IntegratorConfig RunConfig::integrator() const {
  IntegratorConfig ic = IntegratorConfig::defaults_for(t_final);
  if (method) {
    ic.method = *method;
    ic.dt = *method == IntegratorConfig::Method::RK4 ? 0.01 : 1.0;
  }
  if (dt) ic.dt = *dt;
  if (output_stride) {
    ic.output_stride = *output_stride;
  } else if (ic.dt > 0.0) {
    ic.output_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t_final / ic.dt)) / kDefaultRows);
  }
  return ic;
}

SystemParameters RunConfig::resolve(double th) const {
  SystemParameters p;
  if (const auto* s = std::get_if<ScaledParameters>(&parameters)) {
    p = from_scaled(*s, th, modulation);
  } else {
    p = std::get<SystemParameters>(parameters);
    p.theta = th;
    p.modulation = modulation;
  }
  p.branching_to_0 = branching_to_0;
  p.validate();
  return p;
}

RunConfig RunConfig::with_cooperativity(double C) const {
  if (!(C > 0.0)) throw UsageError("cooperativity must be positive");
  RunConfig out = *this;
  if (auto* s = std::get_if<ScaledParameters>(&out.parameters)) {
    if (!(s->tilde_gamma > 0.0)) throw UsageError("cooperativity sweep needs tilde_gamma > 0");
    // C = alpha^2 / (tilde_kappa tilde_gamma) at fixed tilde_gamma.
    s->tilde_kappa = s->alpha * s->alpha / (C * s->tilde_gamma);
  } else {
    auto& p = std::get<SystemParameters>(out.parameters);
    if (!(p.gamma > 0.0)) throw UsageError("cooperativity sweep needs gamma > 0");
    p.kappa = p.g * p.g / (C * p.gamma);
  }
  return out;
}

RunConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("invalid JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  if (doc.contains("scaled") && doc.contains("absolute"))
    throw UsageError("config must contain exactly one of 'scaled' and 'absolute'");

  RunConfig c;
  auto string_of = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw UsageError("'" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto number_of = [](const json& v, const std::string& key) {
    if (v.is_string()) return parse_angle(v.get<std::string>());
    if (!v.is_number()) throw UsageError("'" + key + "' must be a number");
    return v.get<double>();
  };
  auto count_of = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw UsageError("'" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  };
  auto list_of = [&](const json& v, const std::string& key) {
    if (!v.is_array()) throw UsageError("'" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number_of(x, key));
    return out;
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "scaled") {
      ScaledParameters s;
      read_object(value, "scaled",
                  {{"alpha", &s.alpha},
                   {"x", &s.x},
                   {"tilde_delta", &s.tilde_delta},
                   {"tilde_Delta", &s.tilde_Delta},
                   {"tilde_kappa", &s.tilde_kappa},
                   {"tilde_gamma", &s.tilde_gamma},
                   {"tilde_Omega", &s.tilde_Omega}});
      c.parameters = s;
    } else if (key == "absolute") {
      SystemParameters p;
      read_object(value, "absolute",
                  {{"g", &p.g},
                   {"delta", &p.delta},
                   {"Delta", &p.Delta},
                   {"kappa", &p.kappa},
                   {"gamma", &p.gamma},
                   {"Omega", &p.Omega}});
      c.parameters = p;
    } else if (key == "model") {
      c.model = parse_model(string_of(value, key));
    } else if (key == "modulation") {
      try {
        c.modulation = DrivingModulation::parse(string_of(value, key));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    } else if (key == "theta") {
      c.theta = number_of(value, key);
    } else if (key == "branching_to_0") {
      c.branching_to_0 = number_of(value, key);
    } else if (key == "T") {
      c.t_final = number_of(value, key);
    } else if (key == "dt") {
      c.dt = number_of(value, key);
    } else if (key == "method") {
      c.method = parse_method(string_of(value, key));
    } else if (key == "output_stride") {
      c.output_stride = count_of(value, key);
    } else if (key == "initial") {
      c.initial = parse_initial(string_of(value, key));
    } else if (key == "points") {
      c.points = count_of(value, key);
    } else if (key == "grid") {
      c.theta_grid = list_of(value, key);
    } else if (key == "C") {
      c.cooperativities = value.is_array() ? list_of(value, key) : std::vector<double>{number_of(value, key)};
    } else if (key == "theta_sweep") {
      if (!value.is_boolean()) throw UsageError("'theta_sweep' must be a boolean");
      c.coop_theta_sweep = value.get<bool>();
    } else if (key == "threads") {
      c.threads = count_of(value, key);
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw UsageError("'seed' must be a non-negative integer");
      c.seed = value.get<std::uint64_t>();
    } else if (key == "out") {
      c.output_path = string_of(value, key);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

double parse_angle(std::string_view text) {
  text = trim(text);
  const auto at = text.find("pi");
  if (at == std::string_view::npos) return parse_number(text, "angle");

  std::string_view factor = trim(text.substr(0, at));
  if (!factor.empty() && factor.back() == '*') factor = trim(factor.substr(0, factor.size() - 1));
  double value = pi;
  if (factor == "-") {
    value = -pi;
  } else if (!factor.empty() && factor != "+") {
    value = parse_number(factor, "angle factor") * pi;
  }
  std::string_view rest = trim(text.substr(at + 2));
  if (!rest.empty()) {
    if (rest.front() != '/') throw UsageError("cannot parse angle from '" + std::string(text) + "'");
    const double den = parse_number(rest.substr(1), "angle divisor");
    if (den == 0.0) throw UsageError("angle divisor must be nonzero");
    value /= den;
  }
  return value;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_number(text.substr(0, comma), "number list entry"));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

ModelKind parse_model(std::string_view text) {
  if (text == "full") return ModelKind::Full;
  if (text == "effective") return ModelKind::Effective;
  throw UsageError("model must be 'full' or 'effective', got '" + std::string(text) + "'");
}

IntegratorConfig::Method parse_method(std::string_view text) {
  if (text == "rk4") return IntegratorConfig::Method::RK4;
  if (text == "prop") return IntegratorConfig::Method::PropagatorExp;
  throw UsageError("method must be 'rk4' or 'prop', got '" + std::string(text) + "'");
}

InitialState parse_initial(std::string_view text) {
  if (text == "00") return InitialState::Ground00;
  if (text == "11") return InitialState::Eleven;
  throw UsageError("initial state must be '00' or '11', got '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string parameter_echo(const RunConfig& config, const SystemParameters& p) {
  const IntegratorConfig ic = config.integrator();
  std::ostringstream os;
  auto kv = [&os](const char* k, double v) { os << ' ' << k << '=' << format_double(v); };
  os << "# model=" << model_name(config.model) << " modulation=" << p.modulation.name()
     << " initial=" << initial_name(config.initial) << " method=" << method_name(ic.method);
  kv("T", ic.t_final);
  kv("dt", ic.dt);
  kv("theta", p.theta);
  kv("g", p.g);
  kv("delta", p.delta);
  kv("Delta", p.Delta);
  kv("kappa", p.kappa);
  kv("gamma", p.gamma);
  kv("Omega", p.Omega);
  kv("branching_to_0", p.branching_to_0);
  kv("C", p.kappa > 0.0 && p.gamma > 0.0 ? cooperativity(p) : kNaN);
  if (const auto* s = std::get_if<ScaledParameters>(&config.parameters)) {
    kv("alpha", s->alpha);
    kv("x", s->x);
    kv("tilde_delta", s->tilde_delta);
    kv("tilde_Delta", s->tilde_Delta);
    kv("tilde_kappa", s->tilde_kappa);
    kv("tilde_gamma", s->tilde_gamma);
    kv("tilde_Omega", s->tilde_Omega);
  }
  return os.str();
}

// ---------------------------------------------------------------- runs

Generator model_generator(const SystemParameters& p, ModelKind model) {
  return model == ModelKind::Full ? full_generator(p) : effective_generator(derive_effective_model(p));
}

DensityMatrix initial_density(ModelKind model, InitialState initial) {
  const std::size_t level = initial == InitialState::Ground00 ? 0 : 1;
  if (model == ModelKind::Full)
    return DensityMatrix::pure(StateVector::unit(kFullDim, product_index(level, level, 0)));
  return DensityMatrix::pure(StateVector::unit(kGroundDim, level == 0 ? k00 : k11));
}

Trajectory run_trajectory(const SystemParameters& p, ModelKind model, InitialState initial,
                          const IntegratorConfig& integrator) {
  return evolve(model_generator(p, model), initial_density(model, initial), integrator, p.theta);
}

std::vector<double> default_theta_grid(std::size_t points, const DrivingModulation& m) {
  if (points < 2) throw UsageError("theta grid needs at least 2 points");
  std::vector<double> grid;
  grid.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double theta = 2 * pi * static_cast<double>(k) / static_cast<double>(points - 1);
    if (pole_distance(m, theta) > kSweepPoleWindow) grid.push_back(theta);
  }
  return grid;
}

SweepResult sweep_theta(const RunConfig& config, const std::vector<double>& grid) {
  return run_sweep({{config, std::nullopt}}, grid, config.threads);
}

SweepResult sweep_cooperativity(const RunConfig& config) {
  std::vector<std::pair<RunConfig, std::optional<double>>> settings;
  for (double C : config.cooperativities) settings.emplace_back(config.with_cooperativity(C), C);
  const std::vector<double> grid =
      config.coop_theta_sweep ? resolved_grid(config) : std::vector<double>{config.resolved_theta()};
  return run_sweep(settings, grid, config.threads);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const bool coop = !result.rows.empty() && result.rows.front().cooperativity.has_value();
  if (coop) out << "C,";
  out << "theta,P00,Ppsi_plus,Ppsi_minus,P11,trace_dev,min_eig,regime,ref_g,ref_h,ref_j\n";
  for (const auto& r : result.rows) {
    if (coop) out << format_double(*r.cooperativity) << ',';
    out << format_double(r.theta) << ',' << format_double(r.populations.P00) << ','
        << format_double(r.populations.Ppsi_plus) << ',' << format_double(r.populations.Ppsi_minus)
        << ',' << format_double(r.populations.P11) << ',' << format_double(r.trace_dev) << ','
        << format_double(r.min_eig) << ',' << (r.regime ? regime_name(*r.regime) : "none") << ','
        << format_double(r.reference[0]) << ',' << format_double(r.reference[1]) << ','
        << format_double(r.reference[2]) << '\n';
  }
}

SystemParameters random_parameters(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  while (true) {
    SystemParameters p;
    p.g = between(0.5, 2.0);
    p.delta = between(-3.0, 3.0);
    p.Delta = between(-3.0, 3.0);
    p.kappa = between(0.01, 1.0);
    p.gamma = between(0.01, 1.0);
    p.Omega = between(1e-3, 0.1);
    const double pick = unit(rng);
    p.modulation = pick < 1.0 / 3   ? DrivingModulation::tan()
                   : pick < 2.0 / 3 ? DrivingModulation::neg_cot()
                                    : DrivingModulation::fixed(between(-2.0, 2.0));
    do {
      p.theta = between(0.0, 2 * pi);
    } while (pole_distance(p.modulation, p.theta) < 0.05);

    const Complex base = Complex{p.Delta, -p.gamma / 2} * Complex{p.delta, -p.kappa / 2};
    bool conditioned = true;
    for (int n = 0; n < 3; ++n) conditioned &= std::abs(base - static_cast<double>(n) * p.g * p.g) > 0.05 * p.g * p.g;
    if (conditioned) return p;
  }
}

// ---------------------------------------------------------------- validation

std::vector<CheckResult> run_validation(const RunConfig& config, const ValidateOptions& options) {
  std::mt19937_64 rng(config.seed);
  std::vector<SystemParameters> draws;
  for (std::size_t i = 0; i < options.draws; ++i) draws.push_back(random_parameters(rng));

  std::vector<CheckResult> checks;
  double scalar = 0.0, projection = 0.0, identity = 0.0, blocks = 0.0, symmetric = 0.0, direct = 0.0;
  double closed = 0.0, eleven = 0.0, h_eleven = 0.0, dark_full = 0.0;
  for (const auto& p : draws) {
    const PropagatorScalars s = propagator_scalars(p);
    for (int n = 0; n < 3; ++n)
      scalar = std::max(scalar, std::abs(-4.0 * s.d[n] - s.d_tilde[n]) / std::abs(s.d_tilde[n]));

    const OperatorSet bare = build_bare_operators(p);
    const auto projected = operator_list(project_to_B(bare, build_basis_B(p.theta)));
    projection = std::max(projection, relative_operator_residual(operator_list(appendix_operators(p)), projected));

    const ComplexMatrix h = build_H_NH(p);
    const ComplexMatrix inv = banachiewicz_invert(h).assemble();
    const PropagatorBlocks b = banachiewicz_invert(h);
    identity = std::max(identity, (h * inv - ComplexMatrix::identity(kExcitedDim)).frobenius_norm());
    blocks = std::max(blocks, max_abs_diff(closed_form_blocks(p).assemble(), inv) * std::abs(s.d[1]));
    symmetric = std::max(symmetric, max_abs_diff(b.C_hat, b.B_hat.transpose()));
    direct = std::max(direct, max_abs_diff(invert(h), inv) * std::abs(s.d[1]));

    const EffectiveModel numeric = derive_effective_model(p);
    closed = std::max(closed, relative_operator_residual(options.closed_form(p).L_eff, numeric.L_eff));
    for (const auto& l : numeric.L_eff)
      for (std::size_t i = 0; i < kGroundDim; ++i) eleven = std::max(eleven, std::abs(l(i, k11)));
    for (std::size_t i = 0; i < kGroundDim; ++i) {
      if (i == k11) continue;
      h_eleven = std::max({h_eleven, std::abs((*numeric.H_eff)(i, k11)), std::abs((*numeric.H_eff)(k11, i))});
    }

    const Generator full = full_generator(p);
    const ComplexMatrix dark = StateVector::unit(kFullDim, product_index(1, 1, 0)).projector();
    dark_full = std::max(dark_full, lindblad_rhs(full, dark).frobenius_norm() / full.scale());
  }
  checks.push_back(make_check("scalar_identity", scalar, 1e-12));
  checks.push_back(make_check("closed_form_operators", projection, 1e-12));
  checks.push_back(make_check("inverse_identity", identity, 1e-12));
  checks.push_back(make_check("closed_form_blocks", blocks, 1e-10));
  checks.push_back(make_check("block_symmetry", symmetric, 1e-12));
  checks.push_back(make_check("block_vs_direct_inverse", direct, 1e-10));
  checks.push_back(make_check("closed_form_effective", closed, 1e-10));
  checks.push_back(make_check("eleven_column_zero", eleven, 0.0));
  checks.push_back(make_check("eleven_hamiltonian_coupling", h_eleven, 1e-12));
  checks.push_back(make_check("dark_state_full", dark_full, 1e-14));

  double selection = 0.0;
  for (const auto m : {DrivingModulation::tan(), DrivingModulation::neg_cot()}) {
    RunConfig c = config;
    c.modulation = m;
    const std::size_t suppressed = m.kind == DrivingModulation::Kind::Tan ? kPsiMinus : kPsiPlus;
    for (double theta : default_theta_grid(201, m)) {
      const ComplexMatrix l1 = derive_effective_model(c.resolve(theta)).L_eff[0];
      selection = std::max(selection, std::abs(l1(suppressed, k00)) / l1.max_abs());
    }
  }
  checks.push_back(make_check("selection_rule_zeros", selection, 1e-14));

  RunConfig base = config;
  base.modulation = DrivingModulation::tan();
  const SystemParameters p_opt = base.resolve(pi);
  const Generator eff = effective_generator(derive_effective_model(p_opt));
  const double dark_eff =
      std::max(lindblad_rhs(eff, StateVector::unit(kGroundDim, k11).projector()).frobenius_norm(),
               lindblad_rhs(eff, StateVector::unit(kGroundDim, kPsiPlus).projector()).frobenius_norm()) /
      eff.scale();
  checks.push_back(make_check("dark_states_effective", dark_eff, 1e-14));

  checks.push_back(guarded_check("rk4_vs_propagator", 1e-8, [&] {
    IntegratorConfig rk{IntegratorConfig::Method::RK4, 0.005, 20.0, 200};
    IntegratorConfig prop{IntegratorConfig::Method::PropagatorExp, 1.0, 20.0, 1};
    const Trajectory a = run_trajectory(p_opt, ModelKind::Full, InitialState::Ground00, rk);
    const Trajectory b = run_trajectory(p_opt, ModelKind::Full, InitialState::Ground00, prop);
    double gap = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
      gap = std::max(gap, max_population_gap(a.populations[k], b.populations[k]));
    return a.size() == b.size() ? gap : kNaN;
  }));

  IntegratorConfig gate{IntegratorConfig::Method::PropagatorExp, 1.0, 5000.0, 10};
  std::optional<Trajectory> gate_run;
  try {
    gate_run = run_trajectory(p_opt, ModelKind::Effective, InitialState::Ground00, gate);
  } catch (const std::exception&) {
  }
  double trace_dev = kNaN, negativity = kNaN;
  if (gate_run) {
    trace_dev = 0.0;
    negativity = 0.0;
    for (const auto& d : gate_run->diagnostics) {
      trace_dev = std::max(trace_dev, d.trace_dev);
      negativity = std::max(negativity, -d.min_eig);
    }
  }
  checks.push_back(make_check("trace_preservation", trace_dev, 1e-9));
  checks.push_back(make_check("positivity", negativity, 1e-8));
  return checks;
}

// ---------------------------------------------------------------- commands

int cmd_derive(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const SystemParameters p = config.resolve(config.resolved_theta());
  const EffectiveModel numeric = derive_effective_model(p);
  const EffectiveModel closed = closed_form_effective(p);
  const ComplexMatrix h = build_H_NH(p);
  const ComplexMatrix inv = banachiewicz_invert(h).assemble();

  json residuals;
  residuals["closed_form_effective"] = relative_operator_residual(closed.L_eff, numeric.L_eff);
  residuals["closed_form_blocks"] = max_abs_diff(closed_form_blocks(p).assemble(), inv) * std::abs(numeric.scalars.d[1]);
  residuals["inverse_identity"] = (h * inv - ComplexMatrix::identity(kExcitedDim)).frobenius_norm();
  residuals["H_eff_hermiticity"] =
      (*numeric.H_eff - numeric.H_eff->adjoint()).frobenius_norm() / numeric.H_eff->frobenius_norm();
  double worst = 0.0;
  for (const auto& [name, value] : residuals.items()) worst = std::max(worst, value.get<double>());
  const bool ok = worst <= kResidualGate;

  json doc;
  doc["header"] = parameter_echo(config, p);
  doc["parameters"] = {{"g", p.g},         {"delta", p.delta},   {"Delta", p.Delta},
                       {"kappa", p.kappa}, {"gamma", p.gamma},   {"Omega", p.Omega},
                       {"theta", p.theta}, {"f", p.f()},         {"modulation", p.modulation.name()},
                       {"branching_to_0", p.branching_to_0}};
  doc["basis"] = json::array({kBasisLabels[k00], kBasisLabels[kPsiPlus], kBasisLabels[kPsiMinus], kBasisLabels[k11]});
  doc["H_eff"] = matrix_json(*numeric.H_eff);
  json l_eff;
  for (std::size_t k = 0; k < numeric.L_eff.size(); ++k) l_eff["L" + std::to_string(k + 1)] = matrix_json(numeric.L_eff[k]);
  doc["L_eff"] = std::move(l_eff);
  doc["scalars"] = {{"d", scalars_json(numeric.scalars.d)},
                    {"d_tilde", scalars_json(numeric.scalars.d_tilde)},
                    {"R", scalars_json(numeric.scalars.R)}};
  doc["residuals"] = residuals;
  doc["status"] = ok ? "ok" : "fail";
  out << doc.dump(2) << '\n';
  if (!ok) {
    log << "derive: cross-validation residual " << format_double(worst) << " exceeds "
        << format_double(kResidualGate) << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_evolve(const RunConfig& config, std::ostream& out, std::ostream&) {
  const SystemParameters p = config.resolve(config.resolved_theta());
  const Trajectory traj = run_trajectory(p, config.model, config.initial, config.integrator());
  const bool full = config.model == ModelKind::Full;
  out << parameter_echo(config, p) << '\n';
  out << "t,P00,Ppsi_plus,Ppsi_minus,P11,trace_dev,herm_dev,min_eig" << (full ? ",leakage" : "") << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Populations& q = traj.populations[k];
    const Diagnostics& d = traj.diagnostics[k];
    out << format_double(traj.times[k]) << ',' << format_double(q.P00) << ','
        << format_double(q.Ppsi_plus) << ',' << format_double(q.Ppsi_minus) << ','
        << format_double(q.P11) << ',' << format_double(d.trace_dev) << ','
        << format_double(d.herm_dev) << ',' << format_double(d.min_eig);
    if (full) out << ',' << format_double(q.leakage.value_or(kNaN));
    out << '\n';
  }
  return kExitOk;
}

int cmd_sweep_theta(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const std::vector<double> grid = resolved_grid(config);
  const SweepResult result = sweep_theta(config, grid);
  out << parameter_echo(config, config.resolve(grid.front())) << " sweep=theta points="
      << grid.size() << '\n';
  write_sweep_csv(out, result);
  report_warnings(result, log);
  return kExitOk;
}

int cmd_sweep_coop(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const SweepResult result = sweep_cooperativity(config);
  for (double C : config.cooperativities) {
    const RunConfig c = config.with_cooperativity(C);
    out << parameter_echo(c, c.resolve(c.resolved_theta())) << '\n';
  }
  write_sweep_csv(out, result);
  report_warnings(result, log);
  return kExitOk;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream&, const ValidateOptions& options) {
  const SystemParameters p = config.resolve(config.resolved_theta());
  out << parameter_echo(config, p) << '\n';
  const PropagatorScalars s = propagator_scalars(p);
  out << "info propagator_ratio |d_tilde_2/d_tilde_1|=" << format_double(std::abs(s.d_tilde[2] / s.d_tilde[1]))
      << '\n';
  const std::vector<CheckResult> checks = run_validation(config, options);
  bool all = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " residual=" << format_double(c.residual)
        << " tolerance=" << format_double(c.tolerance) << '\n';
    all &= c.passed;
  }
  return all ? kExitOk : kExitValidation;
}

int run_command(std::string_view name, const RunConfig& config, std::ostream& out, std::ostream& log) {
  try {
    config.validate();
    if (name == "derive") return cmd_derive(config, out, log);
    if (name == "evolve") return cmd_evolve(config, out, log);
    if (name == "sweep-theta") return cmd_sweep_theta(config, out, log);
    if (name == "sweep-coop") return cmd_sweep_coop(config, out, log);
    if (name == "validate") return cmd_validate(config, out, log);
    log << "error: unknown command '" << name << "'\n";
    return kExitUsage;
  } catch (const IntegratorError& e) {
    log << "integrator error: " << e.what() << '\n';
    return kExitIntegrator;
  } catch (const UsageError& e) {
    log << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PoleError& e) {
    log << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    log << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "numerical error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace bellprep
