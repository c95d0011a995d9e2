#include "bellprep/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace bellprep {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTraceLimit = 1e-6;
constexpr double kPositivityLimit = -1e-8;
constexpr double kNullspaceTolerance = 1e-10;
constexpr std::size_t kMaxSteadyStateDim = 20;

void check_generator_dims(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls) {
  for (const auto& l : Ls) {
    if (l.dim() != H.dim()) throw DimensionError("jump operator dimension differs from H");
  }
}

// Evaluates the dissipator through the non-Hermitian Hamiltonian
// H_nh = H - (i/2) sum L^dag L, so that every product has an operator on the
// left (structurally sparse for the jump operators).
class RhsKernel {
 public:
  RhsKernel(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls) : ls_(Ls.begin(), Ls.end()) {
    check_generator_dims(H, Ls);
    ComplexMatrix decay(H.dim());
    for (const auto& l : ls_) decay += l.adjoint() * l;
    h_nh_ = H - (0.5 * kI) * decay;
  }

  ComplexMatrix operator()(const ComplexMatrix& rho) const {
    if (rho.dim() != h_nh_.dim()) throw DimensionError("lindblad_rhs: rho dimension differs from H");
    const ComplexMatrix rho_dag = rho.adjoint();
    // -i (H_nh rho - rho H_nh^dag), with rho H_nh^dag = (H_nh rho^dag)^dag.
    ComplexMatrix out = (-kI) * (h_nh_ * rho - (h_nh_ * rho_dag).adjoint());
    for (const auto& l : ls_) out += l * (l * rho_dag).adjoint();
    return out;
  }

 private:
  std::vector<ComplexMatrix> ls_;
  ComplexMatrix h_nh_;
};

void matvec_into(const ComplexMatrix& a, std::span<const Complex> x, std::span<Complex> y) {
  const std::size_t n = a.dim();
  const Complex* row = a.entries().data();
  for (std::size_t i = 0; i < n; ++i, row += n) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      re += row[j].real() * x[j].real() - row[j].imag() * x[j].imag();
      im += row[j].real() * x[j].imag() + row[j].imag() * x[j].real();
    }
    y[i] = {re, im};
  }
}

Complex vec_trace(std::span<const Complex> v, std::size_t d) {
  Complex t{};
  for (std::size_t i = 0; i < d; ++i) t += v[i + d * i];
  return t;
}

bool single_excitation(std::size_t flat) {
  const std::size_t photons = flat % 2;
  const std::size_t a2 = (flat / 2) % 3;
  const std::size_t a1 = flat / 6;
  return (a1 == kLevelExcited) + (a2 == kLevelExcited) + photons <= 1;
}

class Recorder {
 public:
  Recorder(Trajectory& out, double theta) : out_(out), theta_(theta) {}

  void record(double t, const ComplexMatrix& rho) {
    const Diagnostics diag = density_diagnostics(rho);
    if (!rho.all_finite()) throw IntegratorError("non-finite density matrix at t = " + std::to_string(t));
    if (diag.trace_dev > kTraceLimit) {
      throw IntegratorError("trace deviation " + std::to_string(diag.trace_dev) + " at t = " +
                            std::to_string(t) + " (dt too large?)");
    }
    if (diag.min_eig < kPositivityLimit) {
      throw IntegratorError("density matrix lost positivity: min eigenvalue " +
                            std::to_string(diag.min_eig) + " at t = " + std::to_string(t));
    }
    out_.times.push_back(t);
    out_.populations.push_back(ground_populations(rho, theta_));
    out_.diagnostics.push_back(diag);
  }

 private:
  Trajectory& out_;
  double theta_;
};

void check_trace(Complex trace, double t) {
  const double dev = std::abs(trace - 1.0);
  if (!(dev <= kTraceLimit)) {
    throw IntegratorError("trace deviation " + std::to_string(dev) + " at t = " + std::to_string(t) +
                          " (dt too large?)");
  }
}

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.dim());
  Eigen::MatrixXcd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      r(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return r;
}

}  // namespace

double Generator::scale() const {
  double s = H.frobenius_norm();
  for (const auto& l : L) s += std::pow(l.frobenius_norm(), 2);
  return s;
}

Generator full_generator(const SystemParameters& p) {
  const OperatorSet ops = build_bare_operators(p);
  return {ops.hamiltonian(), {ops.L.begin(), ops.L.end()}};
}

Generator effective_generator(const EffectiveModel& m) {
  if (!m.H_eff) throw std::invalid_argument("effective_generator: model carries no H_eff");
  return {*m.H_eff, {m.L_eff.begin(), m.L_eff.end()}};
}

IntegratorConfig IntegratorConfig::defaults_for(double t_final) {
  IntegratorConfig c;
  c.t_final = t_final;
  if (t_final > 1000.0) {
    c.method = Method::PropagatorExp;
    c.dt = 1.0;
  } else {
    c.method = Method::RK4;
    c.dt = 0.01;
  }
  c.output_stride = 1;
  return c;
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be positive");
  if (!(t_final >= dt)) throw std::invalid_argument("IntegratorConfig: t_final must be >= dt");
  if (output_stride == 0) throw std::invalid_argument("IntegratorConfig: output_stride must be positive");
  const double ratio = t_final / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw std::invalid_argument("IntegratorConfig: t_final must be an integer multiple of dt");
  }
}

std::size_t IntegratorConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls,
                           const ComplexMatrix& rho) {
  return RhsKernel(H, Ls)(rho);
}

ComplexMatrix lindblad_rhs(const Generator& gen, const ComplexMatrix& rho) {
  return lindblad_rhs(gen.H, gen.L, rho);
}

ComplexMatrix liouvillian_matrix(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls) {
  check_generator_dims(H, Ls);
  const ComplexMatrix id = ComplexMatrix::identity(H.dim());
  ComplexMatrix out = (-kI) * (tensor_product(id, H) - tensor_product(H.transpose(), id));
  for (const auto& l : Ls) {
    const ComplexMatrix ll = l.adjoint() * l;
    out += tensor_product(l.conjugate(), l);
    out -= 0.5 * tensor_product(id, ll);
    out -= 0.5 * tensor_product(ll.transpose(), id);
  }
  return out;
}

ComplexMatrix liouvillian_matrix(const Generator& gen) { return liouvillian_matrix(gen.H, gen.L); }

StateVector vectorize(const ComplexMatrix& rho) {
  const std::size_t d = rho.dim();
  StateVector v(d * d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) v[i + d * j] = rho(i, j);
  return v;
}

ComplexMatrix unvectorize(const StateVector& v) {
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(v.dim()))));
  if (d * d != v.dim()) throw DimensionError("unvectorize: length is not a perfect square");
  ComplexMatrix rho(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) rho(i, j) = v[i + d * j];
  return rho;
}

Populations ground_populations(const ComplexMatrix& rho, double theta) {
  Populations p;
  if (rho.dim() == kGroundDim) {
    p.P00 = rho(k00, k00).real();
    p.Ppsi_plus = rho(kPsiPlus, kPsiPlus).real();
    p.Ppsi_minus = rho(kPsiMinus, kPsiMinus).real();
    p.P11 = rho(k11, k11).real();
    return p;
  }
  if (rho.dim() != kFullDim) {
    throw DimensionError("ground_populations: expected dimension 4 or 18, got " +
                         std::to_string(rho.dim()));
  }
  const BasisB basis = build_basis_B(theta);
  auto population = [&](std::size_t label) {
    return matrix_element(basis[label], rho, basis[label]).real();
  };
  p.P00 = population(k00);
  p.Ppsi_plus = population(kPsiPlus);
  p.Ppsi_minus = population(kPsiMinus);
  p.P11 = population(k11);
  // Summed directly; equals 1 - (single-excitation populations) at unit trace.
  double outside = 0.0;
  for (std::size_t k = 0; k < kFullDim; ++k)
    if (!single_excitation(k)) outside += rho(k, k).real();
  p.leakage = outside;
  return p;
}

Diagnostics density_diagnostics(const ComplexMatrix& rho) {
  Diagnostics d;
  d.trace_dev = std::abs(rho.trace() - 1.0);
  const ComplexMatrix rho_dag = rho.adjoint();
  d.herm_dev = (rho - rho_dag).frobenius_norm();
  d.min_eig = min_eigenvalue_hermitian(0.5 * (rho + rho_dag));
  return d;
}

Trajectory evolve(const Generator& gen, const DensityMatrix& rho0, const IntegratorConfig& config,
                  double theta) {
  config.validate();
  if (rho0.rho.dim() != gen.dim()) throw DimensionError("evolve: rho0 dimension differs from H");
  const std::size_t steps = config.steps();
  const std::size_t d = gen.dim();
  const double dt = config.dt;

  Trajectory traj;
  const std::size_t samples = steps / config.output_stride + 2;
  traj.times.reserve(samples);
  traj.populations.reserve(samples);
  traj.diagnostics.reserve(samples);
  Recorder recorder(traj, theta);
  recorder.record(rho0.time, rho0.rho);
  auto due = [&](std::size_t k) { return k % config.output_stride == 0 || k == steps; };
  auto time_at = [&](std::size_t k) { return rho0.time + static_cast<double>(k) * dt; };

  if (config.method == IntegratorConfig::Method::RK4) {
    const RhsKernel rhs(gen.H, gen.L);
    ComplexMatrix rho = rho0.rho;
    for (std::size_t k = 1; k <= steps; ++k) {
      const ComplexMatrix k1 = rhs(rho);
      const ComplexMatrix k2 = rhs(rho + (dt / 2) * k1);
      const ComplexMatrix k3 = rhs(rho + (dt / 2) * k2);
      const ComplexMatrix k4 = rhs(rho + dt * k3);
      rho += (dt / 6) * (k1 + 2.0 * (k2 + k3) + k4);
      check_trace(rho.trace(), time_at(k));
      if (due(k)) recorder.record(time_at(k), rho);
    }
    return traj;
  }

  const ComplexMatrix propagator = matrix_exponential(dt * liouvillian_matrix(gen));
  const StateVector v0 = vectorize(rho0.rho);
  std::vector<Complex> current(v0.amplitudes().begin(), v0.amplitudes().end());
  std::vector<Complex> next(current.size());
  for (std::size_t k = 1; k <= steps; ++k) {
    matvec_into(propagator, current, next);
    current.swap(next);
    check_trace(vec_trace(current, d), time_at(k));
    if (due(k)) recorder.record(time_at(k), unvectorize(StateVector(current)));
  }
  return traj;
}

Trajectory evolve(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls,
                  const DensityMatrix& rho0, const IntegratorConfig& config, double theta) {
  return evolve(Generator{H, {Ls.begin(), Ls.end()}}, rho0, config, theta);
}

SteadyStates steady_state(const ComplexMatrix& H, std::span<const ComplexMatrix> Ls) {
  if (H.dim() > kMaxSteadyStateDim) {
    throw DimensionError("steady_state: dense nullspace limited to dimension " +
                         std::to_string(kMaxSteadyStateDim));
  }
  const std::size_t d = H.dim();
  const Eigen::MatrixXcd lv = to_eigen(liouvillian_matrix(H, Ls));
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(lv, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double cutoff = kNullspaceTolerance * sigma(0);

  SteadyStates out;
  for (Eigen::Index k = sigma.size(); k-- > 0;) {
    if (sigma(k) > cutoff) break;
    StateVector v(d * d);
    for (std::size_t i = 0; i < d * d; ++i) v[i] = svd.matrixV()(static_cast<Eigen::Index>(i), k);
    const ComplexMatrix x = unvectorize(v);
    // The Liouvillian preserves Hermiticity, so X^dag is stationary as well.
    ComplexMatrix rep = 0.5 * (x + x.adjoint());
    if (rep.frobenius_norm() < 1e-8 * x.frobenius_norm()) rep = (-0.5 * kI) * (x - x.adjoint());
    const Complex tr = rep.trace();
    if (std::abs(tr) > 1e-10 * rep.frobenius_norm()) {
      rep *= 1.0 / tr;
      if (min_eigenvalue_hermitian(rep) >= kPositivityLimit) out.states.push_back({rep, 0.0});
    }
    out.basis.push_back(std::move(rep));
  }
  out.nullspace_dim = out.basis.size();
  if (out.nullspace_dim == 0) {
    throw NoStationaryStateError("steady_state: Liouvillian has no nullspace at tolerance " +
                                 std::to_string(kNullspaceTolerance));
  }
  return out;
}

SteadyStates steady_state(const Generator& gen) { return steady_state(gen.H, gen.L); }

}  // namespace bellprep
