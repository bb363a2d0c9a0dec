#include "rab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "rab/error.hpp"

namespace rab::experiments {

namespace {

using std::numbers::pi;
using std::numbers::sqrt2;
using model::SchemeId;
using model::SchemeSpec;

constexpr double kTwoPi = 2.0 * pi;

void merge(dynamics::Diagnostics& into, const dynamics::Diagnostics& d) {
  into.max_trace_drift = std::max(into.max_trace_drift, d.max_trace_drift);
  into.max_hermiticity = std::max(into.max_hermiticity, d.max_hermiticity);
  into.min_eigenvalue = std::min(into.min_eigenvalue, d.min_eigenvalue);
  into.max_norm_drift = std::max(into.max_norm_drift, d.max_norm_drift);
  into.refinements += d.refinements;
  if (d.dt > 0.0 && (into.dt == 0.0 || d.dt < into.dt)) into.dt = d.dt;
}

std::vector<std::size_t> indices_with(const SchemeSpec& s, int excitations) {
  const Basis b = s.basis();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (s.excitations(b[i]) == excitations) out.push_back(i);
  return out;
}

const model::DecayRates& forster_rates() {
  static const auto r = model::DecayRates::from_lifetimes_ms({{"p", 0.53}, {"d", 0.22}, {"f", 0.13}});
  return r;
}

const model::DecayRates& vdw_rates() {
  static const auto r = model::DecayRates::from_lifetimes_ms({{"d", 0.22}});
  return r;
}

// Ket run in two segments with different Hamiltonians; samples from both.
dynamics::Trajectory evolve_ket_switched(const TimeDependentHamiltonian& first, const TimeDependentHamiltonian* second,
                                         double t_switch, const Ket& psi0, const dynamics::TimeGrid& grid) {
  if (!second) return dynamics::evolve_unitary(first, psi0, grid);
  const double w = std::max(first.max_frequency(), second->max_frequency());
  const dynamics::TimeGrid g1(grid.t0, t_switch, grid.dt, grid.sample_stride, w);
  const dynamics::TimeGrid g2(t_switch, grid.t1, grid.dt, grid.sample_stride, w);
  auto a = dynamics::evolve_unitary(first, psi0, g1);
  auto b = dynamics::evolve_unitary(*second, a.kets.back(), g2);
  for (std::size_t i = 1; i < b.size(); ++i) {
    a.times.push_back(b.times[i]);
    a.kets.push_back(std::move(b.kets[i]));
  }
  merge(a.diagnostics, b.diagnostics);
  return a;
}

dynamics::TimeGrid grid_for(const TimeDependentHamiltonian& h, double t1, double steps_per_cycle, std::size_t samples) {
  return dynamics::TimeGrid::automatic(h, 0.0, t1, steps_per_cycle, std::max<std::size_t>(samples, 1));
}

}  // namespace

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------

PopulationRun population_dynamics(const model::Preset& preset, const PopulationOptions& options) {
  const SchemeSpec& s = model::scheme(preset.scheme);
  const auto inter = preset.interaction();
  const double v = inter.strength(preset.scheme);
  model::DriveParams drive;
  drive.rabi = options.rabi.value_or(preset.rabi());
  PopulationRun out;
  out.rabi = drive.rabi;
  out.interaction = v;
  const Basis basis = s.basis();
  const Operator rho0 = Ket::basis_state(basis, {"1", "1"}).projector();
  const auto rates = options.dissipation ? preset.rates() : model::DecayRates::none(s);
  const auto lindblads = model::build_lindblad_set(s, rates);
  drive.detuning = model::solve_rab_detuning({preset.condition}, v, drive.rabi);
  out.detuning = drive.detuning;
  // Without drive the period is undefined; use the preset's.
  const double omega_ref = drive.rabi > 0.0 ? drive.rabi : preset.rabi();
  out.gate_time = kTwoPi * drive.detuning / (omega_ref * omega_ref);

  dynamics::Trajectory traj;
  if (drive.rabi == 0.0) {
    const TimeDependentHamiltonian h(basis, model::interaction_hamiltonian(s, inter).matrix());
    const auto grid = grid_for(h, out.gate_time, options.steps_per_cycle, options.samples);
    traj = dynamics::evolve_master(h, lindblads, rho0, grid);
  } else if (options.effective) {
    const auto rotated = effective::rotated_harmonics(s, drive, inter);
    const auto eff = effective::effective_hamiltonian(rotated);
    const auto h = TimeDependentHamiltonian::constant(eff.h_eff);
    const auto grid = grid_for(h, out.gate_time, options.steps_per_cycle, options.samples);
    traj = dynamics::evolve_master(h, effective::rotated_lindblads(rotated, lindblads), rho0, grid);
  } else {
    const auto h = model::build_hamiltonian(s, drive, inter);
    const auto grid = grid_for(h, out.gate_time, options.steps_per_cycle, options.samples);
    traj = dynamics::evolve_master(h, lindblads, rho0, grid);
  }

  traj.add_population_sum("P11", {basis.index("1", "1")});
  traj.add_population_sum("P_single", indices_with(s, 1));
  traj.add_population_sum("P_double", indices_with(s, 2));
  for (const auto& d : s.dressed_defs) traj.add_projector("P_" + d.name, s.dressed_state(d.name));

  const auto& pd = traj.observable("P_double");
  const auto peak = std::max_element(pd.begin(), pd.end());
  out.peak_double = *peak;
  out.peak_time = traj.times[static_cast<std::size_t>(peak - pd.begin())];
  out.final_p11 = traj.observable("P11").back();
  out.trajectory = std::move(traj);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(GateModel m) { return m == GateModel::kDdForster ? "dd-forster" : "vdw-reference"; }

GateModel parse_gate_model(std::string_view name) {
  if (name == "dd-forster" || name == "DD_FORSTER") return GateModel::kDdForster;
  if (name == "vdw-reference" || name == "VDW_REFERENCE") return GateModel::kVdwReference;
  throw DomainError("unknown gate model '" + std::string(name) + "'");
}

SchemeId GateSetup::scheme() const {
  return model == GateModel::kDdForster ? SchemeId::kForster : SchemeId::kVdwReference;
}

double GateSetup::interaction_strength() const { return interaction.strength(scheme()); }

double GateSetup::nominal_detuning() const {
  if (detuning) return *detuning;
  return model::solve_rab_detuning({condition}, interaction_strength(), rabi);
}

GateSetup robustness_setup(GateModel m) {
  GateSetup g;
  g.model = m;
  if (m == GateModel::kDdForster) {
    g.interaction = {2.54, 0.0, 3.0};
    g.rabi = kTwoPi * 9.9;
    g.condition = model::RabConditionKind::kForsterFull;
    g.rates = forster_rates();
  } else {
    g.interaction = {0.0, 1700.0, 6.6};
    g.rabi = kTwoPi * 2.2;
    g.condition = model::RabConditionKind::kVdwRef;
    g.rates = vdw_rates();
  }
  return g;
}

GateSetup preset_setup(const model::Preset& preset) {
  GateSetup g;
  if (preset.scheme == SchemeId::kForster) g.model = GateModel::kDdForster;
  else if (preset.scheme == SchemeId::kVdwReference) g.model = GateModel::kVdwReference;
  else throw DomainError("gates are defined for the Forster and vdW schemes only");
  g.interaction = preset.interaction();
  g.rabi = preset.rabi();
  g.condition = preset.condition;
  g.rates = preset.rates();
  return g;
}

double GateSpec::gate_time() const {
  const double d = setup.nominal_detuning();
  return kTwoPi * d / (setup.rabi * setup.rabi);
}

Ket gate_input(const Basis& basis) {
  return Ket::superposition(basis, {{{"0", "0"}, 0.5}, {{"0", "1"}, 0.5}, {{"1", "0"}, 0.5}, {{"1", "1"}, 0.5}});
}

Ket gate_target(const Basis& basis, double theta) {
  return Ket::superposition(
      basis, {{{"0", "0"}, 0.5}, {{"0", "1"}, 0.5}, {{"1", "0"}, 0.5}, {{"1", "1"}, 0.5 * std::exp(kI * theta)}});
}

double GateSpec::pulse_duration() const {
  const double t = gate_time();
  if (!align_to_beat) return t;
  const double beat = kTwoPi / setup.nominal_detuning();
  return std::max(1.0, std::round(t / beat)) * beat;
}

GateResult run_gate(const GateSpec& gate) {
  if (!(gate.setup.rabi > 0.0)) throw DomainError("gate: Omega must be positive");
  const SchemeSpec& s = model::scheme(gate.setup.scheme());
  const double omega0 = gate.setup.rabi;
  const double delta0 = gate.setup.nominal_detuning();

  GateResult out;
  out.gate_time = kTwoPi * delta0 / (omega0 * omega0);
  out.duration = gate.pulse_duration();
  model::DriveParams d1;
  d1.rabi = omega0 * (1.0 + gate.deviations.omega);
  d1.detuning = delta0 * (1.0 + gate.deviations.detuning);
  model::InteractionParams inter = gate.setup.interaction;
  inter.distance *= 1.0 + gate.deviations.distance;
  out.rabi = d1.rabi;
  out.detuning = d1.detuning;
  out.interaction = inter.strength(s.id);

  model::DriveParams d2 = d1;
  d2.atom_phase[0] = pi + gate.theta;

  const Basis basis = s.basis();
  const Ket psi0 = gate_input(basis);
  const Ket target = gate_target(basis, gate.theta);
  const double t_half = 0.5 * out.duration;
  const auto lindblads =
      model::build_lindblad_set(s, gate.dissipation ? gate.setup.rates : model::DecayRates::none(s));

  TimeDependentHamiltonian h1, h2;
  std::vector<Operator> jumps;
  if (gate.effective) {
    const auto r1 = effective::rotated_harmonics(s, d1, inter);
    h1 = TimeDependentHamiltonian::constant(effective::effective_hamiltonian(r1).h_eff);
    if (gate.phase_switch)
      h2 = TimeDependentHamiltonian::constant(
          effective::effective_hamiltonian(effective::rotated_harmonics(s, d2, inter)).h_eff);
    if (gate.dissipation) jumps = effective::rotated_lindblads(r1, lindblads);
  } else {
    h1 = model::build_hamiltonian(s, d1, inter);
    if (gate.phase_switch) h2 = model::build_hamiltonian(s, d2, inter);
    if (gate.dissipation) jumps = lindblads;
  }
  const auto grid = grid_for(h1, out.duration, gate.steps_per_cycle, gate.samples);

  if (gate.dissipation) {
    const Operator rho0 = psi0.projector();
    const auto traj = gate.phase_switch ? dynamics::evolve_master_switched(h1, h2, t_half, jumps, rho0, grid)
                                        : dynamics::evolve_master(h1, jumps, rho0, grid);
    out.diagnostics = traj.diagnostics;
    out.times = traj.times;
    for (std::size_t i = 0; i < traj.size(); ++i) out.fidelity_trace.push_back(fidelity(target, traj.rho(i)));
  } else {
    const auto traj = evolve_ket_switched(h1, gate.phase_switch ? &h2 : nullptr, t_half, psi0, grid);
    out.diagnostics = traj.diagnostics;
    out.times = traj.times;
    for (const auto& k : traj.kets) out.fidelity_trace.push_back(std::norm(target.inner(k)));
    const std::size_t i11 = basis.index("1", "1");
    const cplx a = traj.kets.back().amplitudes()(static_cast<Eigen::Index>(i11));
    out.phase_error = std::arg(a / (0.5 * std::exp(kI * gate.theta)));
  }
  out.fidelity = out.fidelity_trace.back();
  return out;
}

double gate_fidelity(const GateSpec& gate) { return run_gate(gate).fidelity; }

GateResult geometric_gate(double theta, const model::Preset& preset, const GeometricOptions& options) {
  if (!(theta > 0.0 && theta < kTwoPi)) throw DomainError("geometric gate: theta must lie in (0, 2pi)");
  GateSpec g;
  g.setup = preset_setup(preset);
  g.theta = theta;
  g.phase_switch = true;
  g.effective = options.effective;
  g.dissipation = options.dissipation;
  g.align_to_beat = options.align_to_beat;
  g.steps_per_cycle = options.steps_per_cycle;
  g.samples = options.samples;
  return run_gate(g);
}

double computational_block_norm(const Operator& h) {
  const Basis& b = h.basis();
  double m = 0.0;
  for (const char* x : {"00", "01", "10", "11"})
    for (const char* y : {"00", "01", "10", "11"})
      m = std::max(m, std::abs(h(b.index(std::string(1, x[0]), std::string(1, x[1])),
                                 b.index(std::string(1, y[0]), std::string(1, y[1])))));
  return m;
}

// ---------------------------------------------------------------------------

std::string to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::kDOmega: return "dOmega";
    case ScanAxis::kDDelta: return "dDelta";
    case ScanAxis::kOmegaAbs: return "omega_abs";
    case ScanAxis::kDistance: return "dr";
  }
  return "?";
}

ScanAxis parse_scan_axis(std::string_view name) {
  for (auto a : {ScanAxis::kDOmega, ScanAxis::kDDelta, ScanAxis::kOmegaAbs, ScanAxis::kDistance})
    if (name == to_string(a)) return a;
  throw DomainError("unknown scan axis '" + std::string(name) + "'");
}

void SweepResult::write_csv(std::ostream& os) const {
  os << axis;
  for (const auto& s : series) os << ',' << s;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", values[i]);
    os << buf;
    for (const auto& f : fidelities) {
      std::snprintf(buf, sizeof buf, "%.12g", f[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

SweepResult robustness_scan(ScanAxis axis, const std::vector<ScanSeries>& series, const std::vector<double>& values,
                            std::size_t workers) {
  if (series.empty() || values.empty()) throw DomainError("scan: nothing to sweep");
  for (double v : values) {
    if (axis == ScanAxis::kOmegaAbs) {
      if (!(v >= kTwoPi * 0.5 * (1 - 1e-12) && v <= kTwoPi * 30.0 * (1 + 1e-12)))
        throw DomainError("scan: Omega outside 2pi x [0.5, 30] MHz");
    } else if (!(std::abs(v) <= 0.1 + 1e-12)) {
      throw DomainError("scan: relative deviation outside [-0.1, 0.1]");
    }
  }

  SweepResult out;
  out.axis = to_string(axis);
  out.unit = axis == ScanAxis::kOmegaAbs ? "rad/us" : "1";
  out.values = values;
  for (const auto& s : series) out.series.push_back(s.name);
  out.fidelities.assign(series.size(), std::vector<double>(values.size(), 0.0));
  std::vector<dynamics::Diagnostics> diags(series.size() * values.size());

  parallel_for(series.size() * values.size(), workers, [&](std::size_t k) {
    const std::size_t si = k / values.size();
    const std::size_t vi = k % values.size();
    GateSpec g = series[si].gate;
    const double v = values[vi];
    switch (axis) {
      case ScanAxis::kDOmega: g.deviations.omega = v; break;
      case ScanAxis::kDDelta: g.deviations.detuning = v; break;
      case ScanAxis::kDistance: g.deviations.distance = v; break;
      case ScanAxis::kOmegaAbs:
        g.setup.rabi = v;
        g.setup.detuning.reset();
        break;
    }
    const GateResult r = run_gate(g);
    out.fidelities[si][vi] = r.fidelity;
    diags[k] = r.diagnostics;
  });
  for (const auto& d : diags) merge(out.diagnostics, d);
  for (const auto& f : out.fidelities)
    for (double x : f)
      if (!(x >= -1e-12 && x <= 1.0 + 1e-9)) throw NumericalError("scan: fidelity outside [0, 1]");

  for (const auto& s : series) {
    std::ostringstream os;
    os << "model=" << to_string(s.gate.setup.model) << " omega=" << s.gate.setup.rabi
       << " distance=" << s.gate.setup.interaction.distance << " c3=" << s.gate.setup.interaction.c3
       << " c6=" << s.gate.setup.interaction.c6 << " condition=" << model::to_string(s.gate.setup.condition);
    if (s.gate.setup.detuning) os << " detuning=" << *s.gate.setup.detuning;
    out.metadata["series." + s.name] = os.str();
  }
  return out;
}

double width_above(const std::vector<double>& x, const std::vector<double>& y, double threshold) {
  if (x.size() != y.size()) throw DimensionError("width_above: size mismatch");
  double w = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = y[i - 1] - threshold, b = y[i] - threshold, dx = x[i] - x[i - 1];
    if (a > 0.0 && b > 0.0) w += dx;
    else if (a > 0.0 || b > 0.0) w += dx * std::max(a, b) / std::abs(b - a);
  }
  return w;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 1) return {a};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("logspace: bounds must be positive");
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& x : v) x = std::exp(x);
  v.front() = a;
  v.back() = b;
  return v;
}

std::vector<ScanSeries> distance_cases(int which) {
  if (which != 1 && which != 2) throw DomainError("distance case must be 1 or 2");
  const model::RabCondition vdw_cond{model::RabConditionKind::kVdwRef};
  const double ratio = 10.0;

  GateSpec dd;
  dd.setup = robustness_setup(GateModel::kDdForster);
  dd.setup.rabi = kTwoPi * 6.663;

  GateSpec vdw;
  vdw.setup = robustness_setup(GateModel::kVdwReference);
  const double r = dd.setup.interaction.distance;
  double v_vdw = 0.0;
  if (which == 1) {
    // Same distance and interaction as the DD pair, same Delta/Omega.
    v_vdw = dd.setup.interaction_strength();
    const double rabi = v_vdw / vdw_cond.interaction_for(ratio, 1.0);
    vdw.setup.rabi = rabi;
    vdw.setup.detuning = ratio * rabi;
  } else {
    // The weaker robustness-figure pair moved to the DD distance.
    v_vdw = robustness_setup(GateModel::kVdwReference).interaction_strength();
  }
  vdw.setup.interaction = {0.0, v_vdw * std::pow(r, 6) / (kTwoPi * 1000.0), r};
  return {{"dd", dd}, {"vdw", vdw}};
}

// ---------------------------------------------------------------------------

MicrowaveParams MicrowaveParams::from_ratio(double ratio, double rabi_eff_prime) {
  if (!(ratio >= 0.0)) throw DomainError("microwave ratio must be non-negative");
  return {ratio * rabi_eff_prime, ratio};
}

double SteadySetup::detuning() const {
  return model::solve_rab_detuning({model::RabConditionKind::kForsterNoStark}, interaction.v_d(), rabi);
}

double SteadySetup::rabi_eff_prime() const { return sqrt2 * rabi * rabi / (2.0 * detuning()); }

Operator microwave_hamiltonian(const SchemeSpec& scheme, double omega_mw) {
  const Basis a1 = scheme.atom_basis(0), a2 = scheme.atom_basis(1);
  auto x = [&](const Basis& b) {
    return (Operator::transition(b, {"0", ""}, {"1", ""}) + Operator::transition(b, {"1", ""}, {"0", ""})) * cplx(omega_mw / 2.0);
  };
  return tensor(x(a1), Operator::identity(a2)) + tensor(Operator::identity(a1), x(a2));
}

namespace {

model::DriveParams steady_drive(const SteadySetup& setup) {
  model::DriveParams d;
  d.rabi = setup.rabi;
  d.detuning = setup.detuning();
  d.bichromatic = false;
  d.blue_tone = true;
  return d;
}

Ket singlet(const Basis& b) {
  return Ket::superposition(b, {{{"0", "1"}, 1.0 / sqrt2}, {{"1", "0"}, -1.0 / sqrt2}});
}

}  // namespace

SteadyModel steady_model(const SteadySetup& setup) {
  const SchemeSpec& s = model::scheme(SchemeId::kForster);
  const auto drive = steady_drive(setup);
  SteadyModel m{effective::rotated_harmonics(s, drive, setup.interaction), {}, {}, setup.rabi_eff_prime(), 0.0, 0.0};
  m.effective = effective::effective_hamiltonian(m.rotated);
  m.lindblads = effective::rotated_lindblads(m.rotated, model::build_lindblad_set(s, setup.rates));

  const Basis basis = s.basis();
  const Ket g = Ket::basis_state(basis, {"1", "1"});
  const Ket plus = m.rotated.dressed.state("+");
  const Ket minus = m.rotated.dressed.state("-");
  const Operator& h = m.effective.h_eff;
  m.coupling_error = std::abs(std::abs(g.inner(h * plus)) - m.rabi_eff_prime / 2.0);
  m.minus_leak = std::abs(g.inner(h * minus));
  if (m.coupling_error > 1e-9 * m.rabi_eff_prime || m.minus_leak > 1e-9 * m.rabi_eff_prime) {
    std::ostringstream os;
    os << "pumping model: generated |11> coupling deviates from Omega'_eff/2 (error " << m.coupling_error
       << ", leak to '-' " << m.minus_leak << ")";
    throw NumericalError(os.str());
  }
  return m;
}

SteadyResult steady_entanglement(const MicrowaveParams& mw, const SteadyModel& model, dynamics::SteadyMethod method) {
  const SchemeSpec& s = model::scheme(SchemeId::kForster);
  const Operator h = model.effective.h_eff + microwave_hamiltonian(s, mw.omega_mw);
  SteadyResult out;
  out.state = dynamics::steady_state(h, model.lindblads, method);
  out.infidelity = 1.0 - fidelity(singlet(h.basis()), out.state.rho);
  return out;
}

SteadyResult steady_entanglement(const MicrowaveParams& mw, const SteadySetup& setup, dynamics::SteadyMethod method) {
  return steady_entanglement(mw, steady_model(setup), method);
}

SteadyResult steady_entanglement_full(const MicrowaveParams& mw, const SteadySetup& setup, double steps_per_cycle) {
  const SchemeSpec& s = model::scheme(SchemeId::kForster);
  const auto h0 = model::build_hamiltonian(s, steady_drive(setup), setup.interaction);
  const TimeDependentHamiltonian h(h0.basis(), h0.static_part() + microwave_hamiltonian(s, mw.omega_mw).matrix(),
                                   h0.terms());
  dynamics::SteadyOptions opt;
  opt.steps_per_cycle = steps_per_cycle;
  SteadyResult out;
  out.state = dynamics::steady_state_periodic(h, model::build_lindblad_set(s, setup.rates), opt);
  out.infidelity = 1.0 - fidelity(singlet(h.basis()), out.state.rho);
  return out;
}

// ---------------------------------------------------------------------------

double fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("fit_power_law: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0 && v > 0.0)) throw DomainError("fit_power_law: values must be positive");
    const double x = std::log(n), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(points.size());
  const double den = k * sxx - sx * sx;
  if (!(std::abs(den) > 1e-12 * std::max(1.0, k * sxx))) throw DomainError("fit_power_law: degenerate abscissae");
  return (k * sxy - sx * sy) / den;
}

std::vector<CrossoverRow> read_crossover_table(std::istream& is) {
  std::vector<CrossoverRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    CrossoverRow r{};
    if (!(ls >> r.n >> r.c3 >> r.defect)) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw ConfigError("crossover table: expected 'n,c3,defect'", static_cast<int>(lineno), 1);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rab::experiments
