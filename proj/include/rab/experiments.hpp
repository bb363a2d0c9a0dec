#pragma once

// Named scenarios built on the model, effective and dynamics layers: gate
// fidelities, robustness sweeps, the phase-switched geometric gate, steady
// entanglement and crossover-distance scaling.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rab/dynamics.hpp"
#include "rab/effective.hpp"
#include "rab/model.hpp"

namespace rab::experiments {

/// Runs fn(0..n-1) on up to `workers` threads. Exceptions are rethrown on the
/// caller's thread (the one with the smallest index wins).
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Population dynamics

struct PopulationRun {
  dynamics::Trajectory trajectory;  // columns: P11, P_single, P_double, one per dressed label
  double gate_time = 0.0;
  double rabi = 0.0;
  double detuning = 0.0;
  double interaction = 0.0;
  double peak_double = 0.0;       // max of P_double
  double peak_time = 0.0;         // t at the peak
  double final_p11 = 0.0;
};

struct PopulationOptions {
  bool effective = false;     // rerun in the rotating frame with the effective generator
  bool dissipation = true;
  double steps_per_cycle = 40.0;
  std::size_t samples = 400;
  std::optional<double> rabi;  // overrides the preset's Omega, rad/us
};

/// |11> prepared, driven for one period T = 2*pi*Delta/Omega^2 with Delta
/// from the preset's condition.
PopulationRun population_dynamics(const model::Preset& preset, const PopulationOptions& options = {});

// ---------------------------------------------------------------------------
// Gates

enum class GateModel { kDdForster, kVdwReference };

std::string to_string(GateModel m);
GateModel parse_gate_model(std::string_view name);

/// Physical operating point of a gate before deviations.
struct GateSetup {
  GateModel model = GateModel::kDdForster;
  model::InteractionParams interaction;
  double rabi = 0.0;  // nominal Omega, rad/us
  model::RabConditionKind condition = model::RabConditionKind::kForsterFull;
  model::DecayRates rates;
  /// Fixes the nominal detuning instead of solving the condition.
  std::optional<double> detuning;

  model::SchemeId scheme() const;
  double interaction_strength() const;
  double nominal_detuning() const;
};

/// Parameters of the controlled-Z robustness figures: Forster pair at 3 um
/// with Omega = 2pi x 9.9 MHz, or the vdW pair at 6.6 um with 2pi x 2.2 MHz.
GateSetup robustness_setup(GateModel m);

/// Gate on a preset's operating point.
GateSetup preset_setup(const model::Preset& preset);

struct Deviations {
  double omega = 0.0;     // dOmega/Omega
  double detuning = 0.0;  // dDelta/Delta
  double distance = 0.0;  // dr/r
};

struct GateSpec {
  GateSetup setup;
  double theta = std::numbers::pi;
  Deviations deviations;
  /// Flip atom 1's laser phase by pi + theta at T/2.
  bool phase_switch = false;
  bool effective = false;
  bool dissipation = true;
  /// End the pulse at the whole number of beat periods 2*pi/Delta (nominal
  /// Delta) closest to T, with the phase switch at half that duration. The
  /// off-resonant single-atom admixture vanishes at these instants.
  bool align_to_beat = false;
  double steps_per_cycle = 40.0;
  std::size_t samples = 2;

  /// 2*pi*Delta/Omega^2 at the nominal operating point.
  double gate_time() const;
  /// Duration actually simulated.
  double pulse_duration() const;
};

struct GateResult {
  double fidelity = 0.0;
  double gate_time = 0.0;
  double duration = 0.0;     // simulated pulse length
  double rabi = 0.0;         // applied Omega
  double detuning = 0.0;     // applied Delta
  double interaction = 0.0;  // applied V
  /// arg(<11|psi(T)> / (<11|psi(0)> e^{i theta})) for pure-state runs.
  std::optional<double> phase_error;
  std::vector<double> times;
  std::vector<double> fidelity_trace;
  dynamics::Diagnostics diagnostics;
};

/// (|00> + |01> + |10> + |11>)/2 in the scheme's basis.
Ket gate_input(const Basis& basis);
/// diag(1, 1, 1, e^{i theta}) applied to gate_input.
Ket gate_target(const Basis& basis, double theta);

GateResult run_gate(const GateSpec& gate);
double gate_fidelity(const GateSpec& gate);

/// Phase-switched controlled-phase gate on the preset's operating point.
struct GeometricOptions {
  bool effective = false;
  bool dissipation = true;
  bool align_to_beat = true;
  double steps_per_cycle = 40.0;
  std::size_t samples = 200;
};
GateResult geometric_gate(double theta, const model::Preset& preset, const GeometricOptions& options = {});

/// max |<a|H|b>| over computational product states a, b.
double computational_block_norm(const Operator& h);

// ---------------------------------------------------------------------------
// Sweeps

enum class ScanAxis { kDOmega, kDDelta, kOmegaAbs, kDistance };

std::string to_string(ScanAxis a);
ScanAxis parse_scan_axis(std::string_view name);

struct ScanSeries {
  std::string name;
  GateSpec gate;
};

struct SweepResult {
  std::string axis;
  std::string unit;
  std::vector<double> values;
  std::vector<std::string> series;
  std::vector<std::vector<double>> fidelities;  // [series][point]
  std::map<std::string, std::string> metadata;
  dynamics::Diagnostics diagnostics;           // worst over all points, refinements summed

  /// Header "<axis>,<series...>", %.12g, '\n' endings.
  void write_csv(std::ostream& os) const;
};

/// Relative deviations are fractions; omega_abs values are Omega in rad/us
/// with Delta re-solved at each point.
SweepResult robustness_scan(ScanAxis axis, const std::vector<ScanSeries>& series, const std::vector<double>& values,
                            std::size_t workers = 1);

/// Total length of the abscissa where the piecewise-linear curve exceeds
/// `threshold`.
double width_above(const std::vector<double>& x, const std::vector<double>& y, double threshold);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

/// Distance-deviation comparison cases: the Forster pair at the shared
/// operating point (Omega = 2pi x 6.663 MHz, Delta = 10 Omega, r = 3 um)
/// against a vdW pair whose interaction equals the DD one (case 1) or is the
/// weaker robustness-figure pair (case 2).
std::vector<ScanSeries> distance_cases(int which);

// ---------------------------------------------------------------------------
// Steady entanglement

struct MicrowaveParams {
  double omega_mw = 0.0;  // rad/us
  double ratio = 0.0;     // omega_mw / Omega'_eff

  static MicrowaveParams from_ratio(double ratio, double rabi_eff_prime);
};

struct SteadySetup {
  model::InteractionParams interaction{2.54, 0.0, 3.0};
  double rabi = 2.0 * std::numbers::pi * 1.0;  // rad/us
  model::DecayRates rates = model::DecayRates::from_lifetimes_ms({{"p", 0.53}, {"d", 0.22}, {"f", 0.13}});

  double detuning() const;          // V = sqrt(2) Delta
  double rabi_eff_prime() const;    // sqrt(2) Omega^2 / (2 Delta)
};

/// Sum over atoms of (w/2)(|0><1| + |1><0|) (x) I.
Operator microwave_hamiltonian(const model::SchemeSpec& scheme, double omega_mw);

/// Rotating-frame generator for the pumping scheme (single tone, no microwave).
struct SteadyModel {
  effective::RotatedHamiltonian rotated;
  effective::EffectiveModel effective;
  std::vector<Operator> lindblads;  // split by frame frequency
  double rabi_eff_prime = 0.0;
  /// |<11|H_eff|+> - Omega'_eff/2| and the leak of |11> into "-".
  double coupling_error = 0.0;
  double minus_leak = 0.0;
};

/// Builds and validates the effective pumping model; throws NumericalError
/// when the generator does not produce the expected |11> <-> |+> coupling.
SteadyModel steady_model(const SteadySetup& setup);

struct SteadyResult {
  double infidelity = 0.0;  // 1 - <S|rho|S>
  dynamics::SteadyState state;
};

/// Effective-model steady state (NULLSPACE by default).
SteadyResult steady_entanglement(const MicrowaveParams& mw, const SteadySetup& setup = {},
                                 dynamics::SteadyMethod method = dynamics::SteadyMethod::kNullspace);
SteadyResult steady_entanglement(const MicrowaveParams& mw, const SteadyModel& model,
                                 dynamics::SteadyMethod method = dynamics::SteadyMethod::kNullspace);

/// Full lab-frame model, stroboscopic long-time steady state.
SteadyResult steady_entanglement_full(const MicrowaveParams& mw, const SteadySetup& setup = {},
                                      double steps_per_cycle = 40.0);

// ---------------------------------------------------------------------------
// Crossover distance

/// Least-squares slope of log(value) against log(n).
double fit_power_law(const std::vector<std::pair<double, double>>& points);

struct CrossoverRow {
  double n;
  double c3;      // GHz um^3
  double defect;  // GHz
};

/// Reads "n,c3,defect" rows (header optional, '#' comments allowed).
std::vector<CrossoverRow> read_crossover_table(std::istream& is);

}  // namespace rab::experiments
