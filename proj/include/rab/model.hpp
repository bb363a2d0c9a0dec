#pragma once

// Two-atom driven models: level structures, drive and interaction
// Hamiltonians, antiblockade (RAB) conditions and decay channels.
//
// Units: angular frequencies in rad/us, times in us, distances in um.
// Interaction coefficients are ordinary frequencies (GHz um^3, GHz um^6) and
// get the 2*pi factor when converted to rad/us.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rab/hamiltonian.hpp"
#include "rab/qcore.hpp"

namespace rab::model {

enum class SchemeId { kForster, kSpinExchange, kCollectiveExchange, kVdwReference };

std::string to_string(SchemeId id);
SchemeId parse_scheme_id(std::string_view name);

struct DriveTransition {
  int atom;  // 0 or 1
  std::string ground;
  std::string rydberg;
};

using Superposition = std::vector<std::pair<BasisLabel, double>>;

/// H_d = V * prefactor * |ket><bra| + h.c. (added once when ket == bra).
struct CouplingTerm {
  Superposition ket;
  Superposition bra;
  double prefactor;
};

struct DressedDef {
  std::string name;
  Superposition terms;  // normalized
};

struct SchemeSpec {
  SchemeId id;
  std::vector<std::string> atom1_levels;
  std::vector<std::string> atom2_levels;
  std::vector<DriveTransition> drives;
  CouplingTerm dd_term;
  std::vector<DressedDef> dressed_defs;

  Basis atom_basis(int atom) const;
  Basis basis() const;
  /// Rydberg (non-ground) levels of an atom in declared order.
  std::vector<std::string> rydberg_levels(int atom) const;
  /// Number of atoms in a Rydberg level for a product label.
  int excitations(const BasisLabel& label) const;
  Ket dressed_state(std::string_view name) const;
  bool diagonal_interaction() const;
};

bool is_ground_level(std::string_view symbol);

/// The immutable built-in schemes.
const SchemeSpec& scheme(SchemeId id);

enum class ToneChoice { kBichromatic, kBlue, kRed };

struct DriveParams {
  double rabi = 0.0;      // Omega, rad/us
  double detuning = 0.0;  // Delta, rad/us
  bool bichromatic = true;
  /// Single-tone drive keeps exp(+i Delta t) (blue) or exp(-i Delta t) (red)
  /// on the |g><r| component.
  bool blue_tone = true;
  double phase = 0.0;  // global laser phase, rad
  /// Extra phase on each atom's drive, rad.
  double atom_phase[2] = {0.0, 0.0};

  void validate() const;
};

struct InteractionParams {
  double c3 = 0.0;        // GHz um^3
  double c6 = 0.0;        // GHz um^6
  double distance = 0.0;  // um

  double v_d() const;
  double v_vdw() const;
  /// Interaction strength relevant for the scheme: v_vdw for the vdW
  /// reference, v_d otherwise.
  double strength(SchemeId id) const;
};

/// Decay rate per Rydberg level in 1/us. Each level decays to |0> and |1>
/// with gamma/2 each.
struct DecayRates {
  std::map<std::string, double> gamma;

  static DecayRates from_lifetimes_ms(const std::map<std::string, double>& lifetimes_ms);
  static DecayRates none(const SchemeSpec& scheme);
};

enum class RabConditionKind { kForsterFull, kForsterNoStark, kExchangeFull, kVdwRef };

std::string to_string(RabConditionKind kind);
RabConditionKind parse_condition(std::string_view name);

/// Antiblockade condition written as V = a * Delta - c * Omega^2 / Delta.
struct RabCondition {
  RabConditionKind kind;

  double linear_coefficient() const;  // a
  double stark_coefficient() const;   // c
  /// a*Delta - c*Omega^2/Delta - V
  double residual(double v, double delta, double omega) const;
  /// Interaction strength satisfying the condition at (Delta, Omega).
  double interaction_for(double delta, double omega) const;
};

RabConditionKind default_condition(SchemeId id);

/// 2*pi * c3 * 1000 / r^3 (MHz -> rad/us)
double dd_strength(double c3, double r);
/// 2*pi * c6 * 1000 / r^6 (MHz -> rad/us)
double vdw_strength(double c6, double r);
/// (4 c3^2 / delta^2)^(1/6), delta in the frequency unit of c3.
double crossover_distance(double c3, double delta);

/// Positive detuning root of the condition; the root continuous with the
/// Omega -> 0 limit.
double solve_rab_detuning(const RabCondition& cond, double v, double omega);

/// dDelta/dV along the family of operating points with fixed Delta/Omega.
/// This is the coefficient by which the detuning must be re-scaled when the
/// interaction shifts and the drive ratio is kept.
double condition_sensitivity(const RabCondition& cond, double omega, double delta);

/// r_vdW / r_d at which a common relative distance error dr/r forces the same
/// detuning correction on a vdW pair and a Forster pair of equal interaction
/// strength: 6 s_vdW / (3 s_d) with s the sensitivities above.
double equal_shift_distance_ratio(double omega, double delta);

/// dDelta/dV at fixed Omega (implicit derivative of the condition).
double detuning_derivative(const RabCondition& cond, double omega, double delta);

/// Static interaction Hamiltonian H_d.
Operator interaction_hamiltonian(const SchemeSpec& scheme, const InteractionParams& inter);

/// Sum over atoms of exp(i phase_j) |g><r|_j (x) I, the lowering part of the drive.
Operator drive_lowering(const SchemeSpec& scheme, const DriveParams& drive);

TimeDependentHamiltonian build_hamiltonian(const SchemeSpec& scheme, const DriveParams& drive,
                                           const InteractionParams& inter);

Operator build_full_hamiltonian(const SchemeSpec& scheme, const DriveParams& drive, const InteractionParams& inter,
                                double t);

std::vector<Operator> build_lindblad_set(const SchemeSpec& scheme, const DecayRates& rates);

/// Named parameter set of a published configuration.
struct Preset {
  std::string name;
  SchemeId scheme;
  double c3;        // GHz um^3
  double c6;        // GHz um^6
  double distance;  // um
  double rabi_mhz;  // ordinary frequency
  std::map<std::string, double> lifetimes_ms;
  RabConditionKind condition;

  InteractionParams interaction() const { return {c3, c6, distance}; }
  DecayRates rates() const { return DecayRates::from_lifetimes_ms(lifetimes_ms); }
  double rabi() const;
};

const std::vector<Preset>& presets();
const Preset& preset(std::string_view name);

}  // namespace rab::model
