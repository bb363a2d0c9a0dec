#pragma once

// Second-order time-averaged effective Hamiltonians.
//
// The driven Hamiltonian is moved into a frame rotating with a reference
// Hamiltonian that is diagonal in the dressed basis of the interaction block.
// Every drive matrix element then carries a single frequency; grouping by
// frequency gives the harmonic decomposition
//   H(t) = static + sum_n h_n^dag e^{i w_n t} + h_n e^{-i w_n t},
// and the effective Hamiltonian keeps the equal-frequency commutators
//   H_eff = static + sum_n [h_n^dag, h_n] / w_n.

#include <map>
#include <string>
#include <vector>

#include "rab/hamiltonian.hpp"
#include "rab/model.hpp"
#include "rab/qcore.hpp"

namespace rab::effective {

/// Columns of `unitary` are the dressed basis vectors written in the product
/// basis. Vectors outside the interaction block are the untouched product
/// states, except for the orthogonal complement inside the block.
struct DressedBasis {
  Operator unitary;
  std::vector<std::string> labels;
  std::vector<double> energies;  // <col|H_d|col>, rad/us

  std::size_t size() const { return labels.size(); }
  std::size_t index(const std::string& label) const;
  Ket state(const std::string& label) const;
};

DressedBasis dressed_basis(const model::SchemeSpec& scheme, const model::InteractionParams& inter);

struct Harmonic {
  Operator op;  // coefficient of e^{-i freq t}
  double freq;  // > 0
};

enum class Frame {
  kResonant,  // dressed pair rotated at +-2*Delta (diagonal shift at +2*Delta)
  kExact,     // dressed states rotated at their own energies
};

struct RotatedHamiltonian {
  DressedBasis dressed;
  std::vector<double> reference;  // frame energy per dressed column
  Operator frame_generator;       // H_ref in the product basis
  Operator static_part;
  std::vector<Harmonic> harmonics;

  /// Harmonics reassembled into a time-dependent Hamiltonian.
  TimeDependentHamiltonian as_time_dependent() const;
  /// exp(i H_ref t)
  Operator frame_unitary(double t) const;
};

/// Frequencies closer than this (rad/us) are merged into one harmonic.
inline constexpr double kFrequencyResolution = 1e-6;

RotatedHamiltonian rotated_harmonics(const model::SchemeSpec& scheme, const model::DriveParams& drive,
                                     const model::InteractionParams& inter, Frame frame = Frame::kResonant);

/// Same decomposition for an arbitrary Hamiltonian and frame.
RotatedHamiltonian rotate(const TimeDependentHamiltonian& h, const DressedBasis& dressed,
                          const std::vector<double>& reference);

struct EffectiveModel {
  Operator h_eff;
  /// 2 * norm of the coupling from |11> into the two-excitation manifold.
  double rabi_eff = 0.0;
  /// Second-order diagonal shift per dressed-basis label.
  std::map<std::string, double> stark;
  /// max ||h_n|| / min w_n
  double validity_ratio = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kValidityRatio = 0.2;

EffectiveModel effective_hamiltonian(const std::vector<Harmonic>& harmonics, const Operator& static_part);
/// Labels Stark shifts with the dressed basis of `rotated`.
EffectiveModel effective_hamiltonian(const RotatedHamiltonian& rotated);

EffectiveModel derive_effective(const model::SchemeSpec& scheme, const model::DriveParams& drive,
                                const model::InteractionParams& inter, Frame frame = Frame::kResonant);

/// Hand-written effective coupling on the |11> + two-excitation block under
/// the full antiblockade condition (bichromatic drive).
Operator closed_form(const model::SchemeSpec& scheme, const model::DriveParams& drive);

/// Indices of |11> and every two-excitation product state.
std::vector<std::size_t> coupling_block(const model::SchemeSpec& scheme);

/// Max entrywise deviation between generator and closed form on the
/// coupling block, rad/us.
double verify_closed_form(const model::SchemeSpec& scheme, const model::DriveParams& drive,
                          const model::InteractionParams& inter);

/// Lindblad operators transformed into the rotating frame. Each operator is
/// split into its frame-frequency components, which are kept as independent
/// channels (cross terms oscillate and average out).
std::vector<Operator> rotated_lindblads(const RotatedHamiltonian& rotated, const std::vector<Operator>& lindblads);

}  // namespace rab::effective
