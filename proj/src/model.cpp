#include "rab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rab::model {

namespace {

using std::numbers::pi;
using std::numbers::sqrt2;

constexpr double kInvSqrt2 = 1.0 / sqrt2;

BasisLabel L(std::string a, std::string b) { return {std::move(a), std::move(b)}; }

SchemeSpec make_forster() {
  SchemeSpec s{SchemeId::kForster, {"0", "1", "p", "d", "f"}, {"0", "1", "p", "d", "f"}, {{0, "1", "d"}, {1, "1", "d"}},
               {{{L("d", "d"), 1.0}}, {{L("p", "f"), kInvSqrt2}, {L("f", "p"), kInvSqrt2}}, sqrt2}, {}};
  s.dressed_defs = {
      {"r_pf", {{L("p", "f"), kInvSqrt2}, {L("f", "p"), kInvSqrt2}}},
      {"+", {{L("d", "d"), kInvSqrt2}, {L("p", "f"), 0.5}, {L("f", "p"), 0.5}}},
      {"-", {{L("d", "d"), kInvSqrt2}, {L("p", "f"), -0.5}, {L("f", "p"), -0.5}}},
      {"Psi", {{L("1", "d"), kInvSqrt2}, {L("d", "1"), kInvSqrt2}}},
  };
  return s;
}

SchemeSpec make_spin_exchange() {
  SchemeSpec s{SchemeId::kSpinExchange, {"0", "1", "p", "d"}, {"0", "1", "p", "d"}, {{0, "1", "p"}, {1, "1", "d"}},
               {{{L("p", "d"), 1.0}}, {{L("d", "p"), 1.0}}, 1.0}, {}};
  s.dressed_defs = {
      {"+", {{L("p", "d"), kInvSqrt2}, {L("d", "p"), kInvSqrt2}}},
      {"-", {{L("p", "d"), kInvSqrt2}, {L("d", "p"), -kInvSqrt2}}},
      {"Phi", {{L("1", "d"), kInvSqrt2}, {L("p", "1"), kInvSqrt2}}},
  };
  return s;
}

SchemeSpec make_collective() {
  SchemeSpec s{SchemeId::kCollectiveExchange, {"0", "1", "s", "p"}, {"0", "1", "s'", "p'"},
               {{0, "1", "s"}, {1, "1", "s'"}},
               {{{L("s", "s'"), 1.0}}, {{L("p", "p'"), 1.0}}, 1.0}, {}};
  s.dressed_defs = {
      {"+", {{L("s", "s'"), kInvSqrt2}, {L("p", "p'"), kInvSqrt2}}},
      {"-", {{L("s", "s'"), kInvSqrt2}, {L("p", "p'"), -kInvSqrt2}}},
      {"Xi", {{L("1", "s'"), kInvSqrt2}, {L("s", "1"), kInvSqrt2}}},
  };
  return s;
}

SchemeSpec make_vdw() {
  SchemeSpec s{SchemeId::kVdwReference, {"0", "1", "d"}, {"0", "1", "d"}, {{0, "1", "d"}, {1, "1", "d"}},
               {{{L("d", "d"), 1.0}}, {{L("d", "d"), 1.0}}, 1.0}, {}};
  s.dressed_defs = {{"Psi", {{L("1", "d"), kInvSqrt2}, {L("d", "1"), kInvSqrt2}}}};
  return s;
}

Ket to_ket(const Basis& basis, const Superposition& sp) {
  std::vector<std::pair<BasisLabel, cplx>> terms;
  for (const auto& [label, c] : sp) terms.emplace_back(label, c);
  return Ket::superposition(basis, terms);
}

// Single-atom |g><r| embedded on `atom`.
Operator local_transition(const SchemeSpec& s, int atom, const std::string& g, const std::string& r) {
  const Basis b1 = s.atom_basis(0);
  const Basis b2 = s.atom_basis(1);
  if (atom == 0) return tensor(Operator::transition(b1, {g, {}}, {r, {}}), Operator::identity(b2));
  return tensor(Operator::identity(b1), Operator::transition(b2, {g, {}}, {r, {}}));
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string to_string(SchemeId id) {
  switch (id) {
    case SchemeId::kForster: return "FORSTER";
    case SchemeId::kSpinExchange: return "SPIN_EXCHANGE";
    case SchemeId::kCollectiveExchange: return "COLLECTIVE_EXCHANGE";
    case SchemeId::kVdwReference: return "VDW_REFERENCE";
  }
  throw DomainError("unknown scheme id");
}

SchemeId parse_scheme_id(std::string_view name) {
  for (auto id : {SchemeId::kForster, SchemeId::kSpinExchange, SchemeId::kCollectiveExchange, SchemeId::kVdwReference})
    if (to_string(id) == name) return id;
  throw DomainError("unknown scheme id '" + std::string(name) + "'");
}

bool is_ground_level(std::string_view symbol) { return symbol == "0" || symbol == "1"; }

Basis SchemeSpec::atom_basis(int atom) const { return Basis::levels(atom == 0 ? atom1_levels : atom2_levels); }

Basis SchemeSpec::basis() const { return Basis::product(atom_basis(0), atom_basis(1)); }

std::vector<std::string> SchemeSpec::rydberg_levels(int atom) const {
  std::vector<std::string> out;
  for (const auto& l : atom == 0 ? atom1_levels : atom2_levels)
    if (!is_ground_level(l)) out.push_back(l);
  return out;
}

int SchemeSpec::excitations(const BasisLabel& label) const {
  return (is_ground_level(label.atom1_level) ? 0 : 1) + (is_ground_level(label.atom2_level) ? 0 : 1);
}

Ket SchemeSpec::dressed_state(std::string_view name) const {
  for (const auto& d : dressed_defs)
    if (d.name == name) return to_ket(basis(), d.terms);
  throw DomainError("scheme " + to_string(id) + " has no dressed state '" + std::string(name) + "'");
}

bool SchemeSpec::diagonal_interaction() const { return dd_term.ket == dd_term.bra; }

const SchemeSpec& scheme(SchemeId id) {
  static const SchemeSpec forster = make_forster();
  static const SchemeSpec spin = make_spin_exchange();
  static const SchemeSpec collective = make_collective();
  static const SchemeSpec vdw = make_vdw();
  switch (id) {
    case SchemeId::kForster: return forster;
    case SchemeId::kSpinExchange: return spin;
    case SchemeId::kCollectiveExchange: return collective;
    case SchemeId::kVdwReference: return vdw;
  }
  throw DomainError("unknown scheme id");
}

void DriveParams::validate() const {
  require_positive(rabi, "Rabi frequency");
  require_positive(detuning, "detuning");
}

double InteractionParams::v_d() const { return dd_strength(c3, distance); }
double InteractionParams::v_vdw() const { return vdw_strength(c6, distance); }
double InteractionParams::strength(SchemeId id) const { return id == SchemeId::kVdwReference ? v_vdw() : v_d(); }

DecayRates DecayRates::from_lifetimes_ms(const std::map<std::string, double>& lifetimes_ms) {
  DecayRates r;
  for (const auto& [level, tau] : lifetimes_ms) {
    require_positive(tau, "lifetime");
    r.gamma[level] = 1.0 / (tau * 1000.0);
  }
  return r;
}

DecayRates DecayRates::none(const SchemeSpec& scheme) {
  DecayRates r;
  for (int atom = 0; atom < 2; ++atom)
    for (const auto& l : scheme.rydberg_levels(atom)) r.gamma[l] = 0.0;
  return r;
}

std::string to_string(RabConditionKind kind) {
  switch (kind) {
    case RabConditionKind::kForsterFull: return "FORSTER_FULL";
    case RabConditionKind::kForsterNoStark: return "FORSTER_NOSTARK";
    case RabConditionKind::kExchangeFull: return "EXCHANGE_FULL";
    case RabConditionKind::kVdwRef: return "VDW_REF";
  }
  throw DomainError("unknown condition kind");
}

RabConditionKind parse_condition(std::string_view name) {
  for (auto k : {RabConditionKind::kForsterFull, RabConditionKind::kForsterNoStark, RabConditionKind::kExchangeFull,
                 RabConditionKind::kVdwRef})
    if (to_string(k) == name) return k;
  throw DomainError("unknown RAB condition '" + std::string(name) + "'");
}

double RabCondition::linear_coefficient() const {
  switch (kind) {
    case RabConditionKind::kForsterFull:
    case RabConditionKind::kForsterNoStark: return sqrt2;
    case RabConditionKind::kExchangeFull:
    case RabConditionKind::kVdwRef: return 2.0;
  }
  throw DomainError("unknown condition kind");
}

double RabCondition::stark_coefficient() const {
  switch (kind) {
    case RabConditionKind::kForsterFull: return 1.0 / (3.0 * sqrt2);
    case RabConditionKind::kForsterNoStark: return 0.0;
    case RabConditionKind::kExchangeFull: return 1.0 / 3.0;
    case RabConditionKind::kVdwRef: return 2.0 / 3.0;
  }
  throw DomainError("unknown condition kind");
}

double RabCondition::residual(double v, double delta, double omega) const {
  return linear_coefficient() * delta - stark_coefficient() * omega * omega / delta - v;
}

double RabCondition::interaction_for(double delta, double omega) const { return residual(0.0, delta, omega); }

RabConditionKind default_condition(SchemeId id) {
  switch (id) {
    case SchemeId::kForster: return RabConditionKind::kForsterFull;
    case SchemeId::kSpinExchange:
    case SchemeId::kCollectiveExchange: return RabConditionKind::kExchangeFull;
    case SchemeId::kVdwReference: return RabConditionKind::kVdwRef;
  }
  throw DomainError("unknown scheme id");
}

double dd_strength(double c3, double r) {
  require_positive(r, "distance");
  return 2.0 * pi * c3 * 1000.0 / (r * r * r);
}

double vdw_strength(double c6, double r) {
  require_positive(r, "distance");
  const double r3 = r * r * r;
  return 2.0 * pi * c6 * 1000.0 / (r3 * r3);
}

double crossover_distance(double c3, double delta) {
  if (delta == 0.0 || !std::isfinite(delta))
    throw DomainError("crossover_distance: zero Forster defect, dipole-dipole coupling dominates at every distance");
  return std::pow(4.0 * c3 * c3 / (delta * delta), 1.0 / 6.0);
}

double solve_rab_detuning(const RabCondition& cond, double v, double omega) {
  require_positive(v, "interaction strength");
  if (!(omega >= 0.0)) throw DomainError("Rabi frequency must be non-negative");
  // a D^2 - v D - c W^2 = 0; the '+' root is the positive one and tends to v/a.
  const double a = cond.linear_coefficient();
  const double c = cond.stark_coefficient();
  const double disc = v * v + 4.0 * a * c * omega * omega;
  double delta = (v + std::sqrt(disc)) / (2.0 * a);
  if (!(delta > 0.0)) throw DomainError("RAB condition has no positive root");
  // One Newton polish keeps the residual at rounding level.
  const double slope = a + c * omega * omega / (delta * delta);
  delta -= cond.residual(v, delta, omega) / slope;
  return delta;
}

double condition_sensitivity(const RabCondition& cond, double omega, double delta) {
  require_positive(delta, "detuning");
  const double slope = cond.linear_coefficient() - cond.stark_coefficient() * omega * omega / (delta * delta);
  if (std::abs(slope) < 1e-12) throw DomainError("condition_sensitivity: singular derivative");
  return 1.0 / slope;
}

double equal_shift_distance_ratio(double omega, double delta) {
  const double s_vdw = condition_sensitivity({RabConditionKind::kVdwRef}, omega, delta);
  const double s_d = condition_sensitivity({RabConditionKind::kForsterFull}, omega, delta);
  return 6.0 * s_vdw / (3.0 * s_d);
}

double detuning_derivative(const RabCondition& cond, double omega, double delta) {
  require_positive(delta, "detuning");
  const double slope = cond.linear_coefficient() + cond.stark_coefficient() * omega * omega / (delta * delta);
  if (std::abs(slope) < 1e-12) throw DomainError("detuning_derivative: singular derivative");
  return 1.0 / slope;
}

Operator interaction_hamiltonian(const SchemeSpec& s, const InteractionParams& inter) {
  const Basis basis = s.basis();
  const double v = inter.strength(s.id);
  const Ket ket = to_ket(basis, s.dd_term.ket);
  const Ket bra = to_ket(basis, s.dd_term.bra);
  Operator h = Operator::outer(ket, bra) * cplx(v * s.dd_term.prefactor);
  if (!s.diagonal_interaction()) h += h.dagger();
  return h;
}

Operator drive_lowering(const SchemeSpec& s, const DriveParams& drive) {
  Operator a = Operator::zero(s.basis());
  for (const auto& tr : s.drives) {
    const cplx phase = std::exp(kI * (drive.phase + drive.atom_phase[tr.atom]));
    a += local_transition(s, tr.atom, tr.ground, tr.rydberg) * phase;
  }
  return a;
}

TimeDependentHamiltonian build_hamiltonian(const SchemeSpec& s, const DriveParams& drive,
                                           const InteractionParams& inter) {
  drive.validate();
  const Operator hd = interaction_hamiltonian(s, inter);
  DriveTerm term;
  term.op = drive_lowering(s, drive).matrix() * (0.5 * drive.rabi);
  if (drive.bichromatic) {
    term.tones = {{1.0, drive.detuning}, {1.0, -drive.detuning}};
  } else {
    term.tones = {{1.0, drive.blue_tone ? drive.detuning : -drive.detuning}};
  }
  return {hd.basis(), hd.matrix(), {std::move(term)}};
}

Operator build_full_hamiltonian(const SchemeSpec& s, const DriveParams& drive, const InteractionParams& inter,
                                double t) {
  return build_hamiltonian(s, drive, inter).at(t);
}

std::vector<Operator> build_lindblad_set(const SchemeSpec& s, const DecayRates& rates) {
  std::vector<Operator> out;
  for (int atom = 0; atom < 2; ++atom) {
    for (const auto& r : s.rydberg_levels(atom)) {
      auto it = rates.gamma.find(r);
      if (it == rates.gamma.end()) throw DomainError("missing decay rate for level '" + r + "'");
      if (it->second < 0.0) throw DomainError("negative decay rate for level '" + r + "'");
      const double amp = std::sqrt(it->second / 2.0);
      for (const char* g : {"0", "1"}) out.push_back(local_transition(s, atom, g, r) * cplx(amp));
    }
  }
  return out;
}

double Preset::rabi() const { return 2.0 * pi * rabi_mhz; }

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"forster-ravets", SchemeId::kForster, 2.54, 0.0, 3.0, 5.0, {{"p", 0.53}, {"d", 0.22}, {"f", 0.13}},
       RabConditionKind::kForsterFull},
      {"spin-exchange-barredo", SchemeId::kSpinExchange, 7.965, 0.0, 3.0, 5.0, {{"p", 0.59}, {"d", 0.25}},
       RabConditionKind::kExchangeFull},
      {"collective-gorniaczyk", SchemeId::kCollectiveExchange, 0.6, 0.0, 2.0, 5.0,
       {{"s", 0.12}, {"s'", 0.13}, {"p", 0.25}, {"p'", 0.27}}, RabConditionKind::kExchangeFull},
      {"vdw-reference", SchemeId::kVdwReference, 0.0, 1700.0, 6.6, 2.2, {{"d", 0.22}}, RabConditionKind::kVdwRef},
  };
  return all;
}

const Preset& preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw DomainError("unknown preset '" + std::string(name) + "'");
}

}  // namespace rab::model
