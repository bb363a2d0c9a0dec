#include "rab/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rab::effective {

namespace {

using model::SchemeSpec;

Vector superposition_vector(const Basis& basis, const model::Superposition& sp) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  for (const auto& [label, c] : sp) v(static_cast<Eigen::Index>(basis.index(label.atom1_level, label.atom2_level))) += c;
  return v / v.norm();
}

struct FrequencyGroup {
  double freq;
  Matrix m;
};

FrequencyGroup& group_for(std::vector<FrequencyGroup>& groups, double f, Eigen::Index n) {
  for (auto& g : groups)
    if (std::abs(g.freq - f) < kFrequencyResolution) return g;
  groups.push_back({f, Matrix::Zero(n, n)});
  return groups.back();
}

// Scatters every nonzero element of x (dressed basis) into the group of its
// rotated frequency nu + ref_k - ref_l.
void scatter(std::vector<FrequencyGroup>& groups, const Matrix& x, double nu, const std::vector<double>& ref) {
  const Eigen::Index n = x.rows();
  // Basis-change rounding leaves entries near 1e-17; they must not spawn
  // spurious frequency groups.
  const double floor = 1e-14 * (x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index k = 0; k < n; ++k)
      if (std::abs(x(k, l)) > floor) group_for(groups, nu + ref[k] - ref[l], n).m(k, l) += x(k, l);
}

}  // namespace

std::size_t DressedBasis::index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw DomainError("dressed basis has no state '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

Ket DressedBasis::state(const std::string& label) const {
  return Ket(unitary.matrix().col(static_cast<Eigen::Index>(index(label))), unitary.basis());
}

DressedBasis dressed_basis(const SchemeSpec& scheme, const model::InteractionParams& inter) {
  const double v = inter.strength(scheme.id);
  if (v == 0.0) throw DomainError("dressed_basis: interaction strength is zero, the interaction block is degenerate");
  const Basis basis = scheme.basis();
  const auto n = static_cast<Eigen::Index>(basis.size());

  const Vector k = superposition_vector(basis, scheme.dd_term.ket);
  const Vector b = superposition_vector(basis, scheme.dd_term.bra);

  std::vector<Vector> cols;
  std::vector<std::string> labels;
  bool inserted = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool in_block = k(i) != cplx(0.0) || b(i) != cplx(0.0);
    if (in_block && !inserted) {
      inserted = true;
      if (scheme.diagonal_interaction()) {
        cols.push_back(k);
        labels.push_back(basis[static_cast<std::size_t>(i)].str());
      } else {
        cols.push_back((k + b) / std::numbers::sqrt2);
        labels.push_back("+");
        cols.push_back((k - b) / std::numbers::sqrt2);
        labels.push_back("-");
      }
    }
    Vector r = Vector::Unit(n, i);
    for (const auto& c : cols) r -= c * c.dot(r);
    const double norm = r.norm();
    if (norm < 1e-8) continue;
    const bool untouched = std::abs(norm - 1.0) < 1e-12;
    cols.push_back(r / norm);
    labels.push_back(untouched ? basis[static_cast<std::size_t>(i)].str() : "perp(" + basis[static_cast<std::size_t>(i)].str() + ")");
  }
  if (static_cast<Eigen::Index>(cols.size()) != n) throw NumericalError("dressed_basis: incomplete basis");

  Matrix u(n, n);
  for (Eigen::Index j = 0; j < n; ++j) u.col(j) = cols[static_cast<std::size_t>(j)];

  const Matrix hd = model::interaction_hamiltonian(scheme, inter).matrix();
  const Matrix diag = u.adjoint() * hd * u;
  Matrix off = diag;
  off.diagonal().setZero();
  if (off.size() && off.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, std::abs(v)))
    throw NumericalError("dressed_basis: interaction block is not diagonal in the dressed basis");

  DressedBasis out{Operator(u, basis), labels, {}};
  for (Eigen::Index j = 0; j < n; ++j) out.energies.push_back(diag(j, j).real());
  return out;
}

RotatedHamiltonian rotate(const TimeDependentHamiltonian& h, const DressedBasis& dressed,
                          const std::vector<double>& reference) {
  const Matrix& u = dressed.unitary.matrix();
  const Eigen::Index n = u.rows();
  if (static_cast<Eigen::Index>(h.dim()) != n || static_cast<Eigen::Index>(reference.size()) != n)
    throw DimensionError("rotate: Hamiltonian, dressed basis and reference sizes differ");

  Vector ref_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) ref_diag(i) = reference[static_cast<std::size_t>(i)];

  std::vector<FrequencyGroup> groups;
  Matrix s = u.adjoint() * h.static_part() * u;
  s.diagonal() -= ref_diag;
  scatter(groups, s, 0.0, reference);
  for (const auto& term : h.terms()) {
    const Matrix a = u.adjoint() * term.op * u;
    const Matrix ad = a.adjoint();
    for (const auto& tone : term.tones) {
      scatter(groups, tone.amplitude * a, tone.frequency, reference);
      scatter(groups, std::conj(tone.amplitude) * ad, -tone.frequency, reference);
    }
  }

  const Basis& basis = h.basis();
  auto to_product = [&](const Matrix& m) { return Operator(u * m * u.adjoint(), basis); };

  Matrix static_d = Matrix::Zero(n, n);
  std::vector<const FrequencyGroup*> negative;
  std::vector<const FrequencyGroup*> positive;
  for (const auto& g : groups) {
    if (std::abs(g.freq) < kFrequencyResolution) static_d += g.m;
    else if (g.freq < 0.0) negative.push_back(&g);
    else positive.push_back(&g);
  }

  const double tol = 1e-12 * std::max(1.0, h.max_frequency());
  if (hermitize_check(static_d) > tol) throw NumericalError("rotate: static part is not Hermitian");
  if (negative.size() != positive.size()) throw NumericalError("rotate: unpaired harmonic frequencies");

  RotatedHamiltonian out;
  out.dressed = dressed;
  out.reference = reference;
  Matrix href = u * ref_diag.asDiagonal() * u.adjoint();
  out.frame_generator = Operator(href, basis);
  out.static_part = to_product(static_d);
  for (const auto* g : negative) {
    const double w = -g->freq;
    auto partner = std::find_if(positive.begin(), positive.end(),
                                [&](const FrequencyGroup* p) { return std::abs(p->freq - w) < kFrequencyResolution; });
    if (partner == positive.end()) throw NumericalError("rotate: harmonic without conjugate partner");
    if (((*partner)->m - g->m.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw NumericalError("rotate: conjugate harmonics do not match");
    out.harmonics.push_back({to_product(g->m), w});
  }
  std::sort(out.harmonics.begin(), out.harmonics.end(),
            [](const Harmonic& a, const Harmonic& b) { return a.freq < b.freq; });
  return out;
}

TimeDependentHamiltonian RotatedHamiltonian::as_time_dependent() const {
  std::vector<DriveTerm> terms;
  for (const auto& h : harmonics) terms.push_back({h.op.matrix().adjoint(), {{1.0, h.freq}}});
  return {static_part.basis(), static_part.matrix(), std::move(terms)};
}

Operator RotatedHamiltonian::frame_unitary(double t) const {
  const Matrix& u = dressed.unitary.matrix();
  Vector phases(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) phases(i) = std::exp(kI * (reference[static_cast<std::size_t>(i)] * t));
  return Operator(u * phases.asDiagonal() * u.adjoint(), dressed.unitary.basis());
}

RotatedHamiltonian rotated_harmonics(const SchemeSpec& scheme, const model::DriveParams& drive,
                                     const model::InteractionParams& inter, Frame frame) {
  drive.validate();
  const auto h = model::build_hamiltonian(scheme, drive, inter);
  DressedBasis dressed = dressed_basis(scheme, inter);
  const double zero = 1e-12 * std::abs(inter.strength(scheme.id));
  std::vector<double> ref;
  for (double e : dressed.energies) {
    if (frame == Frame::kExact || std::abs(e) <= zero) ref.push_back(frame == Frame::kExact ? e : 0.0);
    else ref.push_back(e > 0.0 ? 2.0 * drive.detuning : -2.0 * drive.detuning);
  }
  return rotate(h, dressed, ref);
}

EffectiveModel effective_hamiltonian(const std::vector<Harmonic>& harmonics, const Operator& static_part) {
  EffectiveModel out;
  Matrix h = static_part.matrix();
  double max_norm = 0.0;
  double min_freq = std::numeric_limits<double>::infinity();
  for (const auto& hm : harmonics) {
    if (!(hm.freq > 0.0)) throw DomainError("effective_hamiltonian: harmonic frequencies must be positive");
    const Matrix& a = hm.op.matrix();
    h.noalias() += (a.adjoint() * a - a * a.adjoint()) / hm.freq;
    max_norm = std::max(max_norm, a.operatorNorm());
    min_freq = std::min(min_freq, hm.freq);
  }
  h = 0.5 * (h + h.adjoint()).eval();
  out.h_eff = Operator(h, static_part.basis());
  out.validity_ratio = harmonics.empty() ? 0.0 : max_norm / min_freq;
  if (out.validity_ratio > kValidityRatio) {
    std::ostringstream os;
    os << "effective Hamiltonian outside its validity range: max |h_n| / min w_n = " << out.validity_ratio << " > "
       << kValidityRatio;
    out.warnings.push_back(os.str());
  }

  const Basis& basis = static_part.basis();
  if (basis.is_product()) {
    if (auto i11 = basis.find({"1", "1"})) {
      double sum = 0.0;
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const auto& l = basis[j];
        if (!model::is_ground_level(l.atom1_level) && !model::is_ground_level(l.atom2_level))
          sum += std::norm(h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(*i11)));
      }
      out.rabi_eff = 2.0 * std::sqrt(sum);
    }
    const Matrix shift = h - static_part.matrix();
    for (std::size_t j = 0; j < basis.size(); ++j)
      out.stark[basis[j].str()] = shift(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
  }
  return out;
}

EffectiveModel effective_hamiltonian(const RotatedHamiltonian& rotated) {
  EffectiveModel out = effective_hamiltonian(rotated.harmonics, rotated.static_part);
  const Matrix& u = rotated.dressed.unitary.matrix();
  const Matrix shift = u.adjoint() * (out.h_eff.matrix() - rotated.static_part.matrix()) * u;
  out.stark.clear();
  for (std::size_t j = 0; j < rotated.dressed.size(); ++j)
    out.stark[rotated.dressed.labels[j]] = shift(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
  return out;
}

EffectiveModel derive_effective(const SchemeSpec& scheme, const model::DriveParams& drive,
                                const model::InteractionParams& inter, Frame frame) {
  return effective_hamiltonian(rotated_harmonics(scheme, drive, inter, frame));
}

Operator closed_form(const SchemeSpec& scheme, const model::DriveParams& drive) {
  drive.validate();
  const Basis basis = scheme.basis();
  const Ket g = Ket::basis_state(basis, {"1", "1"});
  const double w2 = drive.rabi * drive.rabi;
  Operator coupling;
  if (scheme.diagonal_interaction()) {
    const Ket dd = Ket(superposition_vector(basis, scheme.dd_term.ket), basis);
    coupling = Operator::outer(g, dd) * cplx(w2 / (2.0 * drive.detuning));
  } else {
    const Vector k = superposition_vector(basis, scheme.dd_term.ket);
    const Vector b = superposition_vector(basis, scheme.dd_term.bra);
    const Ket plus((k + b) / std::numbers::sqrt2, basis);
    const Ket minus((k - b) / std::numbers::sqrt2, basis);
    const cplx c = w2 / (2.0 * std::numbers::sqrt2 * drive.detuning);
    coupling = (Operator::outer(g, plus) - Operator::outer(g, minus)) * c;
  }
  return coupling + coupling.dagger();
}

std::vector<std::size_t> coupling_block(const SchemeSpec& scheme) {
  const Basis basis = scheme.basis();
  std::vector<std::size_t> idx{basis.index("1", "1")};
  for (std::size_t j = 0; j < basis.size(); ++j)
    if (scheme.excitations(basis[j]) == 2) idx.push_back(j);
  return idx;
}

double verify_closed_form(const SchemeSpec& scheme, const model::DriveParams& drive,
                          const model::InteractionParams& inter) {
  const EffectiveModel eff = derive_effective(scheme, drive, inter);
  const Operator ref = closed_form(scheme, drive);
  double dev = 0.0;
  for (auto i : coupling_block(scheme))
    for (auto j : coupling_block(scheme)) dev = std::max(dev, std::abs(eff.h_eff(i, j) - ref(i, j)));
  return dev;
}

std::vector<Operator> rotated_lindblads(const RotatedHamiltonian& rotated, const std::vector<Operator>& lindblads) {
  const Matrix& u = rotated.dressed.unitary.matrix();
  std::vector<Operator> out;
  for (const auto& l : lindblads) {
    std::vector<FrequencyGroup> groups;
    scatter(groups, u.adjoint() * l.matrix() * u, 0.0, rotated.reference);
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.freq < b.freq; });
    for (const auto& g : groups)
      if (g.m.cwiseAbs().maxCoeff() > 0.0) out.emplace_back(u * g.m * u.adjoint(), l.basis());
  }
  return out;
}

}  // namespace rab::effective
