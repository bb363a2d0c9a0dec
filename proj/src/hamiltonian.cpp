#include "rab/hamiltonian.hpp"

#include <cmath>
#include <numbers>

namespace rab {

cplx DriveTerm::coefficient(double t) const {
  cplx c = 0.0;
  for (const auto& tone : tones) c += tone.amplitude * std::exp(kI * (tone.frequency * t));
  return c;
}

TimeDependentHamiltonian::TimeDependentHamiltonian(Basis basis, Matrix static_part, std::vector<DriveTerm> terms)
    : basis_(std::move(basis)), static_(std::move(static_part)), terms_(std::move(terms)) {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  if (static_.rows() != n || static_.cols() != n) throw DimensionError("static part does not match basis");
  if (hermitize_check(static_) > 1e-12 * std::max(1.0, static_.cwiseAbs().maxCoeff()))
    throw DomainError("static part of the Hamiltonian is not Hermitian");
  for (const auto& term : terms_)
    if (term.op.rows() != n || term.op.cols() != n) throw DimensionError("drive operator does not match basis");
}

void TimeDependentHamiltonian::evaluate(double t, Matrix& out) const {
  out = static_;
  for (const auto& term : terms_) {
    const cplx c = term.coefficient(t);
    out.noalias() += c * term.op;
    out.noalias() += std::conj(c) * term.op.adjoint();
  }
}

Operator TimeDependentHamiltonian::at(double t) const {
  Matrix m;
  evaluate(t, m);
  return Operator(std::move(m), basis_);
}

double TimeDependentHamiltonian::max_frequency() const {
  double tone_max = 0.0;
  double drive = 0.0;
  for (const auto& term : terms_) {
    double amp = 0.0;
    for (const auto& tone : term.tones) {
      tone_max = std::max(tone_max, std::abs(tone.frequency));
      amp += std::abs(tone.amplitude);
    }
    drive += amp * term.op.operatorNorm();
  }
  double spread = 0.0;
  if (static_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(static_, Eigen::EigenvaluesOnly);
    spread = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
  }
  return tone_max + spread + 2.0 * drive;
}

std::optional<double> TimeDependentHamiltonian::period() const {
  double base = 0.0;
  for (const auto& term : terms_)
    for (const auto& tone : term.tones)
      if (tone.frequency != 0.0 && (base == 0.0 || std::abs(tone.frequency) < base)) base = std::abs(tone.frequency);
  if (base == 0.0) return std::nullopt;
  for (const auto& term : terms_) {
    for (const auto& tone : term.tones) {
      const double ratio = std::abs(tone.frequency) / base;
      if (std::abs(ratio - std::round(ratio)) > 1e-12 * std::max(1.0, ratio)) return std::nullopt;
    }
  }
  return 2.0 * std::numbers::pi / base;
}

}  // namespace rab
