#pragma once

#include <optional>
#include <vector>

#include "rab/qcore.hpp"

namespace rab {

/// amplitude * exp(i * frequency * t)
struct Tone {
  cplx amplitude;
  double frequency;  // rad/us, any sign
};

/// Contributes c(t) * op + h.c. with c(t) = sum over tones.
struct DriveTerm {
  Matrix op;
  std::vector<Tone> tones;

  cplx coefficient(double t) const;
};

/// H(t) = static_part + sum_k [c_k(t) A_k + h.c.]
class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian() = default;
  TimeDependentHamiltonian(Basis basis, Matrix static_part, std::vector<DriveTerm> terms = {});

  static TimeDependentHamiltonian constant(const Operator& h) { return {h.basis(), h.matrix()}; }

  const Basis& basis() const { return basis_; }
  std::size_t dim() const { return basis_.size(); }
  const Matrix& static_part() const { return static_; }
  const std::vector<DriveTerm>& terms() const { return terms_; }

  /// Writes H(t) into out (resized as needed).
  void evaluate(double t, Matrix& out) const;
  Operator at(double t) const;

  /// Upper bound on the angular frequencies present in the dynamics: largest
  /// tone + spread of the static spectrum + twice the summed drive norms.
  double max_frequency() const;

  /// Common period of all tones when every tone frequency is an integer
  /// multiple of the smallest nonzero one; nullopt for static Hamiltonians or
  /// incommensurate tones.
  std::optional<double> period() const;

 private:
  Basis basis_;
  Matrix static_;
  std::vector<DriveTerm> terms_;
};

}  // namespace rab
