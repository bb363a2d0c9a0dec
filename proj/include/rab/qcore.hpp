#pragma once

// Dense complex operator algebra over labeled (product) bases.
//
// Everything is stored densely: the largest two-atom space handled here has
// 25 states, so sparse machinery would buy nothing.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rab/error.hpp"

namespace rab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr std::size_t kMaxDim = 10000;

struct Tolerances {
  double equality = 1e-12;
  double hermiticity = 1e-12;
  double normalization = 1e-10;
};

/// One basis vector |m>_1 (x) |n>_2. Single-atom bases leave atom2_level empty.
struct BasisLabel {
  std::string atom1_level;
  std::string atom2_level;

  bool single_atom() const { return atom2_level.empty(); }
  std::string str() const { return atom1_level + atom2_level; }
  bool operator==(const BasisLabel&) const = default;
};

/// Immutable ordered list of basis labels with an index lookup. A
/// default-constructed Basis is "unlabeled": only its size matters.
class Basis {
 public:
  Basis() = default;
  static Basis unlabeled(std::size_t dim);
  static Basis levels(const std::vector<std::string>& symbols);
  /// Atom1-major product of two single-atom bases.
  static Basis product(const Basis& atom1, const Basis& atom2);

  std::size_t size() const { return size_; }
  bool labeled() const { return data_ != nullptr; }
  bool is_product() const;

  const BasisLabel& operator[](std::size_t i) const;
  const std::vector<BasisLabel>& labels() const;

  std::optional<std::size_t> find(const BasisLabel& label) const;
  /// Index of |a1 a2>; throws DomainError when absent.
  std::size_t index(const std::string& a1, const std::string& a2 = {}) const;

  bool operator==(const Basis& other) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
  std::size_t size_ = 0;
};

class Ket;

/// Dense square complex matrix tied to a basis.
class Operator {
 public:
  Operator() = default;
  Operator(Matrix m, Basis basis);
  explicit Operator(Matrix m);  // unlabeled

  static Operator zero(const Basis& basis);
  static Operator identity(const Basis& basis);
  /// |ket><bra| for two labels of the same basis.
  static Operator transition(const Basis& basis, const BasisLabel& ket, const BasisLabel& bra);
  static Operator outer(const Ket& ket, const Ket& bra);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  const Basis& basis() const { return basis_; }
  cplx operator()(std::size_t i, std::size_t j) const { return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
  /// Matrix element <bra|A|ket> by labels.
  cplx element(const BasisLabel& bra, const BasisLabel& ket) const;

  Operator dagger() const { return Operator(m_.adjoint(), basis_); }
  cplx trace() const { return m_.trace(); }
  double max_abs() const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, cplx s) { return a *= s; }
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Ket operator*(const Operator& a, const Ket& k);

 private:
  Matrix m_;
  Basis basis_;
};

/// State vector tied to a basis.
class Ket {
 public:
  Ket() = default;
  Ket(Vector amplitudes, Basis basis);

  /// Basis vector |label>.
  static Ket basis_state(const Basis& basis, const BasisLabel& label);
  /// Sum of coefficient * |label>, not normalized.
  static Ket superposition(const Basis& basis, const std::vector<std::pair<BasisLabel, cplx>>& terms);

  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
  const Vector& amplitudes() const { return v_; }
  const Basis& basis() const { return basis_; }
  double norm() const { return v_.norm(); }
  Ket normalized() const;

  cplx inner(const Ket& other) const;  // <this|other>
  Operator projector() const;

 private:
  Vector v_;
  Basis basis_;
};

/// Kronecker product; entry[(i*n+j),(k*n+l)] = a[i,k] * b[j,l].
Matrix kron(const Matrix& a, const Matrix& b);

/// Tensor product. Two single-atom labeled operators give a labeled two-atom
/// operator; anything else must be unlabeled.
Operator tensor(const Operator& a, const Operator& b);

Operator commutator(const Operator& a, const Operator& b);

/// max_ij |A - A^dagger|_ij
double hermitize_check(const Operator& a);
double hermitize_check(const Matrix& a);

/// <psi|rho|psi> for a Hermitian unit-trace rho. The imaginary part must
/// vanish to 1e-10; trace must be 1 within 1e-8.
double fidelity(const Ket& psi, const Operator& rho, const Tolerances& tol = {});

/// Population of each basis vector, rho_ii.
std::vector<double> populations(const Operator& rho);

}  // namespace rab
