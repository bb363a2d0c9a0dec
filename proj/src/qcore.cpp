#include "rab/qcore.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace rab {

struct Basis::Data {
  std::vector<BasisLabel> labels;
  std::unordered_map<std::string, std::size_t> index;
  bool product = false;
};

namespace {

std::string key_of(const BasisLabel& l) { return l.atom1_level + '\x1f' + l.atom2_level; }

void check_dim(std::size_t dim) {
  if (dim == 0) throw DimensionError("dimension must be positive");
  if (dim > kMaxDim) throw DimensionError("dimension " + std::to_string(dim) + " exceeds limit " + std::to_string(kMaxDim));
}

void check_same_dim(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    std::ostringstream os;
    os << op << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace

Basis Basis::unlabeled(std::size_t dim) {
  check_dim(dim);
  Basis b;
  b.size_ = dim;
  return b;
}

Basis Basis::levels(const std::vector<std::string>& symbols) {
  check_dim(symbols.size());
  auto data = std::make_shared<Data>();
  for (const auto& s : symbols) {
    if (s.empty()) throw DomainError("empty level symbol");
    BasisLabel l{s, {}};
    if (!data->index.emplace(key_of(l), data->labels.size()).second) throw DomainError("duplicate level symbol '" + s + "'");
    data->labels.push_back(std::move(l));
  }
  Basis b;
  b.size_ = symbols.size();
  b.data_ = std::move(data);
  return b;
}

Basis Basis::product(const Basis& atom1, const Basis& atom2) {
  if (!atom1.labeled() || !atom2.labeled() || atom1.is_product() || atom2.is_product())
    throw DomainError("Basis::product needs two labeled single-atom bases");
  check_dim(atom1.size() * atom2.size());
  auto data = std::make_shared<Data>();
  data->product = true;
  for (const auto& a : atom1.labels()) {
    for (const auto& b : atom2.labels()) {
      BasisLabel l{a.atom1_level, b.atom1_level};
      data->index.emplace(key_of(l), data->labels.size());
      data->labels.push_back(std::move(l));
    }
  }
  Basis out;
  out.size_ = data->labels.size();
  out.data_ = std::move(data);
  return out;
}

bool Basis::is_product() const { return data_ && data_->product; }

const BasisLabel& Basis::operator[](std::size_t i) const { return labels().at(i); }

const std::vector<BasisLabel>& Basis::labels() const {
  if (!data_) throw DomainError("basis is unlabeled");
  return data_->labels;
}

std::optional<std::size_t> Basis::find(const BasisLabel& label) const {
  if (!data_) return std::nullopt;
  auto it = data_->index.find(key_of(label));
  if (it == data_->index.end()) return std::nullopt;
  return it->second;
}

std::size_t Basis::index(const std::string& a1, const std::string& a2) const {
  auto i = find({a1, a2});
  if (!i) throw DomainError("basis has no label |" + a1 + a2 + ">");
  return *i;
}

bool Basis::operator==(const Basis& other) const {
  if (size_ != other.size_) return false;
  if (data_ == other.data_) return true;
  if (!data_ || !other.data_) return !data_ && !other.data_;
  return data_->labels == other.data_->labels;
}

// ---------------------------------------------------------------------------

Operator::Operator(Matrix m, Basis basis) : m_(std::move(m)), basis_(std::move(basis)) {
  if (m_.rows() != m_.cols()) throw DimensionError("operator matrix must be square");
  check_dim(static_cast<std::size_t>(m_.rows()));
  check_same_dim(static_cast<std::size_t>(m_.rows()), basis_.size(), "Operator");
}

Operator::Operator(Matrix m) : Operator(m, Basis::unlabeled(static_cast<std::size_t>(m.rows()))) {}

Operator Operator::zero(const Basis& basis) {
  auto n = static_cast<Eigen::Index>(basis.size());
  return Operator(Matrix::Zero(n, n), basis);
}

Operator Operator::identity(const Basis& basis) {
  auto n = static_cast<Eigen::Index>(basis.size());
  return Operator(Matrix::Identity(n, n), basis);
}

Operator Operator::transition(const Basis& basis, const BasisLabel& ket, const BasisLabel& bra) {
  auto out = zero(basis);
  auto i = basis.find(ket);
  auto j = basis.find(bra);
  if (!i || !j) throw DomainError("transition: label |" + (i ? bra.str() : ket.str()) + "> not in basis");
  out.m_(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)) = 1.0;
  return out;
}

Operator Operator::outer(const Ket& ket, const Ket& bra) {
  check_same_dim(ket.dim(), bra.dim(), "outer");
  return Operator(ket.amplitudes() * bra.amplitudes().adjoint(), ket.basis());
}

cplx Operator::element(const BasisLabel& bra, const BasisLabel& ket) const {
  return (*this)(basis_.index(bra.atom1_level, bra.atom2_level), basis_.index(ket.atom1_level, ket.atom2_level));
}

double Operator::max_abs() const { return m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0; }

Operator& Operator::operator+=(const Operator& o) {
  check_same_dim(dim(), o.dim(), "operator+");
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  check_same_dim(dim(), o.dim(), "operator-");
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  check_same_dim(a.dim(), b.dim(), "operator*");
  return Operator(a.m_ * b.m_, a.basis_);
}

Ket operator*(const Operator& a, const Ket& k) {
  check_same_dim(a.dim(), k.dim(), "operator*ket");
  return Ket(a.m_ * k.amplitudes(), a.basis_);
}

// ---------------------------------------------------------------------------

Ket::Ket(Vector amplitudes, Basis basis) : v_(std::move(amplitudes)), basis_(std::move(basis)) {
  check_dim(static_cast<std::size_t>(v_.size()));
  check_same_dim(static_cast<std::size_t>(v_.size()), basis_.size(), "Ket");
}

Ket Ket::basis_state(const Basis& basis, const BasisLabel& label) { return superposition(basis, {{label, 1.0}}); }

Ket Ket::superposition(const Basis& basis, const std::vector<std::pair<BasisLabel, cplx>>& terms) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  for (const auto& [label, c] : terms) {
    auto i = basis.find(label);
    if (!i) throw DomainError("superposition: label |" + label.str() + "> not in basis");
    v(static_cast<Eigen::Index>(*i)) += c;
  }
  return Ket(std::move(v), basis);
}

Ket Ket::normalized() const {
  double n = norm();
  if (n == 0.0) throw DomainError("cannot normalize the zero vector");
  return Ket(v_ / n, basis_);
}

cplx Ket::inner(const Ket& other) const {
  check_same_dim(dim(), other.dim(), "inner");
  return v_.dot(other.v_);  // conjugates the left operand
}

Operator Ket::projector() const { return Operator::outer(*this, *this); }

// ---------------------------------------------------------------------------

Matrix kron(const Matrix& a, const Matrix& b) {
  const auto m = a.rows();
  const auto n = b.rows();
  check_dim(static_cast<std::size_t>(m * n));
  Matrix out(m * n, m * n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < m; ++k) out.block(i * n, k * n, n, n) = a(i, k) * b;
  return out;
}

Operator tensor(const Operator& a, const Operator& b) {
  Matrix m = kron(a.matrix(), b.matrix());
  const bool single = a.basis().labeled() && b.basis().labeled() && !a.basis().is_product() && !b.basis().is_product();
  if (single) return Operator(std::move(m), Basis::product(a.basis(), b.basis()));
  if (a.basis().labeled() || b.basis().labeled())
    throw DomainError("tensor: labeled operands must both be single-atom operators");
  return Operator(std::move(m));
}

Operator commutator(const Operator& a, const Operator& b) {
  check_same_dim(a.dim(), b.dim(), "commutator");
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix(), a.basis());
}

double hermitize_check(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double hermitize_check(const Operator& a) { return hermitize_check(a.matrix()); }

double fidelity(const Ket& psi, const Operator& rho, const Tolerances& tol) {
  check_same_dim(psi.dim(), rho.dim(), "fidelity");
  const double herm = hermitize_check(rho);
  if (herm > std::max(tol.hermiticity, 1e-10)) throw DomainError("fidelity: rho is not Hermitian (deviation " + std::to_string(herm) + ")");
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-8) throw DomainError("fidelity: rho trace " + std::to_string(tr.real()) + " is not 1");
  const cplx f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  if (std::abs(f.imag()) > 1e-10) throw NumericalError("fidelity: imaginary part " + std::to_string(f.imag()));
  return f.real();
}

std::vector<double> populations(const Operator& rho) {
  std::vector<double> out(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i) out[i] = rho(i, i).real();
  return out;
}

}  // namespace rab
