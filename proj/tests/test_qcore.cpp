#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rab/model.hpp"
#include "rab/qcore.hpp"

using namespace rab;

namespace {

Matrix random_matrix(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("identity tensor identity is identity") {
  const Basis b = Basis::levels({"0", "1"});
  const Operator i2 = Operator::identity(b);
  const Operator i4 = tensor(i2, i2);
  CHECK(i4.dim() == 4);
  CHECK(max_diff(i4.matrix(), Matrix::Identity(4, 4)) == 0.0);
  CHECK(i4.basis().is_product());
  CHECK(i4.basis()[1].str() == "01");
}

TEST_CASE("tensor matches the index formula") {
  std::mt19937 rng(7);
  const Matrix a = random_matrix(2, rng), b = random_matrix(2, rng);
  const Operator t = tensor(Operator(a), Operator(b));
  double dev = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) dev = std::max(dev, std::abs(t(i * 2 + j, k * 2 + l) - a(i, k) * b(j, l)));
  CHECK(dev < 1e-14);
}

TEST_CASE("tensor is associative") {
  std::mt19937 rng(11);
  const Operator a(random_matrix(2, rng)), b(random_matrix(3, rng)), c(random_matrix(2, rng));
  CHECK(max_diff(tensor(tensor(a, b), c).matrix(), tensor(a, tensor(b, c)).matrix()) < 1e-14);
}

TEST_CASE("single-atom lowering term lands on the expected product element") {
  const auto& s = model::scheme(model::SchemeId::kForster);
  const Basis atom = s.atom_basis(0);
  const Operator lower = Operator::transition(atom, {"1", ""}, {"d", ""});
  const Operator full = tensor(lower, Operator::identity(s.atom_basis(1)));
  CHECK(full.element({"1", "0"}, {"d", "0"}) == cplx(1.0));
  CHECK(full.element({"1", "1"}, {"d", "1"}) == cplx(1.0));
  CHECK(full.element({"d", "0"}, {"1", "0"}) == cplx(0.0));
  CHECK(full.basis() == s.basis());
}

TEST_CASE("tensor rejects oversized products") {
  const Operator big(Matrix::Identity(200, 200));
  CHECK_THROWS_AS(tensor(big, big), DimensionError);
}

TEST_CASE("fidelity of pure, orthogonal and mixed states") {
  const Basis b = Basis::levels({"a", "b", "c"});
  const Ket a = Ket::basis_state(b, {"a", ""});
  const Ket bb = Ket::basis_state(b, {"b", ""});
  const Ket psi = Ket::superposition(b, {{{"a", ""}, 1.0}, {{"c", ""}, kI}}).normalized();
  CHECK(fidelity(psi, psi.projector()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(fidelity(a, bb.projector())) < 1e-15);
  const Operator mix = 0.5 * (a.projector() + bb.projector());
  CHECK(fidelity(a, mix) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("fidelity stays in [0, 1] for random density matrices") {
  std::mt19937 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Matrix g = random_matrix(4, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    Vector v = random_matrix(4, rng).col(0);
    v.normalize();
    const double f = fidelity(Ket(v, Basis::unlabeled(4)), Operator(rho));
    CHECK(f >= -1e-10);
    CHECK(f <= 1.0 + 1e-10);
  }
}

TEST_CASE("fidelity rejects bad inputs") {
  const Basis b = Basis::levels({"a", "b"});
  const Ket a = Ket::basis_state(b, {"a", ""});
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 0.3;
  CHECK_THROWS_AS(fidelity(a, Operator(m, b)), DomainError);
  CHECK_THROWS_AS(fidelity(a, Operator(Matrix::Identity(3, 3) / 3.0)), DimensionError);
}

TEST_CASE("commutator algebra") {
  std::mt19937 rng(5);
  const Operator a(random_matrix(4, rng)), b(random_matrix(4, rng));
  CHECK(commutator(a, a).max_abs() == 0.0);
  CHECK(max_diff(commutator(a, b).matrix(), a.matrix() * b.matrix() - b.matrix() * a.matrix()) < 1e-14);

  Matrix sp = Matrix::Zero(2, 2);
  sp(0, 1) = 1.0;
  const Operator plus(sp);
  const Matrix c = commutator(plus, plus.dagger()).matrix();
  CHECK(c(0, 0) == cplx(1.0));
  CHECK(c(1, 1) == cplx(-1.0));
  CHECK(std::abs(c(0, 1)) == 0.0);

  CHECK_THROWS_AS(commutator(a, Operator(Matrix::Identity(3, 3))), DimensionError);
}

TEST_CASE("hermiticity check") {
  std::mt19937 rng(9);
  const Matrix g = random_matrix(5, rng);
  CHECK(hermitize_check(Operator(g + g.adjoint())) < 1e-15);
  Matrix iy = Matrix::Zero(2, 2);
  iy(0, 1) = 1.0;
  iy(1, 0) = -1.0;
  CHECK(hermitize_check(Operator(iy)) == doctest::Approx(2.0));
}

TEST_CASE("Hamiltonians from the model layer are Hermitian") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto id : {model::SchemeId::kForster, model::SchemeId::kSpinExchange, model::SchemeId::kCollectiveExchange,
                  model::SchemeId::kVdwReference}) {
    const auto& s = model::scheme(id);
    for (int k = 0; k < 20; ++k) {
      model::DriveParams d;
      d.rabi = 1.0 + 60.0 * u(rng);
      d.detuning = 1.0 + 300.0 * u(rng);
      d.bichromatic = u(rng) < 0.5;
      d.phase = 6.0 * u(rng);
      const model::InteractionParams inter{5.0 * u(rng), 2000.0 * u(rng), 2.0 + 5.0 * u(rng)};
      CHECK(hermitize_check(model::build_full_hamiltonian(s, d, inter, 3.0 * u(rng))) < 1e-12);
    }
  }
}

TEST_CASE("dagger is an involution and kets normalize") {
  std::mt19937 rng(17);
  const Operator a(random_matrix(3, rng));
  CHECK(a.dagger().dagger().matrix() == a.matrix());
  const Ket k = Ket(random_matrix(3, rng).col(0), Basis::unlabeled(3)).normalized();
  CHECK(std::abs(k.norm() - 1.0) < 1e-10);
}

TEST_CASE("basis lookup is a bijection") {
  const auto& s = model::scheme(model::SchemeId::kCollectiveExchange);
  const Basis b = s.basis();
  CHECK(b.size() == 16);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index(b[i].atom1_level, b[i].atom2_level) == i);
  CHECK_THROWS_AS(b.index("x", "0"), DomainError);
}

TEST_CASE("operations on mismatched bases are rejected") {
  const Operator a = Operator::identity(Basis::levels({"0", "1"}));
  const Operator b = Operator::identity(Basis::levels({"0", "1", "2"}));
  CHECK_THROWS_AS(a + b, DimensionError);
  CHECK_THROWS_AS(a * b, DimensionError);
}
