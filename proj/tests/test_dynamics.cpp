#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rab/dynamics.hpp"
#include "rab/model.hpp"

using namespace rab;
using namespace rab::dynamics;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const Basis& two_level() {
  static const Basis b = Basis::levels({"g", "e"});
  return b;
}

Operator sigma_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return Operator(m, two_level());
}

Operator lowering() { return Operator::transition(two_level(), {"g", ""}, {"e", ""}); }

Ket ground() { return Ket::basis_state(two_level(), {"g", ""}); }
Ket excited() { return Ket::basis_state(two_level(), {"e", ""}); }

struct ForsterRun {
  model::SchemeSpec scheme;
  TimeDependentHamiltonian h;
  std::vector<Operator> lindblads;
  double period;
  std::vector<std::size_t> doubles;
};

ForsterRun forster() {
  const auto& p = model::preset("forster-ravets");
  ForsterRun r{model::scheme(p.scheme), {}, {}, 0.0, {}};
  model::DriveParams d;
  d.rabi = p.rabi();
  d.detuning = model::solve_rab_detuning({p.condition}, p.interaction().v_d(), d.rabi);
  r.h = model::build_hamiltonian(r.scheme, d, p.interaction());
  r.lindblads = model::build_lindblad_set(r.scheme, p.rates());
  r.period = kTwoPi * d.detuning / (d.rabi * d.rabi);
  for (std::size_t j = 0; j < r.scheme.basis().size(); ++j)
    if (r.scheme.excitations(r.scheme.basis()[j]) == 2) r.doubles.push_back(j);
  return r;
}

}  // namespace

TEST_CASE("time grid construction") {
  const TimeGrid g(0.0, 1.0, 0.3, 2, 0.0);
  CHECK(g.steps == 4);
  CHECK(g.dt == doctest::Approx(0.25));
  CHECK(g.time(g.steps) == 1.0);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0.1, 1, 10.0 * kTwoPi), DomainError);
  CHECK_NOTHROW(TimeGrid(0.0, 1.0, 0.005, 1, 10.0 * kTwoPi));
  CHECK_THROWS_AS(TimeGrid(1.0, 0.0, 0.1, 1, 0.0), DomainError);

  const auto h = TimeDependentHamiltonian::constant(sigma_x() * cplx(3.0));
  const auto a = TimeGrid::automatic(h, 0.0, 2.0, 40.0, 10);
  CHECK(a.dt <= max_step(h));
  CHECK_THROWS_AS(TimeGrid::automatic(h, 0.0, 2.0, 10.0, 10), DomainError);
}

TEST_CASE("zero Hamiltonian leaves the state alone") {
  const TimeDependentHamiltonian h(two_level(), Matrix::Zero(2, 2));
  const Ket psi = Ket::superposition(two_level(), {{{"g", ""}, 0.6}, {{"e", ""}, cplx(0.0, 0.8)}});
  const auto t = evolve_unitary(h, psi, TimeGrid(0.0, 3.0, 0.01, 10, 0.0));
  CHECK((t.kets.back().amplitudes() - psi.amplitudes()).norm() < 1e-15);
}

TEST_CASE("resonant Rabi oscillation") {
  const double rabi = kTwoPi * 1.3;
  const auto h = TimeDependentHamiltonian::constant(sigma_x() * cplx(rabi / 2.0));
  for (bool frame : {true, false}) {
    PropagationOptions o;
    o.interaction_frame = frame;
    auto t = evolve_unitary(h, ground(), TimeGrid::automatic(h, 0.0, 2.0, 200.0, 50), o);
    t.add_basis_populations();
    const auto& pe = t.observable("P_e");
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      worst = std::max(worst, std::abs(pe[k] - std::pow(std::sin(rabi * t.times[k] / 2.0), 2)));
    CHECK(worst < 1e-8);
    CHECK(t.diagnostics.max_norm_drift < 1e-8);
  }
}

TEST_CASE("driven two-level system with tones") {
  // c(t) sigma_- + h.c. with c = (W/2) e^{i w t} on a level split by w:
  // resonant, so P_e = sin^2(W t / 2).
  const double w = 50.0, rabi = 3.0;
  Matrix h0 = Matrix::Zero(2, 2);
  h0(1, 1) = w;
  const TimeDependentHamiltonian h(two_level(), h0, {{lowering().matrix() * (rabi / 2.0), {{1.0, w}}}});
  auto t = evolve_unitary(h, ground(), TimeGrid::automatic(h, 0.0, 1.5, 80.0, 30));
  t.add_basis_populations();
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    worst = std::max(worst, std::abs(t.observable("P_e")[k] - std::pow(std::sin(rabi * t.times[k] / 2.0), 2)));
  CHECK(worst < 1e-8);
}

TEST_CASE("exponential decay") {
  const double gamma = 0.7;
  const TimeDependentHamiltonian h(two_level(), Matrix::Zero(2, 2));
  const Operator l = lowering() * cplx(std::sqrt(gamma / 2.0));
  auto t = evolve_master(h, {l, l}, excited().projector(), TimeGrid(0.0, 4.0, 0.002, 50, 0.0));
  t.add_basis_populations();
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    worst = std::max(worst, std::abs(t.observable("P_e")[k] - std::exp(-gamma * t.times[k])));
  CHECK(worst < 1e-6);
  CHECK(t.diagnostics.max_trace_drift < 1e-8);
  CHECK(t.diagnostics.min_eigenvalue > -1e-9);
}

TEST_CASE("closed master equation equals unitary evolution") {
  const auto r = forster();
  const Ket psi0 = Ket::basis_state(r.scheme.basis(), {"1", "1"});
  const auto grid = TimeGrid::automatic(r.h, 0.0, 0.2 * r.period, 40.0, 20);
  const auto u = evolve_unitary(r.h, psi0, grid);
  const auto m = evolve_master(r.h, {}, psi0.projector(), grid);
  REQUIRE(u.size() == m.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    worst = std::max(worst, (u.rho(k).matrix() - m.rhos[k].matrix()).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-8);
}

TEST_CASE("Forster pair: two-excitation transfer peaks near half period") {
  const auto r = forster();
  const Ket psi0 = Ket::basis_state(r.scheme.basis(), {"1", "1"});
  auto t = evolve_unitary(r.h, psi0, TimeGrid::automatic(r.h, 0.0, r.period, 40.0, 200));
  t.add_population_sum("double", r.doubles);
  const auto& pd = t.observable("double");
  const double rabi_eff = kTwoPi / r.period;
  double worst = 0.0, peak = 0.0, t_peak = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    worst = std::max(worst, std::abs(pd[k] - std::pow(std::sin(rabi_eff * t.times[k] / 2.0), 2)));
    if (pd[k] > peak) {
      peak = pd[k];
      t_peak = t.times[k];
    }
  }
  CHECK(worst < 0.05);
  CHECK(std::abs(t_peak / r.period - 0.5) < 0.05);
}

TEST_CASE("Forster pair with decay returns to |11>") {
  const auto r = forster();
  const Ket psi0 = Ket::basis_state(r.scheme.basis(), {"1", "1"});
  auto t = evolve_master(r.h, r.lindblads, psi0.projector(), TimeGrid::automatic(r.h, 0.0, r.period, 40.0, 50));
  t.add_population_sum("double", r.doubles);
  t.add_projector("P11", psi0);
  CHECK(t.observable("double").back() < 0.01);
  CHECK(t.observable("P11").back() > 0.95);
  CHECK(t.diagnostics.max_trace_drift < 1e-8);
  CHECK(t.diagnostics.max_hermiticity < 1e-10);
  CHECK(t.diagnostics.min_eigenvalue > -1e-9);
  CHECK(t.diagnostics.refinements == 0);
}

TEST_CASE("period map and direct stepping agree") {
  const auto r = forster();
  const Ket psi0 = Ket::basis_state(r.scheme.basis(), {"1", "1"});
  const auto grid = TimeGrid::automatic(r.h, 0.0, 0.3 * r.period, 40.0, 10);
  PropagationOptions direct;
  direct.allow_period_map = false;
  const auto b = evolve_master(r.h, r.lindblads, psi0.projector(), grid, direct);

  // A detuned, damped two-level drive over a few hundred drive periods.
  Matrix h0 = Matrix::Zero(2, 2);
  h0(1, 1) = 47.0;
  const TimeDependentHamiltonian h2(two_level(), h0, {{lowering().matrix() * 1.5, {{1.0, 50.0}, {0.5, -50.0}}}});
  const Operator l = lowering() * cplx(0.4);
  const auto g2 = TimeGrid::automatic(h2, 0.0, 300.0 * kTwoPi / 50.0 + 0.01, 40.0, 7);
  const auto p1 = evolve_master(h2, {l}, ground().projector(), g2);
  const auto p2 = evolve_master(h2, {l}, ground().projector(), g2, direct);
  CHECK(p1.times.back() == doctest::Approx(p2.times.back()).epsilon(1e-14));
  CHECK((p1.final_rho().matrix() - p2.final_rho().matrix()).cwiseAbs().maxCoeff() < 1e-9);

  PropagationOptions lab = direct;
  lab.interaction_frame = false;
  const auto c = evolve_master(r.h, r.lindblads, psi0.projector(), grid, lab);
  // Lab-frame stepping carries the larger RK4 error of the fast interaction.
  CHECK((c.final_rho().matrix() - b.final_rho().matrix()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("switched evolution with identical halves equals one run") {
  const double rabi = 2.0;
  const auto h = TimeDependentHamiltonian::constant(sigma_x() * cplx(rabi / 2.0));
  const Operator l = lowering() * cplx(0.3);
  const auto grid = TimeGrid(0.0, 2.0, 0.001, 100, 0.0);
  const auto a = evolve_master(h, {l}, ground().projector(), grid);
  const auto b = evolve_master_switched(h, h, 1.0, {l}, ground().projector(), grid);
  CHECK((a.final_rho().matrix() - b.final_rho().matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b.times.back() == doctest::Approx(2.0));
}

TEST_CASE("invalid initial states are rejected") {
  const auto h = TimeDependentHamiltonian::constant(sigma_x());
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(evolve_master(h, {}, Operator(bad, two_level()), TimeGrid(0.0, 1.0, 0.01, 1, 0.0)), DomainError);
  const Ket unnormalized = Ket::superposition(two_level(), {{{"g", ""}, 1.0}, {{"e", ""}, 1.0}});
  CHECK_THROWS_AS(evolve_unitary(h, unnormalized, TimeGrid(0.0, 1.0, 0.01, 1, 0.0)), DomainError);
  CHECK_THROWS_AS(evolve_unitary(h, ground(), TimeGrid(0.0, 1.0, 0.5, 1, 0.0)), DomainError);
}

TEST_CASE("limit violations abort after the allowed refinements") {
  const auto h = TimeDependentHamiltonian::constant(sigma_x());
  PropagationOptions o;
  o.limits.hermiticity = -1.0;  // unattainable
  CHECK_THROWS_AS(evolve_master(h, {}, ground().projector(), TimeGrid(0.0, 1.0, 0.01, 10, 0.0), o), PhysicalityError);
  o.max_refinements = 0;
  CHECK_THROWS_AS(evolve_master(h, {}, ground().projector(), TimeGrid(0.0, 1.0, 0.01, 10, 0.0), o), NumericalError);
}

TEST_CASE("real coordinates round trip") {
  Matrix rho(3, 3);
  rho << 0.5, cplx(0.1, 0.2), cplx(0.0, -0.1), cplx(0.1, -0.2), 0.3, 0.05, cplx(0.0, 0.1), 0.05, 0.2;
  CHECK((from_real(to_real(rho), 3) - rho).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("steady state of pure decay") {
  const Operator l = lowering() * cplx(0.4);
  const Operator h = Operator::zero(two_level());
  for (auto method : {SteadyMethod::kNullspace, SteadyMethod::kLongTime}) {
    const auto ss = steady_state(h, {l}, method);
    CHECK(std::abs(ss.rho(0, 0) - 1.0) < 1e-9);
    CHECK(ss.residual < 1e-9);
  }
}

TEST_CASE("driven damped two-level steady state") {
  // Closed form for resonant drive W and decay g:
  // rho_ee = (W^2/4) / (g^2/4 + W^2/2).
  const double w = 1.1, g = 0.6;
  const Operator h = sigma_x() * cplx(w / 2.0);
  const Operator l = lowering() * cplx(std::sqrt(g));
  const double expect = (w * w / 4.0) / (g * g / 4.0 + w * w / 2.0);
  const auto ns = steady_state(h, {l}, SteadyMethod::kNullspace);
  const auto lt = steady_state(h, {l}, SteadyMethod::kLongTime);
  CHECK(ns.rho(1, 1).real() == doctest::Approx(expect).epsilon(1e-10));
  CHECK((ns.rho.matrix() - lt.rho.matrix()).cwiseAbs().maxCoeff() < 1e-6);
  Matrix out;
  Liouvillian(std::vector<Operator>{l}, 2).apply(h.matrix(), ns.rho.matrix(), out);
  CHECK(trace_norm(out) < 1e-9);
}

TEST_CASE("degenerate steady space is reported") {
  const Operator h = Operator::zero(two_level());
  CHECK_THROWS_AS(steady_state(h, {}, SteadyMethod::kNullspace), DegenerateSteadyStateError);
  CHECK_THROWS_AS(steady_state(h, {}, SteadyMethod::kLongTime), DegenerateSteadyStateError);
}

TEST_CASE("trajectory CSV") {
  const auto h = TimeDependentHamiltonian::constant(sigma_x());
  auto t = evolve_unitary(h, ground(), TimeGrid(0.0, 1.0, 0.05, 10, 0.0));
  t.add_basis_populations();
  std::ostringstream os;
  t.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("t,P_g,P_e\n0,1,0\n", 0) == 0);
  CHECK(s.find('\r') == std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + static_cast<long>(t.size()));
}
