// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "rab/experiments.hpp"

using namespace rab;
namespace ex = rab::experiments;
using std::numbers::pi;

namespace {

constexpr double kTwoPi = 2.0 * pi;

// Tolerances.
constexpr double kClosedFormTol = 1e-10;       // relative to Omega^2/Delta
constexpr double kPopulationMin = 0.95;
constexpr double kPeakWindow = 0.1;            // |t_peak/T - 1/2|
constexpr double kGeometricTol = 3e-3;
constexpr double kSensitivityTol = 1e-3;
constexpr double kRobustThreshold = 0.9;
constexpr double kSteadyMax = 1e-3;
constexpr double kSteadyCrossTol = 5e-3;
constexpr double kTraceTol = 1e-8;
constexpr double kHermTol = 1e-10;
constexpr double kEigTol = -1e-9;
constexpr double kHalvingTol = 1e-6;
constexpr double kStrengthTol = 2e-3;

// Runtime budgets, s.
constexpr double kBudgetAc1 = 1.0;
constexpr double kBudgetAc2 = 120.0;  // per preset
constexpr double kBudgetAc3 = 600.0;
constexpr double kBudgetAc4 = 1.0;
constexpr double kBudgetAc5 = 900.0;
constexpr double kBudgetAc6 = 600.0;

constexpr double kSteps = 40.0;

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(const char* id, bool ok, const std::string& detail, double seconds) {
  std::printf("%s %s  %s  [%.1f s]\n", id, ok ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Physicality record across every run of the suite.
struct Physicality {
  dynamics::Diagnostics worst;
  double max_halving = 0.0;
  std::string halving_where;
  std::size_t halving_checks = 0;
  std::size_t refinements = 0;

  void add(const dynamics::Diagnostics& d) {
    worst.max_trace_drift = std::max(worst.max_trace_drift, d.max_trace_drift);
    worst.max_hermiticity = std::max(worst.max_hermiticity, d.max_hermiticity);
    worst.min_eigenvalue = std::min(worst.min_eigenvalue, d.min_eigenvalue);
    refinements += d.refinements;
  }

  void add_state(const Operator& rho) {
    const Matrix& m = rho.matrix();
    dynamics::Diagnostics d;
    d.max_trace_drift = std::abs(m.trace() - cplx(1.0));
    d.max_hermiticity = (m - m.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    add(d);
  }

  void halving(const std::string& where, double coarse, double fine) {
    ++halving_checks;
    const double diff = std::abs(fine - coarse);
    if (diff >= max_halving) {
      max_halving = diff;
      halving_where = where;
    }
  }
};

Physicality phys;

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

model::DriveParams preset_drive(const model::Preset& p) {
  model::DriveParams d;
  d.rabi = p.rabi();
  d.detuning = model::solve_rab_detuning({p.condition}, p.interaction().strength(p.scheme), d.rabi);
  return d;
}

const char* kClosedFormPresets[] = {"forster-ravets", "spin-exchange-barredo", "collective-gorniaczyk"};

void ac1() {
  Clock c;
  double worst = 0.0;
  std::string parts;
  for (const char* name : kClosedFormPresets) {
    const auto& p = model::preset(name);
    const auto d = preset_drive(p);
    const double rel =
        effective::verify_closed_form(model::scheme(p.scheme), d, p.interaction()) / (d.rabi * d.rabi / d.detuning);
    worst = std::max(worst, rel);
    parts += fmt(" %s=%.1e", name, rel);
  }
  const double t = c.seconds();
  report("AC1", worst < kClosedFormTol && t < kBudgetAc1,
         fmt("closed-form deviation / (Omega^2/Delta):%s (tol %.0e)", parts.c_str(), kClosedFormTol), t);
}

void ac2() {
  bool ok = true;
  std::string parts;
  double t_max = 0.0;
  for (const char* name : kClosedFormPresets) {
    const auto& p = model::preset(name);
    Clock c;
    ex::PopulationOptions opt;
    opt.steps_per_cycle = kSteps;
    const auto r = ex::population_dynamics(p, opt);
    const double t = c.seconds();
    t_max = std::max(t_max, t);
    phys.add(r.trajectory.diagnostics);
    const double at = r.peak_time / r.gate_time;
    const bool pass = r.peak_double >= kPopulationMin && std::abs(at - 0.5) <= kPeakWindow &&
                      r.final_p11 >= kPopulationMin && t < kBudgetAc2;
    ok = ok && pass;
    parts += fmt(" %s: peak %.4f at t/T=%.3f, P11(T)=%.4f, %.1fs;", name, r.peak_double, at, r.final_p11, t);

    opt.steps_per_cycle = 2.0 * kSteps;
    const auto fine = ex::population_dynamics(p, opt);
    phys.add(fine.trajectory.diagnostics);
    phys.halving(std::string("populations ") + name, r.final_p11, fine.final_p11);
  }
  report("AC2", ok, fmt("min %.2f, peak within %.2f T of T/2:%s", kPopulationMin, kPeakWindow, parts.c_str()), t_max);
}

void ac3() {
  const double thetas[] = {pi, 3 * pi / 4, pi / 2, pi / 4, pi / 6};
  const double expected[] = {0.9969, 0.9962, 0.9949, 0.9938, 0.9936};
  const auto& p = model::preset("forster-ravets");
  ex::GeometricOptions opt;
  opt.align_to_beat = true;
  opt.samples = 2;
  opt.steps_per_cycle = kSteps;

  Clock c;
  std::vector<double> f(5);
  std::vector<ex::GateResult> runs(5);
  ex::parallel_for(5, workers(), [&](std::size_t i) { runs[i] = ex::geometric_gate(thetas[i], p, opt); });
  const double t = c.seconds();

  bool ok = t < kBudgetAc3;
  std::string parts;
  for (std::size_t i = 0; i < 5; ++i) {
    f[i] = runs[i].fidelity;
    phys.add(runs[i].diagnostics);
    ok = ok && std::abs(f[i] - expected[i]) <= kGeometricTol;
    parts += fmt(" %.4f(%.4f)", f[i], expected[i]);
  }

  // Halving check and the unaligned values for reference; not timed.
  ex::GeometricOptions fine = opt;
  fine.steps_per_cycle = 2.0 * kSteps;
  ex::GeometricOptions exact = opt;
  exact.align_to_beat = false;
  std::vector<ex::GateResult> fine_runs(5), exact_runs(5);
  ex::parallel_for(10, workers(), [&](std::size_t k) {
    if (k < 5) fine_runs[k] = ex::geometric_gate(thetas[k], p, fine);
    else exact_runs[k - 5] = ex::geometric_gate(thetas[k - 5], p, exact);
  });
  std::string at_t;
  for (std::size_t i = 0; i < 5; ++i) {
    phys.add(fine_runs[i].diagnostics);
    phys.add(exact_runs[i].diagnostics);
    phys.halving(fmt("geometric theta=%.4f", thetas[i]), f[i], fine_runs[i].fidelity);
    at_t += fmt(" %.4f", exact_runs[i].fidelity);
  }
  report("AC3", ok,
         fmt("F(theta) for pi,3pi/4,pi/2,pi/4,pi/6 at beat-aligned duration:%s, tol %.3f; at exactly T:%s", parts.c_str(),
             kGeometricTol, at_t.c_str()),
         t);
}

void ac4() {
  Clock c;
  const double omega = kTwoPi * 6.663, delta = 10.0 * omega;
  const double s_vdw = model::condition_sensitivity({model::RabConditionKind::kVdwRef}, omega, delta);
  const double s_dd = model::condition_sensitivity({model::RabConditionKind::kForsterFull}, omega, delta);
  const double ratio = model::equal_shift_distance_ratio(omega, delta);
  const double t = c.seconds();
  const bool ok = std::abs(s_vdw - 0.50167) <= kSensitivityTol && std::abs(s_dd - 0.70818) <= kSensitivityTol &&
                  std::abs(ratio - 1.41679) <= kSensitivityTol && t < kBudgetAc4;
  report("AC4", ok,
         fmt("vdW %.5f (0.50167), DD %.5f (0.70818), r_vdW/r_d %.5f (1.41679), tol %.0e", s_vdw, s_dd, ratio,
             kSensitivityTol),
         t);
}

void ac5() {
  std::vector<ex::ScanSeries> omega_series(2);
  omega_series[0].name = "dd";
  omega_series[0].gate.setup = ex::robustness_setup(ex::GateModel::kDdForster);
  omega_series[1].name = "vdw";
  omega_series[1].gate.setup = ex::robustness_setup(ex::GateModel::kVdwReference);
  for (auto& s : omega_series) s.gate.steps_per_cycle = kSteps;
  const auto omegas = ex::logspace(kTwoPi * 0.5, kTwoPi * 30.0, 13);
  const auto drs = ex::linspace(-1e-3, 1e-3, 11);

  Clock c;
  const auto om = ex::robustness_scan(ex::ScanAxis::kOmegaAbs, omega_series, omegas, workers());
  std::vector<ex::SweepResult> dist;
  for (int k : {1, 2}) dist.push_back(ex::robustness_scan(ex::ScanAxis::kDistance, ex::distance_cases(k), drs, workers()));
  const double t = c.seconds();

  phys.add(om.diagnostics);
  for (const auto& d : dist) phys.add(d.diagnostics);

  std::vector<double> mhz;
  for (double w : omegas) mhz.push_back(w / kTwoPi);
  const double w_dd = ex::width_above(mhz, om.fidelities[0], kRobustThreshold);
  const double w_vdw = ex::width_above(mhz, om.fidelities[1], kRobustThreshold);
  const bool a = w_dd > w_vdw;

  double wd[2], wv[2];
  for (int k = 0; k < 2; ++k) {
    wd[k] = ex::width_above(drs, dist[k].fidelities[0], kRobustThreshold);
    wv[k] = ex::width_above(drs, dist[k].fidelities[1], kRobustThreshold);
  }
  const bool b1 = wd[0] > wv[0];
  const bool b2 = wv[1] > wd[1];

  // Halving subset: three Omega points per series, dr = 0 and both ends per case.
  for (std::size_t si = 0; si < 2; ++si)
    for (std::size_t vi : {std::size_t{0}, std::size_t{6}, std::size_t{12}}) {
      auto s = omega_series[si];
      s.gate.steps_per_cycle = 2.0 * kSteps;
      const auto r = ex::robustness_scan(ex::ScanAxis::kOmegaAbs, {s}, {omegas[vi]}, 1);
      phys.add(r.diagnostics);
      phys.halving(fmt("omega scan %s Omega/2pi=%.3f", s.name.c_str(), omegas[vi] / kTwoPi), om.fidelities[si][vi],
                   r.fidelities[0][0]);
    }
  for (int k = 0; k < 2; ++k) {
    auto cases = ex::distance_cases(k + 1);
    for (std::size_t si = 0; si < 2; ++si)
      for (std::size_t vi : {std::size_t{0}, drs.size() / 2, drs.size() - 1}) {
        auto s = cases[si];
        s.gate.steps_per_cycle = 2.0 * kSteps;
        const auto r = ex::robustness_scan(ex::ScanAxis::kDistance, {s}, {drs[vi]}, 1);
        phys.add(r.diagnostics);
        phys.halving(fmt("distance case %d %s dr=%+.4f", k + 1, s.name.c_str(), drs[vi]), dist[k].fidelities[si][vi],
                     r.fidelities[0][0]);
      }
  }

  report("AC5", a && b1 && b2 && t < kBudgetAc5,
         fmt("width of F>%.1f: (a) Omega/2pi DD %.2f vs vdW %.2f MHz; (b) dr case 1 DD %.2e vs vdW %.2e, case 2 DD %.2e "
             "vs vdW %.2e",
             kRobustThreshold, w_dd, w_vdw, wd[0], wv[0], wd[1], wv[1]),
         t);
}

void ac6() {
  Clock c;
  const ex::SteadySetup setup;
  const auto m = ex::steady_model(setup);
  const auto ratios = ex::logspace(0.01, 1.0, 30);
  double best = 1.0, best_ratio = 0.0;
  for (double r : ratios) {
    const auto s = ex::steady_entanglement(ex::MicrowaveParams::from_ratio(r, m.rabi_eff_prime), m);
    phys.add_state(s.state.rho);
    if (s.infidelity < best) {
      best = s.infidelity;
      best_ratio = r;
    }
  }
  const double check_ratio = 0.3;
  const auto mw = ex::MicrowaveParams::from_ratio(check_ratio, m.rabi_eff_prime);
  const auto eff = ex::steady_entanglement(mw, m);
  const auto full = ex::steady_entanglement_full(mw, setup, kSteps);
  const double t = c.seconds();
  phys.add_state(full.state.rho);

  const auto fine = ex::steady_entanglement_full(mw, setup, 2.0 * kSteps);
  phys.add_state(fine.state.rho);
  phys.halving("steady full model", full.infidelity, fine.infidelity);

  const double cross = std::abs(full.infidelity - eff.infidelity);
  report("AC6", best < kSteadyMax && cross <= kSteadyCrossTol && t < kBudgetAc6,
         fmt("min infidelity %.2e at w/Omega'_eff=%.3f (max %.0e); full vs effective at %.1f: %.3e vs %.3e (tol %.3f)",
             best, best_ratio, kSteadyMax, check_ratio, full.infidelity, eff.infidelity, kSteadyCrossTol),
         t);
}

void ac7(double t) {
  const auto& w = phys.worst;
  const bool ok = w.max_trace_drift < kTraceTol && w.max_hermiticity < kHermTol && w.min_eigenvalue > kEigTol &&
                  phys.max_halving < kHalvingTol;
  report("AC7", ok,
         fmt("trace drift %.1e, Hermiticity %.1e, min eigenvalue %.1e, step refinements %zu; dt halving max change %.1e over "
             "%zu checks (%s)",
             w.max_trace_drift, w.max_hermiticity, w.min_eigenvalue, phys.refinements, phys.max_halving,
             phys.halving_checks, phys.halving_where.c_str()),
         t);
}

void ac8() {
  Clock c;
  const double v = model::dd_strength(2.54, 3.0);
  const double t = c.seconds();
  const double rel94 = std::abs(v / (kTwoPi * 94.0) - 1.0);
  report("AC8", std::abs(v / (kTwoPi * 94.07) - 1.0) < kStrengthTol && rel94 < kStrengthTol,
         fmt("V = 2pi x %.4f MHz, off 2pi x 94 MHz by %.3f%% (tol %.1f%%)", v / kTwoPi, 100 * rel94, 100 * kStrengthTol),
         t);
}

}  // namespace

int main() {
  std::printf("acceptance suite, %zu worker(s), %g steps per cycle\n", workers(), kSteps);
  Clock total;
  const std::vector<std::pair<const char*, std::function<void()>>> steps{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}, {"AC8", ac8}};
  for (const auto& [id, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("error: ") + e.what(), 0.0);
    }
  }
  ac7(total.seconds());
  std::printf("%s: %d failure(s), %.1f s total\n", failures ? "FAILED" : "ALL PASSED", failures, total.seconds());
  return failures ? 1 : 0;
}
