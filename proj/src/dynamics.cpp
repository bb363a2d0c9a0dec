#include "rab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <memory>
#include <sstream>

namespace rab::dynamics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double min_eigenvalue(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

class DiagnosticsTracker {
 public:
  DiagnosticsTracker(Diagnostics& d, const PhysicalityLimits& limits) : d_(d), limits_(limits) {
    d_.min_eigenvalue = std::numeric_limits<double>::infinity();
  }

  void density(double t, const Matrix& rho) {
    const double drift = std::abs(rho.trace() - 1.0);
    const double herm = hermitize_check(rho);
    const double lmin = min_eigenvalue(0.5 * (rho + rho.adjoint()));
    d_.max_trace_drift = std::max(d_.max_trace_drift, drift);
    d_.max_hermiticity = std::max(d_.max_hermiticity, herm);
    d_.min_eigenvalue = std::min(d_.min_eigenvalue, lmin);
    if (drift > limits_.trace || herm > limits_.hermiticity || lmin < limits_.eigenvalue) {
      std::ostringstream os;
      os << "density matrix left the physical set at t = " << t << " us: trace drift " << drift
         << ", Hermiticity deviation " << herm << ", minimum eigenvalue " << lmin;
      throw PhysicalityError(os.str());
    }
  }

  void ket(double t, const Vector& psi) {
    const double drift = std::abs(psi.norm() - 1.0);
    d_.max_norm_drift = std::max(d_.max_norm_drift, drift);
    d_.min_eigenvalue = 0.0;
    if (drift > limits_.norm) {
      std::ostringstream os;
      os << "state norm drifted by " << drift << " at t = " << t << " us";
      throw PhysicalityError(os.str());
    }
  }

 private:
  Diagnostics& d_;
  PhysicalityLimits limits_;
};

// Fixed-step RK4 for the master equation, optionally in the interaction
// picture of the static part. The static part is diagonalized once,
// H_s = W E W^dag, and the integration variable is
//   x_kl = exp(i (E_k - E_l) t) (W^dag rho W)_kl,
// which removes the large static phases from the stepping error. The map
// back to rho is exact.
class MasterPropagator {
 public:
  MasterPropagator(const TimeDependentHamiltonian& h, const std::vector<Operator>& lindblads, bool frame)
      : frame_(frame), n_(static_cast<Eigen::Index>(h.dim())) {
    if (frame_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h.static_part());
      w_ = es.eigenvectors();
      e_ = es.eigenvalues();
    } else {
      w_ = Matrix::Identity(n_, n_);
      e_ = Eigen::VectorXd::Zero(n_);
    }
    Matrix rest = frame_ ? Matrix::Zero(n_, n_) : Matrix(h.static_part());
    std::vector<DriveTerm> terms;
    for (const auto& t : h.terms()) terms.push_back({w_.adjoint() * t.op * w_, t.tones});
    hw_ = TimeDependentHamiltonian(Basis::unlabeled(h.dim()), rest, std::move(terms));
    std::vector<Operator> lw;
    for (const auto& l : lindblads) {
      if (l.dim() != h.dim()) throw DimensionError("Lindblad operator does not match the Hamiltonian");
      Matrix m = w_.adjoint() * l.matrix() * w_;
      const double floor = 1e-15 * std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
      m = m.unaryExpr([floor](cplx z) { return std::abs(z) > floor ? z : cplx(0.0); });
      lw.emplace_back(std::move(m));
    }
    liouv_ = std::make_unique<Liouvillian>(lw, h.dim());
  }

  // Lab-frame rho advanced from ta to tb in `steps` uniform RK4 steps.
  void advance(Matrix& rho, double ta, double tb, std::size_t steps) {
    if (steps == 0) return;
    Matrix x = w_.adjoint() * rho * w_;
    to_frame(ta, x, true);
    const double dt = (tb - ta) / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) step(ta + static_cast<double>(s) * dt, dt, x);
    to_frame(tb, x, false);
    rho = w_ * x * w_.adjoint();
  }

 private:
  void phases(double t) {
    if (!frame_ || t == phase_t_) return;
    phase_t_ = t;
    Vector p(n_);
    for (Eigen::Index k = 0; k < n_; ++k) p(k) = std::exp(cplx(0.0, -e_(k) * t));
    phase_ = p * p.adjoint();
  }

  // Multiplies x elementwise by exp(-i(E_k-E_l)t) (into the frame when inverse).
  void to_frame(double t, Matrix& x, bool inverse) {
    if (!frame_) return;
    phases(t);
    if (inverse) x = x.cwiseProduct(phase_.conjugate());
    else x = x.cwiseProduct(phase_);
  }

  void rhs(double t, const Matrix& x, Matrix& out) {
    hw_.evaluate(t, h_);
    if (!frame_) {
      liouv_->apply(h_, x, out);
      return;
    }
    phases(t);
    lab_ = x.cwiseProduct(phase_);
    liouv_->apply(h_, lab_, out);
    out = out.cwiseProduct(phase_.conjugate());
  }

  void step(double t, double dt, Matrix& x) {
    rhs(t, x, k1_);
    tmp_ = x + (0.5 * dt) * k1_;
    rhs(t + 0.5 * dt, tmp_, k2_);
    tmp_ = x + (0.5 * dt) * k2_;
    rhs(t + 0.5 * dt, tmp_, k3_);
    tmp_ = x + dt * k3_;
    rhs(t + dt, tmp_, k4_);
    x += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  bool frame_;
  Eigen::Index n_;
  Matrix w_;
  Eigen::VectorXd e_;
  TimeDependentHamiltonian hw_;
  std::unique_ptr<Liouvillian> liouv_;
  Matrix h_, phase_, lab_, k1_, k2_, k3_, k4_, tmp_;
  double phase_t_ = std::numeric_limits<double>::quiet_NaN();
};

// Ket counterpart of MasterPropagator.
class KetPropagator {
 public:
  KetPropagator(const TimeDependentHamiltonian& h, bool frame) : frame_(frame), n_(static_cast<Eigen::Index>(h.dim())) {
    if (frame_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h.static_part());
      w_ = es.eigenvectors();
      e_ = es.eigenvalues();
    } else {
      w_ = Matrix::Identity(n_, n_);
      e_ = Eigen::VectorXd::Zero(n_);
    }
    Matrix rest = frame_ ? Matrix::Zero(n_, n_) : Matrix(h.static_part());
    std::vector<DriveTerm> terms;
    for (const auto& t : h.terms()) terms.push_back({w_.adjoint() * t.op * w_, t.tones});
    hw_ = TimeDependentHamiltonian(Basis::unlabeled(h.dim()), rest, std::move(terms));
  }

  void advance(Vector& psi, double ta, double tb, std::size_t steps) {
    if (steps == 0) return;
    Vector x = w_.adjoint() * psi;
    if (frame_) x = x.cwiseProduct(phases(ta).conjugate());
    const double dt = (tb - ta) / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) step(ta + static_cast<double>(s) * dt, dt, x);
    if (frame_) x = x.cwiseProduct(phases(tb));
    psi = w_ * x;
  }

 private:
  Vector phases(double t) const {
    Vector p(n_);
    for (Eigen::Index k = 0; k < n_; ++k) p(k) = std::exp(cplx(0.0, -e_(k) * t));
    return p;
  }

  void rhs(double t, const Vector& x, Vector& out) {
    hw_.evaluate(t, h_);
    if (!frame_) {
      out.noalias() = -kI * (h_ * x);
      return;
    }
    const Vector p = phases(t);
    out.noalias() = -kI * (h_ * x.cwiseProduct(p));
    out = out.cwiseProduct(p.conjugate());
  }

  void step(double t, double dt, Vector& x) {
    rhs(t, x, k1_);
    tmp_ = x + (0.5 * dt) * k1_;
    rhs(t + 0.5 * dt, tmp_, k2_);
    tmp_ = x + (0.5 * dt) * k2_;
    rhs(t + 0.5 * dt, tmp_, k3_);
    tmp_ = x + dt * k3_;
    rhs(t + dt, tmp_, k4_);
    x += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  bool frame_;
  Eigen::Index n_;
  Matrix w_;
  Eigen::VectorXd e_;
  TimeDependentHamiltonian hw_;
  Matrix h_;
  Vector k1_, k2_, k3_, k4_, tmp_;
};

void check_density(const Operator& rho0, std::size_t dim) {
  if (rho0.dim() != dim) throw DimensionError("initial density matrix does not match the Hamiltonian");
  const Matrix& r = rho0.matrix();
  if (hermitize_check(r) > 1e-10) throw DomainError("initial density matrix is not Hermitian");
  if (std::abs(r.trace() - 1.0) > 1e-8) throw DomainError("initial density matrix does not have unit trace");
  if (min_eigenvalue(r) < -1e-9) throw DomainError("initial density matrix is not positive semidefinite");
}

// Matrix of an n^2-dimensional real linear map given by its action on
// Hermitian matrices.
template <class F>
Eigen::MatrixXd real_map(std::size_t dim, F&& f) {
  const auto n2 = static_cast<Eigen::Index>(dim * dim);
  Eigen::MatrixXd out(n2, n2);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n2);
  Matrix rho;
  for (Eigen::Index k = 0; k < n2; ++k) {
    e.setZero();
    e(k) = 1.0;
    rho = from_real(e, dim);
    f(rho);
    out.col(k) = to_real(rho);
  }
  return out;
}

// One-period map of the RK4 integrator started at t0.
Eigen::MatrixXd period_map(MasterPropagator& prop, std::size_t dim, double t0, double period, std::size_t m) {
  return real_map(dim, [&](Matrix& rho) { prop.advance(rho, t0, t0 + period, m); });
}

Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, std::size_t e) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(base.rows(), base.cols());
  while (e > 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e > 0) base = base * base;
  }
  return result;
}

void store_density(Trajectory& traj, DiagnosticsTracker& diag, double t, const Matrix& rho) {
  diag.density(t, rho);
  traj.times.push_back(t);
  traj.rhos.emplace_back(rho, traj.basis);
}

// Direct stepping over [ta, tb] with uniform steps no longer than dt_max;
// stores every `stride`-th step and the end point. The start point is not
// stored.
void step_range(MasterPropagator& prop, Matrix& rho, double ta, double tb, double dt_max, std::size_t stride,
                Trajectory& traj, DiagnosticsTracker& diag) {
  if (tb <= ta) return;
  const auto steps = static_cast<std::size_t>(std::ceil((tb - ta) / dt_max - 1e-9));
  const double dt = (tb - ta) / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; s += stride) {
    const std::size_t e = std::min(steps, s + stride);
    const double t_end = e == steps ? tb : ta + static_cast<double>(e) * dt;
    prop.advance(rho, ta + static_cast<double>(s) * dt, t_end, e - s);
    store_density(traj, diag, t_end, rho);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(double t0_, double t1_, double dt_, std::size_t stride, double omega_max)
    : t0(t0_), t1(t1_), sample_stride(std::max<std::size_t>(stride, 1)) {
  if (!(t1 >= t0)) throw DomainError("time grid: t1 must not precede t0");
  if (!(dt_ > 0.0)) throw DomainError("time grid: dt must be positive");
  if (omega_max > 0.0 && dt_ > (kTwoPi / omega_max) / 20.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time grid: dt = " << dt_ << " us exceeds the limit " << (kTwoPi / omega_max) / 20.0
       << " us set by the fastest frequency " << omega_max << " rad/us";
    throw DomainError(os.str());
  }
  steps = t1 > t0 ? static_cast<std::size_t>(std::ceil((t1 - t0) / dt_ - 1e-9)) : 0;
  dt = steps ? (t1 - t0) / static_cast<double>(steps) : dt_;
}

TimeGrid TimeGrid::automatic(const TimeDependentHamiltonian& h, double t0, double t1, double steps_per_cycle,
                             std::size_t samples) {
  if (!(steps_per_cycle >= 20.0)) throw DomainError("time grid: at least 20 steps per cycle are required");
  const double w = h.max_frequency();
  const double dt = w > 0.0 ? kTwoPi / w / steps_per_cycle : std::max(t1 - t0, 1e-12);
  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
  const std::size_t stride = samples ? std::max<std::size_t>(1, steps / samples) : std::max<std::size_t>(steps, 1);
  return TimeGrid(t0, t1, dt, stride, w);
}

double max_step(const TimeDependentHamiltonian& h) {
  const double w = h.max_frequency();
  return w > 0.0 ? (kTwoPi / w) / 20.0 : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------

Liouvillian::Liouvillian(const std::vector<Operator>& lindblads, std::size_t dim) : dim_(dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  decay_ = Matrix::Zero(n, n);
  for (const auto& l : lindblads) {
    if (l.dim() != dim) throw DimensionError("Lindblad operator does not match the Hamiltonian");
    const Matrix& m = l.matrix();
    decay_.noalias() += 0.5 * (m.adjoint() * m);
    std::vector<std::tuple<int, int, cplx>> nz;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (m(i, j) != cplx(0.0)) nz.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
    for (const auto& [a, b, x] : nz)
      for (const auto& [c, d, y] : nz) jumps_.push_back({a, c, b, d, x * std::conj(y)});
  }
}

void Liouvillian::apply(const Matrix& h, const Matrix& rho, Matrix& out) const {
  // K rho + rho K^dag with K = -iH - decay; for Hermitian rho the second term
  // is the adjoint of the first.
  out.noalias() = -kI * (h * rho);
  out.noalias() -= decay_ * rho;
  out += out.adjoint().eval();
  for (const auto& j : jumps_) out(j.a, j.c) += j.coef * rho(j.b, j.d);
}

Eigen::VectorXd to_real(const Matrix& rho) {
  const Eigen::Index n = rho.rows();
  Eigen::VectorXd x(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i * n + i) = rho(i, i).real();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      x(i * n + j) = std::numbers::sqrt2 * rho(i, j).real();
      x(j * n + i) = std::numbers::sqrt2 * rho(i, j).imag();
    }
  }
  return x;
}

Matrix from_real(const Eigen::VectorXd& x, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (x.size() != n * n) throw DimensionError("from_real: coordinate count does not match dimension");
  Matrix rho(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rho(i, i) = x(i * n + i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const cplx v(x(i * n + j) / std::numbers::sqrt2, x(j * n + i) / std::numbers::sqrt2);
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  }
  return rho;
}

Eigen::MatrixXd real_liouvillian(const Operator& h, const std::vector<Operator>& lindblads) {
  const Liouvillian liouv(lindblads, h.dim());
  Matrix out;
  return real_map(h.dim(), [&](Matrix& rho) {
    liouv.apply(h.matrix(), rho, out);
    rho = out;
  });
}

double trace_norm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------

Operator Trajectory::rho(std::size_t i) const {
  if (is_density()) return rhos.at(i);
  return kets.at(i).projector();
}

void Trajectory::add_basis_populations() {
  if (!basis.labeled()) throw DomainError("trajectory basis is unlabeled");
  for (std::size_t j = 0; j < basis.size(); ++j) add_population_sum("P_" + basis[j].str(), {j});
}

void Trajectory::add_projector(const std::string& name, const Ket& phi) {
  std::vector<double> series(size());
  const Vector& v = phi.amplitudes();
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_density()) series[i] = v.dot(rhos[i].matrix() * v).real();
    else series[i] = std::norm(v.dot(kets[i].amplitudes()));
  }
  observables.emplace_back(name, std::move(series));
}

void Trajectory::add_population_sum(const std::string& name, const std::vector<std::size_t>& indices) {
  std::vector<double> series(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (auto j : indices) {
      const auto jj = static_cast<Eigen::Index>(j);
      series[i] += is_density() ? rhos[i].matrix()(jj, jj).real() : std::norm(kets[i].amplitudes()(jj));
    }
  observables.emplace_back(name, std::move(series));
}

const std::vector<double>& Trajectory::observable(const std::string& name) const {
  for (const auto& [n, s] : observables)
    if (n == name) return s;
  throw DomainError("trajectory has no observable '" + name + "'");
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (const auto& [n, s] : observables) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    os << fmt(times[i]);
    for (const auto& [n, s] : observables) os << ',' << fmt(s[i]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

// Repeats `run` with the step halved while it reports a physicality violation.
template <class Run>
Trajectory with_refinement(const TimeGrid& grid, const PropagationOptions& options, Run&& run) {
  TimeGrid g = grid;
  for (std::size_t r = 0;; ++r) {
    try {
      Trajectory t = run(g);
      t.diagnostics.refinements = r;
      t.diagnostics.dt = g.dt;
      return t;
    } catch (const PhysicalityError&) {
      if (r >= options.max_refinements) throw;
      g = TimeGrid(g.t0, g.t1, 0.5 * g.dt, 2 * g.sample_stride, 0.0);
    }
  }
}

Trajectory evolve_unitary_once(const TimeDependentHamiltonian& h, const Ket& psi0, const TimeGrid& grid,
                               const PropagationOptions& options) {
  if (psi0.dim() != h.dim()) throw DimensionError("initial state does not match the Hamiltonian");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("initial state is not normalized");
  if (grid.dt > max_step(h) * (1.0 + 1e-12)) throw DomainError("time step too large for this Hamiltonian");

  Trajectory traj;
  traj.basis = h.basis();
  DiagnosticsTracker diag(traj.diagnostics, options.limits);
  KetPropagator prop(h, options.interaction_frame);
  Vector psi = psi0.amplitudes();
  diag.ket(grid.t0, psi);
  traj.times.push_back(grid.t0);
  traj.kets.emplace_back(psi, traj.basis);
  for (std::size_t s = 0; s < grid.steps; s += grid.sample_stride) {
    const std::size_t e = std::min(grid.steps, s + grid.sample_stride);
    prop.advance(psi, grid.time(s), grid.time(e), e - s);
    diag.ket(grid.time(e), psi);
    traj.times.push_back(grid.time(e));
    traj.kets.emplace_back(psi, traj.basis);
  }
  return traj;
}

Trajectory evolve_master_once(const TimeDependentHamiltonian& h, const std::vector<Operator>& lindblads,
                              const Operator& rho0, const TimeGrid& grid, const PropagationOptions& options) {
  if (grid.dt > max_step(h) * (1.0 + 1e-12)) throw DomainError("time step too large for this Hamiltonian");

  Trajectory traj;
  traj.basis = h.basis();
  DiagnosticsTracker diag(traj.diagnostics, options.limits);
  MasterPropagator prop(h, lindblads, options.interaction_frame);
  Matrix rho = rho0.matrix();
  store_density(traj, diag, grid.t0, rho);

  const auto period = h.period();
  const double span = grid.t1 - grid.t0;
  const std::size_t n2 = h.dim() * h.dim();
  if (options.allow_period_map && period && span > 0.0) {
    const auto m = static_cast<std::size_t>(std::ceil(*period / grid.dt - 1e-9));
    const auto periods = static_cast<std::size_t>(std::floor(span / *period + 1e-12));
    // Building the map costs one period per real coordinate.
    if (periods > 3 * n2 / 2) {
      const Eigen::MatrixXd map = period_map(prop, h.dim(), grid.t0, *period, m);
      const std::size_t wanted = std::max<std::size_t>(1, grid.steps / grid.sample_stride);
      const std::size_t chunk = std::max<std::size_t>(1, periods / wanted);
      const Eigen::MatrixXd chunk_map = matrix_power(map, chunk);
      Eigen::VectorXd x = to_real(rho);
      std::size_t done = 0;
      while (done < periods) {
        const bool whole = periods - done >= chunk;
        x = whole ? Eigen::VectorXd(chunk_map * x) : Eigen::VectorXd(map * x);
        done += whole ? chunk : 1;
        if (whole || done == periods)
          store_density(traj, diag, grid.t0 + static_cast<double>(done) * *period, from_real(x, h.dim()));
      }
      rho = from_real(x, h.dim());
      const double t_done = grid.t0 + static_cast<double>(periods) * *period;
      step_range(prop, rho, t_done, grid.t1, grid.dt, std::numeric_limits<std::size_t>::max(), traj, diag);
      return traj;
    }
  }

  for (std::size_t s = 0; s < grid.steps; s += grid.sample_stride) {
    const std::size_t e = std::min(grid.steps, s + grid.sample_stride);
    prop.advance(rho, grid.time(s), grid.time(e), e - s);
    store_density(traj, diag, grid.time(e), rho);
  }
  return traj;
}

}  // namespace

Trajectory evolve_unitary(const TimeDependentHamiltonian& h, const Ket& psi0, const TimeGrid& grid,
                          const PropagationOptions& options) {
  if (psi0.dim() != h.dim()) throw DimensionError("initial state does not match the Hamiltonian");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("initial state is not normalized");
  if (grid.dt > max_step(h) * (1.0 + 1e-12)) throw DomainError("time step too large for this Hamiltonian");
  return with_refinement(grid, options, [&](const TimeGrid& g) { return evolve_unitary_once(h, psi0, g, options); });
}

Trajectory evolve_master(const TimeDependentHamiltonian& h, const std::vector<Operator>& lindblads,
                         const Operator& rho0, const TimeGrid& grid, const PropagationOptions& options) {
  check_density(rho0, h.dim());
  if (grid.dt > max_step(h) * (1.0 + 1e-12)) throw DomainError("time step too large for this Hamiltonian");
  return with_refinement(grid, options,
                         [&](const TimeGrid& g) { return evolve_master_once(h, lindblads, rho0, g, options); });
}

Trajectory evolve_master_switched(const TimeDependentHamiltonian& first, const TimeDependentHamiltonian& second,
                                  double t_switch, const std::vector<Operator>& lindblads, const Operator& rho0,
                                  const TimeGrid& grid, const PropagationOptions& options) {
  if (!(t_switch >= grid.t0 && t_switch <= grid.t1)) throw DomainError("switch time outside the grid");
  const double w = std::max(first.max_frequency(), second.max_frequency());
  const TimeGrid g1(grid.t0, t_switch, grid.dt, grid.sample_stride, w);
  const TimeGrid g2(t_switch, grid.t1, grid.dt, grid.sample_stride, w);
  Trajectory a = evolve_master(first, lindblads, rho0, g1, options);
  Trajectory b = evolve_master(second, lindblads, a.final_rho(), g2, options);
  for (std::size_t i = 1; i < b.size(); ++i) {
    a.times.push_back(b.times[i]);
    a.rhos.push_back(std::move(b.rhos[i]));
  }
  a.diagnostics.max_trace_drift = std::max(a.diagnostics.max_trace_drift, b.diagnostics.max_trace_drift);
  a.diagnostics.max_hermiticity = std::max(a.diagnostics.max_hermiticity, b.diagnostics.max_hermiticity);
  a.diagnostics.min_eigenvalue = std::min(a.diagnostics.min_eigenvalue, b.diagnostics.min_eigenvalue);
  a.diagnostics.refinements = std::max(a.diagnostics.refinements, b.diagnostics.refinements);
  a.diagnostics.dt = std::min(a.diagnostics.dt, b.diagnostics.dt);
  return a;
}

// ---------------------------------------------------------------------------

namespace {

SteadyState finish_steady(Matrix rho, double residual) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw NumericalError("steady state has zero trace");
  rho /= tr.real();
  SteadyState out;
  out.rho = Operator(std::move(rho));
  out.residual = residual;
  return out;
}

// Repeatedly squares `step` (a map over duration tau) until the residual of
// the propagated state falls below the tolerance.
SteadyState converge_by_squaring(Eigen::MatrixXd step, double tau, const Matrix& rho0,
                                 const std::function<double(const Matrix&)>& residual, const SteadyOptions& options) {
  Eigen::VectorXd x = to_real(rho0);
  const auto dim = static_cast<std::size_t>(rho0.rows());
  double elapsed = 0.0;
  for (std::size_t k = 0; k <= options.max_doublings; ++k) {
    x = step * x;
    elapsed += tau;
    Matrix rho = from_real(x, dim);
    rho /= rho.trace().real();
    const double r = residual(rho);
    if (r < options.rate_tolerance) {
      SteadyState out = finish_steady(rho, r);
      out.relaxation_time = elapsed;
      return out;
    }
    x = to_real(rho);
    step = step * step;
    tau *= 2.0;
  }
  throw NumericalError("long-time integration did not reach the steady-state tolerance");
}

}  // namespace

SteadyState steady_state(const Operator& h, const std::vector<Operator>& lindblads, SteadyMethod method,
                         const SteadyOptions& options) {
  if (hermitize_check(h) > 1e-12 * std::max(1.0, h.max_abs())) throw DomainError("steady_state: H is not Hermitian");
  const std::size_t dim = h.dim();
  const Liouvillian liouv(lindblads, dim);
  auto rate = [&](const Matrix& rho) {
    Matrix d;
    liouv.apply(h.matrix(), rho, d);
    return trace_norm(d);
  };

  if (method == SteadyMethod::kNullspace) {
    const Eigen::MatrixXd l = real_liouvillian(h, lindblads);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(l, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const Eigen::Index n = s.size();
    const double smax = s(0);
    const double smin = s(n - 1);
    const double snext = n > 1 ? s(n - 2) : smax;
    if (snext <= options.degeneracy * smax) {
      std::ostringstream os;
      os << "steady-state space is degenerate: singular values " << smin << " and " << snext << " (largest " << smax
         << ")";
      throw DegenerateSteadyStateError(os.str());
    }
    Matrix rho = from_real(svd.matrixV().col(n - 1), dim);
    if (std::abs(rho.trace()) < 1e-12) throw NumericalError("steady-state null vector is traceless");
    rho /= rho.trace().real();
    SteadyState out = finish_steady(rho, rate(rho));
    out.rho = Operator(out.rho.matrix(), h.basis());
    out.sigma_min = smin;
    out.sigma_next = snext;
    return out;
  }

  const auto td = TimeDependentHamiltonian::constant(h);
  double w = td.max_frequency();
  Matrix decay = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& l : lindblads) decay += l.matrix().adjoint() * l.matrix();
  w = std::max(w, decay.operatorNorm());
  if (w == 0.0) throw DegenerateSteadyStateError("steady_state: no dynamics, every state is stationary");
  const double dt = kTwoPi / w / options.steps_per_cycle;
  // Lab-frame RK4 on a constant generator is a polynomial in it, so the
  // one-step map has exactly the Liouvillian null vector as its fixed point.
  MasterPropagator prop(td, lindblads, false);
  const Eigen::MatrixXd one = real_map(dim, [&](Matrix& rho) { prop.advance(rho, 0.0, dt, 1); });
  const auto n = static_cast<Eigen::Index>(dim);
  const Matrix rho0 = Matrix::Identity(n, n) / static_cast<double>(dim);
  SteadyState out = converge_by_squaring(one, dt, rho0, rate, options);
  out.rho = Operator(out.rho.matrix(), h.basis());
  return out;
}

SteadyState steady_state_periodic(const TimeDependentHamiltonian& h, const std::vector<Operator>& lindblads,
                                  const SteadyOptions& options) {
  const auto period = h.period();
  if (!period) throw DomainError("steady_state_periodic: Hamiltonian is not periodic");
  const std::size_t dim = h.dim();
  MasterPropagator prop(h, lindblads, options.interaction_frame);
  const double dt_target = kTwoPi / h.max_frequency() / options.steps_per_cycle;
  const auto m = static_cast<std::size_t>(std::ceil(*period / dt_target - 1e-9));
  const Eigen::MatrixXd map = period_map(prop, dim, 0.0, *period, m);
  auto residual = [&](const Matrix& rho) {
    const Matrix next = from_real(map * to_real(rho), dim);
    return trace_norm(next - rho) / *period;
  };
  const auto n = static_cast<Eigen::Index>(dim);
  const Matrix rho0 = Matrix::Identity(n, n) / static_cast<double>(dim);
  SteadyState out = converge_by_squaring(map, *period, rho0, residual, options);
  out.rho = Operator(out.rho.matrix(), h.basis());
  return out;
}

}  // namespace rab::dynamics
