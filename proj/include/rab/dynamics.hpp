#pragma once

// Fixed-step RK4 propagation of kets and density matrices, and steady states
// of the Lindblad equation
//   d rho/dt = -i[H, rho] + sum_k L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rab/hamiltonian.hpp"
#include "rab/qcore.hpp"

namespace rab::dynamics {

/// Uniform grid t0 + k*dt, k = 0..steps, with t0 + steps*dt == t1.
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t sample_stride = 1;

  /// Rejects dt > (2*pi/omega_max)/20. dt is shrunk so that it divides
  /// t1 - t0 into whole steps.
  TimeGrid(double t0, double t1, double dt, std::size_t sample_stride, double omega_max);

  /// dt = (2*pi/omega_max)/steps_per_cycle and about `samples` stored points.
  static TimeGrid automatic(const TimeDependentHamiltonian& h, double t0, double t1, double steps_per_cycle = 40.0,
                            std::size_t samples = 200);

  double time(std::size_t k) const { return k == steps ? t1 : t0 + static_cast<double>(k) * dt; }
};

/// Upper bound on the step allowed for a Hamiltonian.
double max_step(const TimeDependentHamiltonian& h);

struct Diagnostics {
  double max_trace_drift = 0.0;   // |Tr rho - 1|
  double max_hermiticity = 0.0;   // max |rho - rho^dag|
  double min_eigenvalue = 0.0;    // smallest eigenvalue of rho over samples
  double max_norm_drift = 0.0;    // | |psi| - 1 |
  std::size_t refinements = 0;    // step halvings forced by a limit violation
  double dt = 0.0;                // step actually used, us
};

struct Trajectory {
  Basis basis;
  std::vector<double> times;
  std::vector<Ket> kets;       // unitary runs
  std::vector<Operator> rhos;  // master-equation runs
  /// Named series evaluated at every stored time.
  std::vector<std::pair<std::string, std::vector<double>>> observables;
  Diagnostics diagnostics;

  bool is_density() const { return !rhos.empty(); }
  std::size_t size() const { return times.size(); }
  /// State at sample i as a density matrix.
  Operator rho(std::size_t i) const;
  Operator final_rho() const { return rho(size() - 1); }

  /// Adds one population column per basis label.
  void add_basis_populations();
  /// Adds <phi|rho|phi> as a named column.
  void add_projector(const std::string& name, const Ket& phi);
  /// Adds the summed populations of the listed basis indices.
  void add_population_sum(const std::string& name, const std::vector<std::size_t>& indices);
  const std::vector<double>& observable(const std::string& name) const;

  /// Header "t,<names...>" then one row per sample, %.12g, '\n' endings.
  void write_csv(std::ostream& os) const;
};

/// Invariant tolerances checked on every stored sample of a master run.
struct PhysicalityLimits {
  double trace = 1e-8;
  double hermiticity = 1e-10;
  double eigenvalue = -1e-9;
  double norm = 1e-8;
};

struct PropagationOptions {
  /// Allow composing a one-period map when the Hamiltonian is periodic and
  /// the run spans enough periods to make this cheaper.
  bool allow_period_map = true;
  /// Integrate in the interaction picture of the static part (exact change
  /// of variables; RK4 then only sees the drive).
  bool interaction_frame = true;
  PhysicalityLimits limits;
  /// On a limit violation the run is repeated with the step halved, at most
  /// this many times, before the error propagates.
  std::size_t max_refinements = 2;
};

Trajectory evolve_unitary(const TimeDependentHamiltonian& h, const Ket& psi0, const TimeGrid& grid,
                          const PropagationOptions& options = {});

Trajectory evolve_master(const TimeDependentHamiltonian& h, const std::vector<Operator>& lindblads,
                         const Operator& rho0, const TimeGrid& grid, const PropagationOptions& options = {});

/// Piecewise-constant-in-structure Hamiltonian: `first` on [t0, t_switch),
/// `second` on [t_switch, t1]. Both segments use the grid's step.
Trajectory evolve_master_switched(const TimeDependentHamiltonian& first, const TimeDependentHamiltonian& second,
                                  double t_switch, const std::vector<Operator>& lindblads, const Operator& rho0,
                                  const TimeGrid& grid, const PropagationOptions& options = {});

/// Lindblad right-hand side for a fixed Hamiltonian matrix.
class Liouvillian {
 public:
  explicit Liouvillian(const std::vector<Operator>& lindblads, std::size_t dim);

  /// out = -i[H, rho] + D(rho) for Hermitian rho.
  void apply(const Matrix& h, const Matrix& rho, Matrix& out) const;
  std::size_t dim() const { return dim_; }

 private:
  struct Jump {
    int a, c, b, d;  // D(rho)_{ac} += coef * rho_{bd}
    cplx coef;
  };
  std::size_t dim_;
  Matrix decay_;  // 1/2 sum L^dag L
  std::vector<Jump> jumps_;
};

/// Real coordinates of Hermitian matrices in an orthonormal Hermitian basis.
Eigen::VectorXd to_real(const Matrix& rho);
Matrix from_real(const Eigen::VectorXd& x, std::size_t dim);

/// Real n^2 x n^2 generator of the static Lindblad equation.
Eigen::MatrixXd real_liouvillian(const Operator& h, const std::vector<Operator>& lindblads);

enum class SteadyMethod { kNullspace, kLongTime };

struct SteadyOptions {
  /// LONG_TIME stops when the trace norm of d rho/dt is below this (1/us).
  double rate_tolerance = 1e-10;
  /// NULLSPACE reports degeneracy when the second-smallest singular value is
  /// below this fraction of the largest.
  double degeneracy = 1e-12;
  /// Step count per cycle of the fastest frequency for LONG_TIME.
  double steps_per_cycle = 40.0;
  std::size_t max_doublings = 60;
  /// Periodic runs only; static LONG_TIME always steps in the lab frame.
  bool interaction_frame = true;
};

struct SteadyState {
  Operator rho;
  /// Trace norm of d rho/dt at rho (for periodic runs, of (M rho - rho)/period).
  double residual = 0.0;
  /// Smallest and second-smallest singular values (NULLSPACE only).
  double sigma_min = 0.0;
  double sigma_next = 0.0;
  double relaxation_time = 0.0;  // LONG_TIME only, us
};

SteadyState steady_state(const Operator& h, const std::vector<Operator>& lindblads, SteadyMethod method,
                         const SteadyOptions& options = {});

/// Stroboscopic steady state of a periodic Hamiltonian: fixed point of the
/// one-period map, reached by repeated squaring.
SteadyState steady_state_periodic(const TimeDependentHamiltonian& h, const std::vector<Operator>& lindblads,
                                  const SteadyOptions& options = {});

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm(const Matrix& a);

}  // namespace rab::dynamics
