/**
 * @file timestepper.hpp
 * @brief Leapfrog integration of M X'' + D X' + K X = 0.
 *
 * Each step solves
 *   (M + dt/2 D) X^{n+1} = (2M - dt^2 K) X^n - (M - dt/2 D) X^{n-1}
 * by PCG. The scheme is stable when dt^2 sup <KX,X>/<MX,X> < 4, and for D = 0
 * it conserves
 *   E^n = <M (X^n - X^{n-1})/dt, (X^n - X^{n-1})/dt> + <K X^{n-1}, X^n>.
 */
#pragma once

#include "hypwave/fem.hpp"
#include "hypwave/solver.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypwave {

struct SolverConfig {
  double tol = kDefaultCgTol;
  int maxiter = -1; // default_maxiter(n)
  PrecondKind precond = PrecondKind::ic0;
  /// Solve first with diagonal PCG and warm-start the IC(0) solve from it,
  /// instead of starting from the previous step.
  bool two_stage_start = false;
};

struct CflEstimate {
  double lambda_max = 0.0; // sup <KX,X>/<MX,X>
  double dt_max = 0.0;     // 2 / sqrt(lambda_max)
  int iterations = 0;
  bool converged = false; // false when the iteration cap was hit
};

/// Power iteration on M^{-1} K with a Rayleigh-quotient estimate; stops at
/// relative change < 1e-6 or after 500 iterations.
CflEstimate estimate_cfl(const AssembledSystem &sys,
                         const SolverConfig &cfg = {});

struct SimState {
  std::vector<double> prev; // X^{n-1}
  std::vector<double> cur;  // X^n
  long step = 0;            // n
  double dt = 0.0;
};

enum class StartRule { second_order, first_order };

using InitialFunction = std::function<double(Complex)>;

/// amplitude * exp(1 / (|z|^2 / radius^2 - 1)) inside |z| < radius, 0 outside.
InitialFunction bump_initial(double amplitude = 100.0, double radius = 0.1);
InitialFunction constant_initial(double value);

/// Vertex interpolation in dofs (classes take the mean of their vertices).
std::vector<double> interpolate(const Mesh &m, const DofMap &dm,
                                const InitialFunction &f);

/// X^0 interpolates psi0 with zero velocity; X^1 solves
/// M X^1 = M X^0 - dt^2/2 K X^0 (second order) or equals X^0 (first order).
/// Refuses dt > dt_max with NumericalError unless allow_unstable is set.
SimState init_state(const Mesh &m, const DofMap &dm, const AssembledSystem &sys,
                    const InitialFunction &psi0, double dt, double dt_max,
                    StartRule rule = StartRule::second_order,
                    bool allow_unstable = false, const SolverConfig &cfg = {});

/// Holds the factored left-hand side for a fixed dt.
class LeapfrogStepper {
public:
  LeapfrogStepper(const AssembledSystem &sys, double dt, SolverConfig cfg = {});

  void step(SimState &state);
  double dt() const { return dt_; }
  /// PCG iterations of the most recent step.
  int last_iterations() const { return last_iterations_; }
  long total_iterations() const { return total_iterations_; }

private:
  SparseSymMatrix lhs_;       // M + dt/2 D
  SparseSymMatrix rhs_cur_;   // 2M - dt^2 K
  SparseSymMatrix rhs_prev_;  // M - dt/2 D
  Preconditioner precond_;
  std::optional<Preconditioner> diagonal_; // for the two-stage start
  SolverConfig cfg_;
  double dt_;
  std::vector<double> rhs_, tmp_;
  int last_iterations_ = 0;
  long total_iterations_ = 0;
};

/// One step with a freshly built stepper.
SimState step(const SimState &state, const AssembledSystem &sys,
              const SolverConfig &cfg = {});

double discrete_energy(const SimState &state, const AssembledSystem &sys);

struct ProbeLog {
  std::vector<Complex> requested;
  std::vector<int> vertices; // nearest mesh vertex per probe
  std::vector<int> dofs;
  long start_step = 0;
  double dt = 0.0;
  std::vector<std::vector<double>> samples; // [probe][k], step start_step + k

  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }
};

/// Psi_omega = sum_n X^n e^{i omega n dt} dt over steps [start, end].
struct FourierAccumulator {
  std::vector<double> omegas;
  std::vector<std::vector<std::complex<double>>> fields; // [omega][dof]
  long start_step = 0;
  long end_step = 0;
  double dt = 0.0;

  FourierAccumulator() = default;
  FourierAccumulator(std::vector<double> omegas, int n_dofs, long start,
                     long end, double dt);
  /// Adds X^n if n lies in the window.
  void accumulate(long n, std::span<const double> x);
  /// Index of omega (relative match 1e-12), or -1.
  int find(double omega) const;
};

/// The diameter bound 2 d_H(O, P_i) used for the default recording start.
double transient_time();

struct SimConfig {
  std::optional<double> dt;
  double dt_factor = 0.9; // dt = dt_factor * dt_max when dt is not given
  double t_end = 10.0;
  std::optional<long> n_steps; // overrides t_end
  std::string initial_mode = "bump"; // bump | constant
  double initial_amplitude = 100.0;
  double initial_radius = 0.1;
  std::string damping_mode = "none"; // none | annulus
  double damping_r0 = 0.6;
  double damping_value = 0.1;
  std::vector<Complex> probes{Complex{0.0, 0.0}};
  std::optional<long> record_start;
  std::optional<long> record_end;
  long energy_every = 1;
  std::vector<double> fourier_omegas;
  SolverConfig cg;
  StartRule start = StartRule::second_order;
  bool cfl_override = false;

  /// `key = value` lines with '#' comments, applied on top of *this.
  /// Throws ValidationError with the line number on bad input.
  void apply_text(const std::string &text);
  /// Effective settings as key/value pairs, in a fixed order.
  std::vector<std::pair<std::string, std::string>> snapshot() const;

  DampingFunction damping() const;
  InitialFunction initial() const;
};

/// Named experiment settings: conservation, eigen, damped.
SimConfig preset_config(const std::string &name);

/// Largest number of the form 2^a 3^b 5^c 7^d that is <= n.
long smooth_length(long n);

struct SimulationResult {
  ProbeLog probes;
  std::vector<std::pair<double, double>> energy; // (t, E)
  FourierAccumulator fourier;
  SimState final_state;
  double dt = 0.0;
  double dt_max = 0.0;
  CflEstimate cfl;
  long n_steps = 0;
  long record_start = 0;
  long record_end = 0;
  long cg_iterations = 0;
};

/// Steps from t = 0 to t_end. Probes every step in the recording window,
/// energy every energy_every steps, Fourier fields over the window.
SimulationResult run_simulation(const SimConfig &cfg, const Mesh &m,
                                const DofMap &dm, const AssembledSystem &sys);

} // namespace hypwave
