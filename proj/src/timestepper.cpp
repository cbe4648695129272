#include "hypwave/timestepper.hpp"

#include "hypwave/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hypwave {

namespace {

constexpr double kPowerTol = 1e-6;
constexpr int kPowerMaxIter = 500;

} // namespace

CflEstimate estimate_cfl(const AssembledSystem &sys, const SolverConfig &cfg) {
  const SparseSymMatrix &mass = sys.mass;
  const SparseSymMatrix &stiff = sys.stiffness;
  const int n = mass.size();
  const Preconditioner precond(mass, cfg.precond);

  // Fixed seed: the estimate must be reproducible.
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(n);
  for (double &v : x)
    v = unit(rng);

  CflEstimate est;
  double lambda = 0.0;
  std::vector<double> kx(n);
  for (int it = 1; it <= kPowerMaxIter; ++it) {
    stiff.multiply(x, kx);
    // y = M^{-1} K x, warm-started from x.
    PcgResult solve = pcg_solve(mass, kx, precond, x, cfg.tol, cfg.maxiter);
    const double mnorm = std::sqrt(mass.bilinear(solve.x, solve.x));
    if (!(mnorm > 0.0))
      throw NumericalError("power iteration collapsed onto the kernel of K");
    for (int i = 0; i < n; ++i)
      x[i] = solve.x[i] / mnorm;
    const double next = stiff.bilinear(x, x); // <Mx,x> = 1
    est.iterations = it;
    if (it > 1 && std::abs(next - lambda) < kPowerTol * std::abs(next)) {
      lambda = next;
      est.converged = true;
      break;
    }
    lambda = next;
  }
  est.lambda_max = lambda;
  est.dt_max = 2.0 / std::sqrt(lambda);
  return est;
}

InitialFunction bump_initial(double amplitude, double radius) {
  return [amplitude, radius](Complex z) {
    const double s = std::norm(z) / (radius * radius);
    return s < 1.0 ? amplitude * std::exp(1.0 / (s - 1.0)) : 0.0;
  };
}

InitialFunction constant_initial(double value) {
  return [value](Complex) { return value; };
}

std::vector<double> interpolate(const Mesh &m, const DofMap &dm,
                                const InitialFunction &f) {
  std::vector<double> x(dm.n_dofs, 0.0);
  for (std::size_t v = 0; v < m.n_vertices(); ++v)
    x[dm.vertex_to_dof[v]] += f(m.points[v].z());
  for (int d = 0; d < dm.n_dofs; ++d)
    x[d] /= dm.class_sizes[d];
  return x;
}

SimState init_state(const Mesh &m, const DofMap &dm, const AssembledSystem &sys,
                    const InitialFunction &psi0, double dt, double dt_max,
                    StartRule rule, bool allow_unstable,
                    const SolverConfig &cfg) {
  if (!(dt > 0.0))
    throw UsageError("time step must be positive");
  if (dt > dt_max && !allow_unstable)
    throw NumericalError(fmt::format(
        "dt = {:.6g} exceeds the stability limit dt_max = {:.6g}", dt, dt_max));
  SimState s;
  s.dt = dt;
  s.step = 1;
  s.prev = interpolate(m, dm, psi0);
  if (rule == StartRule::first_order) {
    s.cur = s.prev;
    return s;
  }
  std::vector<double> rhs = sys.mass.multiply(s.prev);
  const std::vector<double> kx = sys.stiffness.multiply(s.prev);
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rhs[i] -= 0.5 * dt * dt * kx[i];
  s.cur = pcg_solve(sys.mass, rhs, cfg.precond, s.prev, cfg.tol, cfg.maxiter).x;
  return s;
}

LeapfrogStepper::LeapfrogStepper(const AssembledSystem &sys, double dt,
                                 SolverConfig cfg)
    : lhs_(SparseSymMatrix::combine(1.0, sys.mass, 0.5 * dt, sys.damping)),
      rhs_cur_(SparseSymMatrix::combine(2.0, sys.mass, -dt * dt, sys.stiffness)),
      rhs_prev_(SparseSymMatrix::combine(1.0, sys.mass, -0.5 * dt, sys.damping)),
      precond_(lhs_, cfg.precond), cfg_(cfg), dt_(dt),
      rhs_(sys.mass.size()), tmp_(sys.mass.size()) {
  if (cfg_.two_stage_start)
    diagonal_.emplace(lhs_, PrecondKind::diagonal);
}

void LeapfrogStepper::step(SimState &state) {
  rhs_cur_.multiply(state.cur, rhs_);
  rhs_prev_.multiply(state.prev, tmp_);
  for (std::size_t i = 0; i < rhs_.size(); ++i)
    rhs_[i] -= tmp_[i];

  std::span<const double> start = state.cur;
  PcgResult first;
  int iterations = 0;
  if (diagonal_) {
    first = pcg_solve(lhs_, rhs_, *diagonal_, state.cur, cfg_.tol, cfg_.maxiter);
    iterations += first.iterations;
    start = first.x;
  }
  PcgResult res = pcg_solve(lhs_, rhs_, precond_, start, cfg_.tol, cfg_.maxiter);
  iterations += res.iterations;

  state.prev = std::move(state.cur);
  state.cur = std::move(res.x);
  ++state.step;
  last_iterations_ = iterations;
  total_iterations_ += iterations;
}

SimState step(const SimState &state, const AssembledSystem &sys,
              const SolverConfig &cfg) {
  LeapfrogStepper stepper(sys, state.dt, cfg);
  SimState next = state;
  stepper.step(next);
  return next;
}

double discrete_energy(const SimState &state, const AssembledSystem &sys) {
  const std::size_t n = state.cur.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = (state.cur[i] - state.prev[i]) / state.dt;
  return sys.mass.bilinear(v, v) + sys.stiffness.bilinear(state.prev, state.cur);
}

FourierAccumulator::FourierAccumulator(std::vector<double> omegas_, int n_dofs,
                                       long start, long end, double dt_)
    : omegas(std::move(omegas_)), start_step(start), end_step(end), dt(dt_) {
  fields.assign(omegas.size(),
                std::vector<std::complex<double>>(n_dofs, {0.0, 0.0}));
}

void FourierAccumulator::accumulate(long n, std::span<const double> x) {
  if (n < start_step || n > end_step)
    return;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const std::complex<double> w = std::polar(dt, omegas[k] * n * dt);
    auto &f = fields[k];
    for (std::size_t i = 0; i < x.size(); ++i)
      f[i] += x[i] * w;
  }
}

int FourierAccumulator::find(double omega) const {
  for (std::size_t k = 0; k < omegas.size(); ++k)
    if (std::abs(omegas[k] - omega) <= 1e-12 * std::max(1.0, std::abs(omega)))
      return static_cast<int>(k);
  return -1;
}

double transient_time() { return 2.0 * constants::tau2(); }

long smooth_length(long n) {
  for (long m = n; m > 1; --m) {
    long r = m;
    for (long p : {2L, 3L, 5L, 7L})
      while (r % p == 0)
        r /= p;
    if (r == 1)
      return m;
  }
  return std::max(n, 0L);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &s, const std::string &key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw ValidationError(fmt::format("{}: '{}' is not a number", key, s));
  return v;
}

long to_long(const std::string &s, const std::string &key) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw ValidationError(fmt::format("{}: '{}' is not an integer", key, s));
  return v;
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

} // namespace

void SimConfig::apply_text(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(
          fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (value.empty())
        throw ValidationError(fmt::format("{}: missing value", key));
      if (key == "dt") {
        dt = to_double(value, key);
        if (!(*dt > 0.0))
          throw ValidationError("dt must be positive");
      } else if (key == "dt_factor") {
        dt_factor = to_double(value, key);
        if (!(dt_factor > 0.0))
          throw ValidationError("dt_factor must be positive");
      } else if (key == "t_end") {
        t_end = to_double(value, key);
        if (t_end < 0.0)
          throw ValidationError("t_end must be nonnegative");
      } else if (key == "n_steps") {
        n_steps = to_long(value, key);
        if (*n_steps < 0)
          throw ValidationError("n_steps must be nonnegative");
      } else if (key == "initial.mode") {
        if (value != "bump" && value != "constant")
          throw ValidationError("initial.mode must be bump or constant");
        initial_mode = value;
      } else if (key == "initial.amplitude") {
        initial_amplitude = to_double(value, key);
      } else if (key == "initial.radius") {
        initial_radius = to_double(value, key);
        if (!(initial_radius > 0.0 && initial_radius < 1.0))
          throw ValidationError("initial.radius must lie in (0, 1)");
      } else if (key == "damping.mode") {
        if (value != "none" && value != "annulus")
          throw ValidationError("damping.mode must be none or annulus");
        damping_mode = value;
      } else if (key == "damping.r0") {
        damping_r0 = to_double(value, key);
      } else if (key == "damping.value") {
        damping_value = to_double(value, key);
        if (damping_value < 0.0)
          throw ValidationError("damping.value must be nonnegative");
      } else if (key == "probes") {
        probes.clear();
        for (const std::string &pair : split(value, ';')) {
          const auto xy = split(pair, ',');
          if (xy.size() != 2)
            throw ValidationError(
                fmt::format("probes: '{}' is not an x,y pair", pair));
          const Complex z{to_double(xy[0], key), to_double(xy[1], key)};
          if (!(std::norm(z) < 1.0))
            throw ValidationError(
                fmt::format("probes: '{}' is outside the disc", pair));
          probes.push_back(z);
        }
      } else if (key == "record.start_step") {
        record_start = to_long(value, key);
        if (*record_start < 0)
          throw ValidationError("record.start_step must be nonnegative");
      } else if (key == "record.end_step") {
        record_end = to_long(value, key);
      } else if (key == "energy_every") {
        energy_every = to_long(value, key);
        if (energy_every < 1)
          throw ValidationError("energy_every must be at least 1");
      } else if (key == "fourier.omegas") {
        fourier_omegas.clear();
        for (const std::string &w : split(value, ','))
          fourier_omegas.push_back(to_double(w, key));
      } else if (key == "cg.tol") {
        cg.tol = to_double(value, key);
        if (!(cg.tol > 0.0))
          throw ValidationError("cg.tol must be positive");
      } else if (key == "cg.maxiter") {
        cg.maxiter = static_cast<int>(to_long(value, key));
      } else if (key == "cg.precond") {
        try {
          cg.precond = parse_precond(value);
        } catch (const UsageError &e) {
          throw ValidationError(e.what());
        }
      } else if (key == "cg.start") {
        if (value != "previous" && value != "two-stage")
          throw ValidationError("cg.start must be previous or two-stage");
        cg.two_stage_start = value == "two-stage";
      } else if (key == "start") {
        if (value == "second-order")
          start = StartRule::second_order;
        else if (value == "first-order")
          start = StartRule::first_order;
        else
          throw ValidationError("start must be second-order or first-order");
      } else if (key == "cfl.override") {
        if (value != "true" && value != "false")
          throw ValidationError("cfl.override must be true or false");
        cfl_override = value == "true";
      } else {
        throw ValidationError(fmt::format("unknown key '{}'", key));
      }
    } catch (const ValidationError &e) {
      throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
}

std::vector<std::pair<std::string, std::string>> SimConfig::snapshot() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("dt", dt ? fmt_real(*dt) : "auto");
  kv.emplace_back("dt_factor", fmt_real(dt_factor));
  kv.emplace_back("t_end", fmt_real(t_end));
  kv.emplace_back("n_steps", n_steps ? std::to_string(*n_steps) : "auto");
  kv.emplace_back("initial.mode", initial_mode);
  kv.emplace_back("initial.amplitude", fmt_real(initial_amplitude));
  kv.emplace_back("initial.radius", fmt_real(initial_radius));
  kv.emplace_back("damping.mode", damping_mode);
  kv.emplace_back("damping.r0", fmt_real(damping_r0));
  kv.emplace_back("damping.value", fmt_real(damping_value));
  std::string p;
  for (const Complex &z : probes)
    p += (p.empty() ? "" : ";") + fmt_real(z.real()) + "," + fmt_real(z.imag());
  kv.emplace_back("probes", p);
  kv.emplace_back("record.start_step",
                  record_start ? std::to_string(*record_start) : "auto");
  kv.emplace_back("record.end_step",
                  record_end ? std::to_string(*record_end) : "auto");
  kv.emplace_back("energy_every", std::to_string(energy_every));
  std::string w;
  for (double o : fourier_omegas)
    w += (w.empty() ? "" : ",") + fmt_real(o);
  kv.emplace_back("fourier.omegas", w);
  kv.emplace_back("cg.tol", fmt_real(cg.tol));
  kv.emplace_back("cg.maxiter", std::to_string(cg.maxiter));
  kv.emplace_back("cg.precond", cg.precond == PrecondKind::ic0        ? "ic0"
                                : cg.precond == PrecondKind::diagonal ? "diagonal"
                                                                      : "none");
  kv.emplace_back("cg.start", cg.two_stage_start ? "two-stage" : "previous");
  kv.emplace_back("start", start == StartRule::second_order ? "second-order"
                                                            : "first-order");
  kv.emplace_back("cfl.override", cfl_override ? "true" : "false");
  return kv;
}

DampingFunction SimConfig::damping() const {
  if (damping_mode == "annulus")
    return annulus_damping(damping_r0, damping_value);
  return no_damping();
}

InitialFunction SimConfig::initial() const {
  if (initial_mode == "constant")
    return constant_initial(initial_amplitude);
  return bump_initial(initial_amplitude, initial_radius);
}

SimConfig preset_config(const std::string &name) {
  SimConfig c;
  if (name == "conservation") {
    c.dt_factor = 0.5;
    c.n_steps = 10000;
    c.energy_every = 10;
    c.cg.tol = 1e-12;
  } else if (name == "eigen") {
    c.t_end = 150.0;
    c.energy_every = 100;
    // origin, P' = g_0(P) on the real axis, a point near P_4
    c.probes = {Complex{0.0, 0.0}, Complex{constants::axis_crossing(), 0.0},
                Complex{0.75, 0.28}};
    c.fourier_omegas = {1.96, 2.85, 4.34, 4.83};
  } else if (name == "damped") {
    c.t_end = 50.0;
    c.damping_mode = "annulus";
    c.damping_r0 = 0.6;
    c.damping_value = 0.1;
    c.energy_every = 10;
  } else {
    throw UsageError("unknown preset '" + name +
                     "' (expected conservation, eigen or damped)");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Driver

SimulationResult run_simulation(const SimConfig &cfg, const Mesh &m,
                                const DofMap &dm, const AssembledSystem &sys) {
  SimulationResult out;
  out.cfl = estimate_cfl(sys, cfg.cg);
  out.dt_max = out.cfl.dt_max;
  out.dt = cfg.dt ? *cfg.dt : cfg.dt_factor * out.dt_max;
  const double dt = out.dt;
  out.n_steps = cfg.n_steps ? *cfg.n_steps
                            : static_cast<long>(std::llround(cfg.t_end / dt));

  out.record_start = cfg.record_start
                         ? *cfg.record_start
                         : static_cast<long>(std::ceil(transient_time() / dt));
  if (cfg.record_end) {
    out.record_end = std::min(*cfg.record_end, out.n_steps);
  } else {
    const long available = out.n_steps - out.record_start + 1;
    out.record_end = available >= 2
                         ? out.record_start + smooth_length(available) - 1
                         : out.n_steps;
  }

  out.probes.requested = cfg.probes;
  out.probes.start_step = out.record_start;
  out.probes.dt = dt;
  for (const Complex &z : cfg.probes) {
    const int v = nearest_vertex(m, z);
    out.probes.vertices.push_back(v);
    out.probes.dofs.push_back(dm.vertex_to_dof[v]);
  }
  out.probes.samples.assign(cfg.probes.size(), {});
  out.fourier = FourierAccumulator(cfg.fourier_omegas, dm.n_dofs,
                                   out.record_start, out.record_end, dt);

  SimState state = init_state(m, dm, sys, cfg.initial(), dt, out.dt_max,
                              cfg.start, cfg.cfl_override, cfg.cg);
  if (out.n_steps == 0) {
    out.final_state = std::move(state);
    return out;
  }

  auto record = [&](long n, const std::vector<double> &x) {
    if (n >= out.record_start && n <= out.record_end) {
      for (std::size_t p = 0; p < out.probes.dofs.size(); ++p)
        out.probes.samples[p].push_back(x[out.probes.dofs[p]]);
      out.fourier.accumulate(n, x);
    }
  };
  record(0, state.prev);
  record(1, state.cur);
  out.energy.emplace_back(dt, discrete_energy(state, sys));

  LeapfrogStepper stepper(sys, dt, cfg.cg);
  while (state.step < out.n_steps) {
    stepper.step(state);
    record(state.step, state.cur);
    if (state.step % cfg.energy_every == 0)
      out.energy.emplace_back(state.step * dt, discrete_energy(state, sys));
  }
  out.cg_iterations = stepper.total_iterations();
  out.final_state = std::move(state);
  return out;
}

} // namespace hypwave
