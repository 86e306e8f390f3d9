#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpcontrol/control_field.hpp"
#include "vpcontrol/equilibria.hpp"
#include "vpcontrol/grid.hpp"
#include "vpcontrol/metrics.hpp"
#include "vpcontrol/poisson.hpp"

namespace vpc {

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RecordFlags {
  bool field_history = false;
  bool snapshots = false;
  bool kl = false;
  bool l2 = false;
};

struct SimulationConfig {
  PhaseSpaceGrid grid;
  double dt = 0.1;
  double final_time = 30.0;
  EquilibriumSpec equilibrium = TwoStream{};
  PerturbationSpec perturbation = MultiplicativeCosine{};
  ControlField control;
  RecordFlags record;

  std::size_t n_steps() const {
    return static_cast<std::size_t>(std::llround(final_time / dt));
  }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(final_time >= 0.0)) throw ConfigError("final time must be non-negative");
    const double n = std::round(final_time / dt);
    if (std::abs(n * dt - final_time) > 1e-9 * std::max(1.0, final_time)) {
      throw ConfigError("final time must be an integer multiple of dt");
    }
    if (grid.mx() == 0) throw ConfigError("grid is not initialised");
  }
};

/// Per-step diagnostics of one forward solve. Series are indexed by n = 0..n_steps.
struct SimulationTrace {
  double dt = 0.0;
  std::vector<double> energy_series;
  std::vector<std::vector<double>> field_history;
  std::vector<DistributionState> snapshots;
  std::vector<double> kl_series;
  std::vector<double> l2_series;
  DistributionState final_state;
  std::size_t blowup_warnings = 0;

  std::size_t n_steps() const { return energy_series.empty() ? 0 : energy_series.size() - 1; }
  double time(std::size_t n) const { return static_cast<double>(n) * dt; }
};

/// Free streaming over tau: f_new(x_i, v_j) = f(x_i - v_j tau, v_j), periodic in x,
/// linear interpolation between the two bracketing nodes.
inline void advect_x(const DistributionState& in, DistributionState& out, const PhaseSpaceGrid& grid,
                     double tau) {
  const std::size_t mx = grid.mx();
  const std::size_t mv = grid.mv();
  const auto n = static_cast<long long>(mx);
  std::vector<std::size_t> lo(mv);
  std::vector<double> w(mv);
  for (std::size_t j = 0; j < mv; ++j) {
    const double shift = -grid.v(j) * tau / grid.dx();
    const double fl = std::floor(shift);
    w[j] = shift - fl;
    long long off = static_cast<long long>(fl) % n;
    if (off < 0) off += n;
    lo[j] = static_cast<std::size_t>(off);
  }
  for (std::size_t i = 0; i < mx; ++i) {
    auto dst = out.column(i);
    for (std::size_t j = 0; j < mv; ++j) {
      std::size_t i0 = i + lo[j];
      if (i0 >= mx) i0 -= mx;
      const std::size_t i1 = i0 + 1 == mx ? 0 : i0 + 1;
      dst[j] = (1.0 - w[j]) * in(i0, j) + w[j] * in(i1, j);
    }
  }
  out.set_time(in.time());
}

inline DistributionState advect_x(const DistributionState& in, const PhaseSpaceGrid& grid, double tau) {
  DistributionState out(grid, in.time());
  advect_x(in, out, grid, tau);
  return out;
}

/// Acceleration over tau: f_new(x_i, v_j) = f(x_i, v_j + g(x_i) tau), zero outside [-Lv, Lv).
/// Returns the number of columns whose shift exceeds the velocity half-width.
inline std::size_t advect_v(const DistributionState& in, DistributionState& out,
                            std::span<const double> force, const PhaseSpaceGrid& grid, double tau) {
  const std::size_t mv = grid.mv();
  const auto nv = static_cast<long long>(mv);
  std::size_t warnings = 0;
  for (std::size_t i = 0; i < grid.mx(); ++i) {
    const double disp = force[i] * tau;
    if (std::abs(disp) > grid.lv()) ++warnings;
    const double shift = disp / grid.dv();
    auto src = in.column(i);
    auto dst = out.column(i);
    if (!std::isfinite(shift) || std::abs(shift) > 2.0 * static_cast<double>(mv)) {
      for (std::size_t j = 0; j < mv; ++j) dst[j] = std::isfinite(shift) ? 0.0 : shift;
      continue;
    }
    const double fl = std::floor(shift);
    const double w = shift - fl;
    const auto off = static_cast<long long>(fl);
    for (std::size_t j = 0; j < mv; ++j) {
      const long long j0 = static_cast<long long>(j) + off;
      const long long j1 = j0 + 1;
      const double f0 = (j0 >= 0 && j0 < nv) ? src[static_cast<std::size_t>(j0)] : 0.0;
      const double f1 = (j1 >= 0 && j1 < nv) ? src[static_cast<std::size_t>(j1)] : 0.0;
      dst[j] = (1.0 - w) * f0 + w * f1;
    }
  }
  out.set_time(in.time());
  return warnings;
}

inline DistributionState advect_v(const DistributionState& in, std::span<const double> force,
                                  const PhaseSpaceGrid& grid, double tau) {
  DistributionState out(grid, in.time());
  advect_v(in, out, force, grid, tau);
  return out;
}

/// Sign with which the control enters the velocity kick, g = E_f + control_coupling * H.
inline constexpr double control_coupling = -1.0;

/// Strang-split semi-Lagrangian integrator: half x-step, Poisson solve on the
/// half-stepped state, full v-step with E + H, half x-step.
class VlasovSolver {
 public:
  VlasovSolver(const PhaseSpaceGrid& grid, const ControlField& control)
      : grid_(grid),
        poisson_(grid),
        control_(sample_control(control, grid)),
        scratch_(grid),
        rho_(grid.mx()),
        field_(grid.mx()),
        force_(grid.mx()) {}

  const PhaseSpaceGrid& grid() const noexcept { return grid_; }
  std::span<const double> control_samples() const noexcept { return control_; }
  std::size_t blowup_warnings() const noexcept { return warnings_; }

  /// Advances f in place by dt; returns the self-generated field used for the v-step.
  std::span<const double> step(DistributionState& f, double dt) {
    const double t0 = f.time();
    advect_x(f, scratch_, grid_, 0.5 * dt);
    charge_density(scratch_, grid_, rho_);
    poisson_.field(rho_, field_);
    for (std::size_t i = 0; i < grid_.mx(); ++i) force_[i] = field_[i] + control_coupling * control_[i];
    warnings_ += advect_v(scratch_, f, force_, grid_, dt);
    advect_x(f, scratch_, grid_, 0.5 * dt);
    std::swap(f, scratch_);
    f.set_time(t0 + dt);
    return field_;
  }

  /// Self-generated field of the state f (no stepping).
  std::span<const double> field_of(const DistributionState& f) {
    charge_density(f, grid_, rho_);
    poisson_.field(rho_, field_);
    return field_;
  }

 private:
  PhaseSpaceGrid grid_;
  PoissonSolver poisson_;
  std::vector<double> control_;
  DistributionState scratch_;
  std::vector<double> rho_;
  std::vector<double> field_;
  std::vector<double> force_;
  std::size_t warnings_ = 0;
};

/// One step, functional form. Returns the advanced state and the field from f*.
inline std::pair<DistributionState, FieldSample> step(const DistributionState& state,
                                                      const ControlField& control,
                                                      const PhaseSpaceGrid& grid, double dt) {
  VlasovSolver solver(grid, control);
  DistributionState f = state;
  auto e = solver.step(f, dt);
  FieldSample fs{{e.begin(), e.end()}, 0.0};
  for (double v : fs.values) fs.mean += v;
  fs.mean /= static_cast<double>(fs.values.size());
  return {std::move(f), std::move(fs)};
}

namespace detail {
inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}
}  // namespace detail

/// Runs the configured simulation to final_time. Energies are those of the
/// state at t^n, so the series holds n_steps + 1 entries.
inline SimulationTrace run(const SimulationConfig& config) {
  config.validate();
  const auto& grid = config.grid;
  const std::size_t n_steps = config.n_steps();

  DistributionState f = build_initial_condition(config.equilibrium, config.perturbation, grid);
  VlasovSolver solver(grid, config.control);
  std::optional<EquilibriumReference> ref;
  if (config.record.kl || config.record.l2) ref.emplace(config.equilibrium, grid);

  SimulationTrace trace;
  trace.dt = config.dt;
  trace.energy_series.reserve(n_steps + 1);

  auto record = [&](std::size_t n) {
    auto e = solver.field_of(f);
    if (!detail::all_finite(e)) {
      throw SimulationError("non-finite field at step " + std::to_string(n));
    }
    trace.energy_series.push_back(electric_energy(e, grid));
    if (config.record.field_history) trace.field_history.emplace_back(e.begin(), e.end());
    if (config.record.snapshots) trace.snapshots.push_back(f);
    if (config.record.kl) trace.kl_series.push_back(ref->kl(f));
    if (config.record.l2) trace.l2_series.push_back(ref->l2(f));
  };

  record(0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    solver.step(f, config.dt);
    f.set_time(static_cast<double>(n + 1) * config.dt);
    record(n + 1);
  }
  trace.blowup_warnings = solver.blowup_warnings();
  if (!detail::all_finite(f.values())) throw SimulationError("non-finite density in final state");
  trace.final_state = std::move(f);
  return trace;
}

/// Default forward-solve configuration for a named preset at the given resolution.
inline SimulationConfig make_config(const InstabilityPreset& preset, std::size_t m = 256,
                                    double dt = 0.1) {
  SimulationConfig c;
  c.grid = make_grid(m, m, preset.lx, preset.lv);
  c.dt = dt;
  c.final_time = preset.final_time;
  c.equilibrium = preset.equilibrium;
  c.perturbation = preset.perturbation;
  c.control = ControlField(0, c.grid.k0());
  return c;
}

}  // namespace vpc
